#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "mekit/types.hpp"

namespace mekit {

// Seeded synthetic tracks with ground truth, standing in for the restricted
// ME datasets in tests and experiments.
struct SynthSpec {
  std::uint64_t seed = 1;
  int frames = 600;  // T
  int n_events = 2;
  int duration_min = 9;  // frames, inclusive
  int duration_max = 21;
  double amplitude_min = 0.7;  // must clear the default outer threshold (0.5)
  double amplitude_max = 0.95;
  double noise_level = 0.02;

  enum class Shape { triangle, gaussian };
  Shape shape = Shape::triangle;

  std::vector<std::string> labels = {"neutral", "positive", "negative", "surprise"};
  std::vector<double> class_mix;  // per non-neutral class event probabilities; empty = uniform

  double fps = 30.0;
  std::string video_id = "synth000";
  std::string subject_id = "s000";
};

void validate(const SynthSpec& spec);

// All randomness comes from one SplitMix64 stream seeded with spec.seed and
// consumed in this fixed order (see rng.hpp for the draw definitions):
//   1. per event e: duration (next_int), amplitude (next_range), label
//      (next_unit against the cumulative class mix);
//   2. gap slack before each event: next_below(remaining_slack + 1), events
//      separated by at least 2 frames;
//   3. per event with duration >= 3: the apex is drawn uniformly from the
//      central third (margin max(1, duration/3) off both ends) so the rise
//      and fall ramps stay comparable; shorter events center it without a
//      draw;
//   4. per frame: baseline noise level next_unit() * noise_level;
//   5. per frame outside events: u = next_unit(), the row puts
//      1 - min(0.2, u*noise_level) on neutral (exactly 1 when noiseless)
//      with the remainder split evenly across the other classes. Rows inside
//      an event need no draw: the event label gets 0.7 + 0.3*bump(t), the
//      rest is split evenly.
// Bumps: triangle rises linearly from 0 at onset to `amplitude` at apex and
// back to 0 at offset; gaussian uses sigma = duration/6, truncated to the
// event. spot = min(1, noise + bump).
std::pair<ProbabilityTrack, Annotation> generate(const SynthSpec& spec);

// Writes tracks/<id>.csv, annotations/<id>.json and manifest.json under
// out_dir. Video v uses seed base_seed + v and ids derived from the template.
// Manifest priors are frame frequencies over the generated suite: the share
// of frames inside events of each class, neutral taking the rest.
struct SuiteResult {
  std::filesystem::path manifest_path;
  Manifest manifest;
};

SuiteResult generate_suite(const SynthSpec& video_template, int n_videos,
                           std::uint64_t base_seed, const std::filesystem::path& out_dir);

}  // namespace mekit
