#include "mekit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "mekit/io.hpp"
#include "mekit/rng.hpp"

namespace mekit {

namespace fs = std::filesystem;

void validate(const SynthSpec& spec) {
  if (spec.frames < 1) throw Error(Err::infeasible_spec, "frames must be >= 1");
  if (spec.n_events < 0) throw Error(Err::infeasible_spec, "n_events must be >= 0");
  if (spec.duration_min < 1 || spec.duration_min > spec.duration_max)
    throw Error(Err::infeasible_spec, "invalid duration range");
  if (!(spec.amplitude_min > 0.5))
    throw Error(Err::infeasible_spec,
                "amplitude_min must exceed the default outer threshold 0.5");
  if (!(spec.amplitude_min <= spec.amplitude_max && spec.amplitude_max <= 1.0))
    throw Error(Err::infeasible_spec, "invalid amplitude range");
  if (!(spec.noise_level >= 0.0 && std::isfinite(spec.noise_level)))
    throw Error(Err::infeasible_spec, "noise_level must be >= 0");
  if (spec.labels.size() < 2 || spec.labels.front() != kNeutralLabel)
    throw Error(Err::infeasible_spec, "labels must start with neutral and hold >= 2 classes");
  if (!spec.class_mix.empty() && spec.class_mix.size() != spec.labels.size() - 1)
    throw Error(Err::infeasible_spec, "class_mix must have one entry per non-neutral class");
  if (!(std::isfinite(spec.fps) && spec.fps > 0.0))
    throw Error(Err::infeasible_spec, "fps must be positive");
  // worst case: every event at maximum duration, 2 spare frames between events
  if (spec.n_events > 0) {
    const long long need = static_cast<long long>(spec.n_events) * spec.duration_max +
                           2LL * (spec.n_events - 1);
    if (need > spec.frames)
      throw Error(Err::infeasible_spec, "events cannot fit in " +
                                            std::to_string(spec.frames) + " frames");
  }
}

namespace {

double bump_value(SynthSpec::Shape shape, const Interval& event, double amplitude, int frame) {
  if (frame < event.onset || frame > event.offset) return 0.0;
  if (event.length() == 1) return amplitude;
  if (shape == SynthSpec::Shape::triangle) {
    if (frame == event.apex) return amplitude;
    if (frame < event.apex)
      return amplitude * static_cast<double>(frame - event.onset) /
             static_cast<double>(event.apex - event.onset);
    return amplitude * static_cast<double>(event.offset - frame) /
           static_cast<double>(event.offset - event.apex);
  }
  const double sigma = static_cast<double>(event.length()) / 6.0;
  const double d = static_cast<double>(frame - event.apex);
  return amplitude * std::exp(-(d * d) / (2.0 * sigma * sigma));
}

int pick_label(SplitMix64& rng, const SynthSpec& spec) {
  const std::size_t n = spec.labels.size() - 1;
  std::vector<double> mix = spec.class_mix;
  if (mix.empty()) mix.assign(n, 1.0 / static_cast<double>(n));
  double total = 0.0;
  for (double m : mix) total += m;
  const double u = rng.next_unit() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += mix[i];
    if (u < acc) return static_cast<int>(i) + 1;
  }
  return static_cast<int>(n);
}

}  // namespace

std::pair<ProbabilityTrack, Annotation> generate(const SynthSpec& spec) {
  validate(spec);
  SplitMix64 rng(spec.seed);
  const int n_classes = static_cast<int>(spec.labels.size());

  // 1. per-event draws
  std::vector<int> durations(spec.n_events);
  std::vector<double> amplitudes(spec.n_events);
  std::vector<int> label_indices(spec.n_events);
  long long used = 0;
  for (int e = 0; e < spec.n_events; ++e) {
    durations[e] = static_cast<int>(rng.next_int(spec.duration_min, spec.duration_max));
    amplitudes[e] = rng.next_range(spec.amplitude_min, spec.amplitude_max);
    label_indices[e] = pick_label(rng, spec);
    used += durations[e];
  }

  // 2. placement: distribute the slack frame budget across the leading gaps
  std::vector<Interval> events(spec.n_events);
  if (spec.n_events > 0) {
    long long slack = spec.frames - used - 2LL * (spec.n_events - 1);
    int cursor = 0;
    for (int e = 0; e < spec.n_events; ++e) {
      const long long extra =
          slack > 0 ? static_cast<long long>(rng.next_below(static_cast<std::uint64_t>(slack) + 1))
                    : 0;
      slack -= extra;
      cursor += static_cast<int>(extra) + (e > 0 ? 2 : 0);
      events[e].onset = cursor;
      events[e].offset = cursor + durations[e] - 1;
      cursor = events[e].offset + 1;
    }
  }

  // 3. apexes, kept in the central third so rise and fall stay comparable
  for (int e = 0; e < spec.n_events; ++e) {
    if (durations[e] >= 3) {
      const int margin = std::max(1, durations[e] / 4);
      const int lo = events[e].onset + margin;
      const int hi = events[e].offset - margin;
      events[e].apex = lo + static_cast<int>(rng.next_below(hi - lo + 1));
    } else {
      events[e].apex = events[e].onset + (durations[e] - 1) / 2;
    }
  }

  ProbabilityTrack track;
  track.video_id = spec.video_id;
  track.subject_id = spec.subject_id;
  track.fps = spec.fps;
  track.labels = spec.labels;
  track.spot.assign(spec.frames, 0.0);
  track.emo.assign(static_cast<std::size_t>(spec.frames) * n_classes, 0.0);

  // 4. baseline noise
  for (int t = 0; t < spec.frames; ++t) track.spot[t] = spec.noise_level * rng.next_unit();

  // event membership per frame (-1 = outside)
  std::vector<int> owner(spec.frames, -1);
  for (int e = 0; e < spec.n_events; ++e)
    for (int t = events[e].onset; t <= events[e].offset; ++t) owner[t] = e;

  // 5. spot bumps and emotion rows
  for (int t = 0; t < spec.frames; ++t) {
    auto row = track.emo_row(t);
    const int e = owner[t];
    if (e >= 0) {
      const double bump = bump_value(spec.shape, events[e], amplitudes[e], t);
      track.spot[t] = std::min(1.0, track.spot[t] + bump);
      const double mass = 0.7 + 0.3 * bump;
      const double rest = (1.0 - mass) / static_cast<double>(n_classes - 1);
      for (int c = 0; c < n_classes; ++c) row[c] = c == label_indices[e] ? mass : rest;
    } else {
      const double u = rng.next_unit();
      const double neutral = 1.0 - std::min(0.2, u * spec.noise_level);
      const double rest = (1.0 - neutral) / static_cast<double>(n_classes - 1);
      row[0] = neutral;
      for (int c = 1; c < n_classes; ++c) row[c] = rest;
    }
  }

  Annotation annotation;
  annotation.video_id = spec.video_id;
  annotation.subject_id = spec.subject_id;
  annotation.fps = spec.fps;
  for (int e = 0; e < spec.n_events; ++e)
    annotation.events.push_back({events[e], spec.labels[label_indices[e]]});

  validate(track);
  validate(annotation, track.labels);
  return {std::move(track), std::move(annotation)};
}

SuiteResult generate_suite(const SynthSpec& video_template, int n_videos,
                           std::uint64_t base_seed, const fs::path& out_dir) {
  if (n_videos < 1) throw Error(Err::infeasible_spec, "n_videos must be >= 1");

  fs::create_directories(out_dir / "tracks");
  fs::create_directories(out_dir / "annotations");

  Manifest manifest;
  manifest.labels = video_template.labels;
  const int n_classes = static_cast<int>(manifest.labels.size());
  std::vector<long long> class_frames(n_classes, 0);
  long long total_frames = 0;

  char suffix[16];
  for (int v = 0; v < n_videos; ++v) {
    SynthSpec spec = video_template;
    spec.seed = base_seed + static_cast<std::uint64_t>(v);
    std::snprintf(suffix, sizeof(suffix), "%03d", v);
    spec.video_id = "synth" + std::string(suffix);
    spec.subject_id = "s" + std::string(suffix);

    auto [track, annotation] = generate(spec);
    const std::string track_rel = "tracks/" + spec.video_id + ".csv";
    const std::string ann_rel = "annotations/" + spec.video_id + ".json";
    write_track(track, out_dir / track_rel);
    write_annotation(annotation, out_dir / ann_rel);

    total_frames += track.frames();
    for (const auto& event : annotation.events) {
      int c = 0;
      for (int i = 1; i < n_classes; ++i)
        if (manifest.labels[i] == event.label) c = i;
      class_frames[c] += event.interval.length();
    }

    manifest.entries.push_back(
        {spec.video_id, spec.subject_id, track_rel, ann_rel, spec.fps});
  }

  manifest.class_priors.assign(n_classes, 0.0);
  long long event_frames = 0;
  for (int c = 1; c < n_classes; ++c) {
    manifest.class_priors[c] =
        static_cast<double>(class_frames[c]) / static_cast<double>(total_frames);
    event_frames += class_frames[c];
  }
  manifest.class_priors[0] =
      static_cast<double>(total_frames - event_frames) / static_cast<double>(total_frames);

  SuiteResult result;
  result.manifest_path = out_dir / "manifest.json";
  result.manifest = std::move(manifest);
  write_manifest(result.manifest, result.manifest_path);
  return result;
}

}  // namespace mekit
