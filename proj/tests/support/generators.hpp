#pragma once

#include <vector>

#include "mekit/rng.hpp"
#include "mekit/types.hpp"

namespace mekit::testsupport {

// Random spotting sequences for decoder fuzzing. Half of the tracks are
// quantized to a 1/8 grid so plateaus, ties and equal-height reselection
// candidates actually occur.
inline std::vector<double> random_spot(SplitMix64& rng, int min_frames = 10,
                                       int max_frames = 500) {
  const int frames = static_cast<int>(rng.next_int(min_frames, max_frames));
  const bool quantize = rng.next_unit() < 0.5;
  std::vector<double> spot(frames);
  double level = rng.next_unit();
  for (int t = 0; t < frames; ++t) {
    // random walk with occasional jumps keeps runs and bumps realistic
    if (rng.next_unit() < 0.15) level = rng.next_unit();
    else level = std::min(1.0, std::max(0.0, level + rng.next_range(-0.25, 0.25)));
    spot[t] = quantize ? static_cast<double>(static_cast<int>(level * 8.0)) / 8.0 : level;
  }
  return spot;
}

inline DecoderConfig random_decoder_config(SplitMix64& rng) {
  DecoderConfig config;
  config.k = static_cast<int>(rng.next_int(1, 60));
  config.theta_low = rng.next_range(0.0, 0.8);
  config.theta_high = rng.next_range(config.theta_low, 0.9);
  config.patience = static_cast<int>(rng.next_int(1, 4));
  config.min_peak_height = rng.next_range(0.2, 0.95);
  config.nms_iou = rng.next_range(0.0, 0.9);
  return config;
}

inline ProbabilityTrack random_track(SplitMix64& rng, int min_frames = 1,
                                     int max_frames = 40) {
  ProbabilityTrack track;
  track.video_id = "rand" + std::to_string(rng.next_below(1000000));
  track.subject_id = "s" + std::to_string(rng.next_below(1000));
  track.fps = rng.next_range(10.0, 240.0);
  const int frames = static_cast<int>(rng.next_int(min_frames, max_frames));
  const int classes = static_cast<int>(rng.next_int(2, 6));
  track.labels.push_back("neutral");
  for (int c = 1; c < classes; ++c) track.labels.push_back("class" + std::to_string(c));
  track.spot.resize(frames);
  track.emo.resize(static_cast<std::size_t>(frames) * classes);
  for (int t = 0; t < frames; ++t) {
    track.spot[t] = rng.next_unit();
    auto row = track.emo_row(t);
    double sum = 0.0;
    for (int c = 0; c < classes; ++c) {
      row[c] = rng.next_unit() + 1e-3;
      sum += row[c];
    }
    for (int c = 0; c < classes; ++c) row[c] /= sum;
  }
  return track;
}

inline Annotation random_annotation(SplitMix64& rng,
                                    const std::vector<std::string>& labels) {
  Annotation ann;
  ann.video_id = "rand" + std::to_string(rng.next_below(1000000));
  ann.subject_id = "s" + std::to_string(rng.next_below(1000));
  ann.fps = rng.next_range(10.0, 240.0);
  int cursor = 0;
  const int n_events = static_cast<int>(rng.next_below(4));
  for (int e = 0; e < n_events; ++e) {
    const int onset = cursor + static_cast<int>(rng.next_below(20));
    const int len = 1 + static_cast<int>(rng.next_below(15));
    const int apex = onset + static_cast<int>(rng.next_below(len));
    Interval iv{onset, apex, onset + len - 1};
    ann.events.push_back({iv, labels[1 + rng.next_below(labels.size() - 1)]});
    cursor = iv.offset + 2;
  }
  return ann;
}

inline Manifest random_manifest(SplitMix64& rng) {
  Manifest manifest;
  const int classes = static_cast<int>(rng.next_int(2, 6));
  manifest.labels.push_back("neutral");
  for (int c = 1; c < classes; ++c) manifest.labels.push_back("class" + std::to_string(c));
  double sum = 0.0;
  for (int c = 0; c < classes; ++c) {
    manifest.class_priors.push_back(rng.next_unit() + 1e-3);
    sum += manifest.class_priors.back();
  }
  for (double& p : manifest.class_priors) p /= sum;
  const int entries = static_cast<int>(rng.next_below(5));
  for (int e = 0; e < entries; ++e)
    manifest.entries.push_back({"vid" + std::to_string(e), "s" + std::to_string(e % 3),
                                "tracks/vid" + std::to_string(e) + ".csv",
                                "annotations/vid" + std::to_string(e) + ".json",
                                rng.next_range(10.0, 240.0)});
  return manifest;
}

}  // namespace mekit::testsupport
