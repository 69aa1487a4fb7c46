#pragma once

#include <span>
#include <string>
#include <vector>

#include "mekit/error.hpp"

namespace mekit {

inline constexpr double kRowSumTolerance = 1e-6;
inline constexpr const char* kNeutralLabel = "neutral";

// Frame indices are 0-based and inclusive on both ends. All interval
// arithmetic is in frames; fps is carried as metadata only.
struct Interval {
  int onset = 0;
  int apex = 0;
  int offset = 0;

  int length() const { return offset - onset + 1; }
  bool contains(int frame) const { return frame >= onset && frame <= offset; }

  friend bool operator==(const Interval&, const Interval&) = default;
};

void validate(const Interval& interval);

struct LabeledInterval {
  Interval interval;
  std::string label;        // non-neutral class name
  double confidence = 0.0;  // in [0,1]

  friend bool operator==(const LabeledInterval&, const LabeledInterval&) = default;
};

// Per-frame spotting probability plus per-frame emotion distribution for one
// video. `emo` is row-major T x N with each row summing to 1; labels[0] is
// always "neutral".
struct ProbabilityTrack {
  std::string video_id;
  std::string subject_id;
  double fps = 30.0;
  std::vector<double> spot;         // T values in [0,1]
  std::vector<double> emo;          // T*N values
  std::vector<std::string> labels;  // N >= 2, unique

  int frames() const { return static_cast<int>(spot.size()); }
  int classes() const { return static_cast<int>(labels.size()); }
  std::span<const double> emo_row(int t) const {
    return {emo.data() + static_cast<std::size_t>(t) * labels.size(), labels.size()};
  }
  std::span<double> emo_row(int t) {
    return {emo.data() + static_cast<std::size_t>(t) * labels.size(), labels.size()};
  }

  friend bool operator==(const ProbabilityTrack&, const ProbabilityTrack&) = default;
};

void validate(const ProbabilityTrack& track);

struct AnnotationEvent {
  Interval interval;
  std::string label;

  friend bool operator==(const AnnotationEvent&, const AnnotationEvent&) = default;
};

struct Annotation {
  std::string video_id;
  std::string subject_id;
  double fps = 30.0;
  std::vector<AnnotationEvent> events;

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

// `labels`: class list to check event labels against; empty skips that check.
void validate(const Annotation& annotation, std::span<const std::string> labels = {});

struct ManifestEntry {
  std::string video_id;
  std::string subject_id;
  std::string track_path;  // relative to the manifest file unless absolute
  std::string annotation_path;
  double fps = 30.0;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct Manifest {
  std::vector<std::string> labels;   // index 0 is "neutral"
  std::vector<double> class_priors;  // N values summing to 1, neutral included
  std::vector<ManifestEntry> entries;

  friend bool operator==(const Manifest&, const Manifest&) = default;
};

void validate(const Manifest& manifest);

// Prior parameters for interval decoding. `k` is the expected ME duration in
// frames (total width); frames within floor(k/2) of the apex form the inner
// zone where theta_low applies, everything else is held to theta_high.
struct DecoderConfig {
  int k = 15;                    // duration prior, total frames
  double theta_low = 0.25;       // inner-zone bar
  double theta_high = 0.5;       // outer-zone bar
  int patience = 2;              // consecutive violations that stop extension
  double min_peak_height = 0.6;  // candidate peak floor
  double nms_iou = 0.3;          // greedy NMS overlap limit

  friend bool operator==(const DecoderConfig&, const DecoderConfig&) = default;
};

void validate(const DecoderConfig& config);

// k = round(0.5 s * fps): MEs last at most about half a second.
int duration_prior_from_fps(double fps);

}  // namespace mekit
