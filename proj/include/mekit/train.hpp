#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mekit/types.hpp"

namespace mekit {

// Minimal shared-trunk two-head regressor. Per frame, a window of `window`
// consecutive feature vectors (zero-padded at the edges) is flattened, pushed
// through one tanh layer, and read out by a logistic spotting head and a
// softmax recognition head. The trunk is the only shared part; the heads own
// nothing but their final linear maps.
struct TinyModel {
  int window = 9;    // odd context length, frames
  int feat_dim = 0;  // F, per-frame input features
  int hidden = 32;   // H
  int classes = 0;   // N, neutral included

  std::vector<double> trunk_w;  // H x (window*feat_dim), row-major
  std::vector<double> trunk_b;  // H
  std::vector<double> spot_w;   // H
  double spot_b = 0.0;
  std::vector<double> rec_w;  // N x H, row-major
  std::vector<double> rec_b;  // N

  std::size_t parameter_count() const;
};

// Seeded init: weights uniform in +-1/sqrt(fan_in) drawn from SplitMix64(seed)
// in declaration order (trunk_w row-major, spot_w, rec_w row-major), biases 0.
TinyModel init_model(int window, int feat_dim, int hidden, int classes, std::uint64_t seed);

struct TrainConfig {
  double lr = 3e-4;
  int epochs = 50;
  int segment_len = 50;       // frames per training segment
  double neg_pos_ratio = 1.0; // non-ME segments per ME segment
  std::vector<double> class_weights;  // empty = inverse manifest priors, mean 1
  std::uint64_t seed = 7;
  bool soft_spot_targets = false;  // triangular ramp targets instead of hard 0/1
};

void validate(const TrainConfig& config);

struct ForwardResult {
  std::vector<double> spot;  // T logistic outputs
  std::vector<double> emo;   // T x N softmax rows
};

// `features` is row-major T x feat_dim.
ForwardResult forward(const TinyModel& model, std::span<const double> features, int frames);

// Per-segment inference with the given stride, outputs concatenated in frame
// order; context windows never cross segment boundaries, matching training.
ForwardResult forward_video(const TinyModel& model, std::span<const double> features,
                            int frames, int segment_len);

struct Segment {
  std::vector<double> features;     // segment_len x feat_dim
  std::vector<double> spot_target;  // segment_len, in [0,1]
  std::vector<int> class_target;    // segment_len, index into labels
};

struct LossBreakdown {
  double total = 0.0;
  double mse = 0.0;  // mean over frames of (spot - target)^2
  double ce = 0.0;   // mean over frames of class_weights[target] * -log p[target]
};

LossBreakdown loss(const TinyModel& model, std::span<const Segment> batch,
                   std::span<const double> class_weights);

// Analytic gradients of `loss` w.r.t. every parameter, laid out like TinyModel.
struct Gradients {
  std::vector<double> trunk_w;
  std::vector<double> trunk_b;
  std::vector<double> spot_w;
  double spot_b = 0.0;
  std::vector<double> rec_w;
  std::vector<double> rec_b;
};

Gradients gradients(const TinyModel& model, std::span<const Segment> batch,
                    std::span<const double> class_weights);

// Demo inputs: the track's spot and emotion columns pushed through the fixed
// affine x = 4 * (v - 0.5), clipped to [-6, 6] (never binding on [0,1], so the
// transform stays invertible). feat_dim = 1 + N.
std::vector<double> demo_features(const ProbabilityTrack& track);

// One segment per ground-truth event, centered on its apex and clamped to the
// track; round(ratio * positives) non-overlapping negative segments sampled
// without replacement from the positions that never touch an event. The
// sampling stream is SplitMix64(cfg.seed ^ fnv1a(video_id)).
struct SegmentSample {
  std::vector<Segment> segments;  // positives in event order, then negatives
  bool negatives_exhausted = false;  // fewer candidates than requested; all taken
};

SegmentSample sample_segments(const ProbabilityTrack& track, const Annotation& annotation,
                              const TrainConfig& config);

struct TrainLogEntry {
  int epoch = 0;
  double mse = 0.0;
  double ce = 0.0;
  double total = 0.0;
};

struct TrainOutcome {
  TinyModel model;
  std::vector<TrainLogEntry> log;   // loss over the training pool after each epoch
  std::vector<std::string> labels;  // class list the model was trained against
};

// Trains on all but the last `holdout` manifest entries: plain gradient
// descent stepping once per segment, segment order reshuffled each epoch from
// the seeded stream. No momentum, no adaptive step.
TrainOutcome train_demo(const Manifest& manifest, const std::filesystem::path& manifest_dir,
                        const TrainConfig& config, int holdout = 5);

// Checkpoint round-trip (JSON with all parameter arrays).
std::string model_to_json(const TinyModel& model, std::span<const std::string> labels);
TinyModel model_from_json(const std::string& text, std::vector<std::string>* labels = nullptr);

std::string training_log_to_csv(std::span<const TrainLogEntry> log);

}  // namespace mekit
