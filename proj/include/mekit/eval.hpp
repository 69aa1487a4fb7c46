#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mekit/classify.hpp"
#include "mekit/metrics.hpp"
#include "mekit/train.hpp"
#include "mekit/types.hpp"

namespace mekit {

enum class DecoderKind { siss, fixed };

// Effective run settings shared by the CLI subcommands. Serializes to/from a
// JSON config file; unknown keys are rejected.
struct RunConfig {
  DecoderKind decoder = DecoderKind::siss;
  std::optional<int> k;  // duration prior; empty derives round(0.5 s * fps) per video
  double theta_low = 0.25;
  double theta_high = 0.5;
  int patience = 2;
  double min_peak_height = 0.6;
  double nms_iou = 0.3;
  PenaltyConfig penalty;
  Averaging averaging = Averaging::macro;
  int threads = 0;  // 0 = hardware concurrency; ME_KIT_THREADS caps either way
};

RunConfig run_config_from_json(const std::string& text);
std::string run_config_to_json(const RunConfig& config);

DecoderConfig decoder_config_for(const RunConfig& config, double fps);

// Decode + label one track.
std::vector<LabeledInterval> decode_track(const ProbabilityTrack& track,
                                          std::span<const double> priors,
                                          const RunConfig& config);

// Per-frame plot data: frame, spot, decoded flag, penalized class scores.
std::string curve_csv(const ProbabilityTrack& track, std::span<const LabeledInterval> preds,
                      std::span<const double> priors, const RunConfig& config);

// Runs decode + classify over every manifest entry (in parallel across
// videos, folded in manifest order) and aggregates counts before computing
// the global scores. When `predictions` is set, intervals are read from
// <predictions>/<video_id>.json instead of being decoded.
struct EvalOutcome {
  EvalReport report;
  std::vector<std::vector<LabeledInterval>> intervals;  // per entry
};

EvalOutcome evaluate_manifest(const Manifest& manifest,
                              const std::filesystem::path& manifest_dir,
                              const RunConfig& config,
                              const std::optional<std::filesystem::path>& predictions = {});

// Scores a trained model on the last `holdout` manifest entries: model
// outputs become a predicted track, which is decoded and labeled like any
// other, then matched against the ground truth.
EvalReport evaluate_model_heldout(const TinyModel& model, const Manifest& manifest,
                                  const std::filesystem::path& manifest_dir, int holdout,
                                  int segment_len, const RunConfig& config);

// min(requested or hardware, ME_KIT_THREADS when set), at least 1
int resolve_threads(int requested);

}  // namespace mekit
