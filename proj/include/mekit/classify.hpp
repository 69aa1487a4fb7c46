#pragma once

#include <span>
#include <vector>

#include "mekit/types.hpp"

namespace mekit {

enum class PenaltyMode { none, inverse_prior, custom };

// Inference-time reweighting that counteracts majority-class bias before the
// label decision.
struct PenaltyConfig {
  PenaltyMode mode = PenaltyMode::inverse_prior;
  std::vector<double> weights;  // required for custom mode, length N
  double epsilon = 1e-6;
};

// none          -> dist unchanged
// inverse_prior -> s_i = dist_i / (priors_i + epsilon), renormalized
// custom        -> s_i = dist_i * weights_i, renormalized
std::vector<double> penalize(std::span<const double> dist, std::span<const double> priors,
                             const PenaltyConfig& config);

// Mean of the emotion rows over the interval, penalized, neutral masked out
// (a spotted interval is asserted to be an ME). Label = argmax of the
// remaining classes (ties take the lowest index); confidence = the chosen
// class's penalized mass renormalized over non-neutral classes.
LabeledInterval assign_emotion(const ProbabilityTrack& track, const Interval& interval,
                               std::span<const double> priors, const PenaltyConfig& config);

}  // namespace mekit
