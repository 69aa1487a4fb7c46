#include "mekit/classify.hpp"

#include "mekit/kernels.hpp"

namespace mekit {

std::vector<double> penalize(std::span<const double> dist, std::span<const double> priors,
                             const PenaltyConfig& config) {
  std::vector<double> out(dist.begin(), dist.end());
  switch (config.mode) {
    case PenaltyMode::none:
      return out;
    case PenaltyMode::inverse_prior: {
      if (priors.size() != dist.size())
        throw Error(Err::bad_config, "priors length must match distribution");
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = dist[i] / (priors[i] + config.epsilon);
      break;
    }
    case PenaltyMode::custom: {
      if (config.weights.size() != dist.size())
        throw Error(Err::bad_config, "custom mode requires weights of length N");
      for (double w : config.weights)
        if (w < 0.0) throw Error(Err::bad_config, "custom weights must be non-negative");
      kernels::mul(dist.data(), config.weights.data(), out.data(), out.size());
      break;
    }
  }
  const double total = kernels::sum(out.data(), out.size());
  if (total <= 0.0)
    throw Error(Err::all_zero_after_penalty, "no probability mass left after penalization");
  kernels::scale(1.0 / total, out.data(), out.size());
  return out;
}

LabeledInterval assign_emotion(const ProbabilityTrack& track, const Interval& interval,
                               std::span<const double> priors, const PenaltyConfig& config) {
  validate(interval);
  if (interval.offset >= track.frames())
    throw Error(Err::bad_value, "interval extends past the track");

  const std::size_t n = track.labels.size();
  std::vector<double> mean(n, 0.0);
  for (int t = interval.onset; t <= interval.offset; ++t)
    kernels::axpy(1.0, track.emo_row(t).data(), mean.data(), n);
  kernels::scale(1.0 / static_cast<double>(interval.length()), mean.data(), n);

  const std::vector<double> scores = penalize(mean, priors, config);

  // neutral (index 0) is masked out of the decision
  std::size_t best = 1;
  for (std::size_t i = 2; i < n; ++i)
    if (scores[i] > scores[best]) best = i;

  const double non_neutral_mass = kernels::sum(scores.data() + 1, n - 1);
  LabeledInterval out;
  out.interval = interval;
  out.label = track.labels[best];
  out.confidence = non_neutral_mass > 0.0 ? scores[best] / non_neutral_mass : 0.0;
  return out;
}

}  // namespace mekit
