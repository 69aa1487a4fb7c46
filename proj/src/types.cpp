#include "mekit/types.hpp"

#include <cmath>
#include <unordered_set>

namespace mekit {

namespace {

bool in_unit(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

void validate_labels(const std::vector<std::string>& labels) {
  if (labels.size() < 2)
    throw Error(Err::bad_value, "need at least two classes (neutral plus one emotion)");
  if (labels.front() != kNeutralLabel)
    throw Error(Err::bad_value, "class index 0 must be \"neutral\", got \"" + labels.front() + "\"");
  std::unordered_set<std::string> seen;
  for (const auto& label : labels) {
    if (label.empty()) throw Error(Err::bad_value, "empty class name");
    if (!seen.insert(label).second)
      throw Error(Err::bad_value, "duplicate class name \"" + label + "\"");
  }
}

}  // namespace

void validate(const Interval& interval) {
  if (interval.onset < 0 || interval.onset > interval.apex || interval.apex > interval.offset)
    throw Error(Err::bad_value,
                "interval must satisfy 0 <= onset <= apex <= offset, got (" +
                    std::to_string(interval.onset) + "," + std::to_string(interval.apex) + "," +
                    std::to_string(interval.offset) + ")");
}

void validate(const ProbabilityTrack& track) {
  if (track.spot.empty()) throw Error(Err::bad_value, "track must contain at least one frame");
  if (!(std::isfinite(track.fps) && track.fps > 0.0))
    throw Error(Err::bad_value, "fps must be positive");
  validate_labels(track.labels);
  const std::size_t n = track.labels.size();
  if (track.emo.size() != track.spot.size() * n)
    throw Error(Err::bad_value, "emo row count must equal spot length");
  for (double v : track.spot)
    if (!in_unit(v)) throw Error(Err::probability_out_of_range, "spot value outside [0,1]");
  for (int t = 0; t < track.frames(); ++t) {
    double sum = 0.0;
    for (double v : track.emo_row(t)) {
      if (!in_unit(v)) throw Error(Err::probability_out_of_range, "emotion value outside [0,1]");
      sum += v;
    }
    if (std::fabs(sum - 1.0) > kRowSumTolerance)
      throw Error(Err::row_sum_out_of_tolerance,
                  "emotion row " + std::to_string(t) + " sums to " + std::to_string(sum));
  }
}

void validate(const Annotation& annotation, std::span<const std::string> labels) {
  if (!(std::isfinite(annotation.fps) && annotation.fps > 0.0))
    throw Error(Err::bad_value, "fps must be positive");
  for (std::size_t i = 0; i < annotation.events.size(); ++i) {
    const auto& event = annotation.events[i];
    validate(event.interval);
    if (event.label == kNeutralLabel)
      throw Error(Err::bad_value, "ground-truth event labeled neutral");
    if (!labels.empty()) {
      bool known = false;
      for (const auto& label : labels) known = known || label == event.label;
      if (!known) throw Error(Err::unknown_label, "event label \"" + event.label + "\"");
    }
    for (std::size_t j = i + 1; j < annotation.events.size(); ++j)
      if (annotation.events[j] == event)
        throw Error(Err::bad_value, "duplicate ground-truth event");
  }
}

void validate(const Manifest& manifest) {
  validate_labels(manifest.labels);
  if (manifest.class_priors.size() != manifest.labels.size())
    throw Error(Err::bad_value, "class_priors length must match labels");
  double sum = 0.0;
  for (double p : manifest.class_priors) {
    if (!(std::isfinite(p) && p >= 0.0))
      throw Error(Err::bad_value, "class priors must be non-negative");
    sum += p;
  }
  if (std::fabs(sum - 1.0) > kRowSumTolerance)
    throw Error(Err::bad_value, "class priors sum to " + std::to_string(sum));
  std::unordered_set<std::string> ids;
  for (const auto& entry : manifest.entries) {
    if (entry.video_id.empty()) throw Error(Err::bad_value, "empty video_id in manifest");
    if (!ids.insert(entry.video_id).second)
      throw Error(Err::duplicate_video_id, "video_id \"" + entry.video_id + "\"");
    if (!(std::isfinite(entry.fps) && entry.fps > 0.0))
      throw Error(Err::bad_value, "fps must be positive for video " + entry.video_id);
  }
}

void validate(const DecoderConfig& config) {
  if (config.k < 1) throw Error(Err::bad_config, "duration prior k must be >= 1");
  if (config.patience < 1) throw Error(Err::bad_config, "patience must be >= 1");
  if (!in_unit(config.theta_low) || !in_unit(config.theta_high))
    throw Error(Err::bad_config, "thresholds must lie in [0,1]");
  if (config.theta_low > config.theta_high)
    throw Error(Err::bad_config, "theta_low must not exceed theta_high");
  if (!in_unit(config.min_peak_height))
    throw Error(Err::bad_config, "min_peak_height must lie in [0,1]");
  if (!std::isfinite(config.nms_iou) || config.nms_iou < 0.0 || config.nms_iou >= 1.0)
    throw Error(Err::bad_config, "nms_iou must lie in [0,1)");
}

int duration_prior_from_fps(double fps) {
  int k = static_cast<int>(std::lround(0.5 * fps));
  return k < 1 ? 1 : k;
}

}  // namespace mekit
