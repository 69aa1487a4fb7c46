#pragma once

#include <span>
#include <vector>

#include "mekit/types.hpp"

namespace mekit {

struct Peak {
  int index = 0;
  double height = 0.0;

  friend bool operator==(const Peak&, const Peak&) = default;
};

// Candidate event points. A frame qualifies when its value is at least
// min_peak_height and it represents a maximal plateau strictly above both
// neighbors (the ends of the sequence count as -inf). The representative of a
// plateau [i, j] is floor((i + j) / 2). Result is sorted by height desc,
// index asc.
std::vector<Peak> find_peaks(std::span<const double> spot, double min_peak_height);

// Baseline: a window of k frames centered on each surviving peak, onset and
// offset clamped to the sequence independently.
std::vector<Interval> decode_fixed(std::span<const double> spot, const DecoderConfig& config);

// Scalable interval selection. For each candidate peak (height desc, index
// asc; peaks inside an already accepted interval are skipped):
//   1. frames within floor(k/2) of the apex form the inner zone where
//      theta_low applies; outside it theta_high applies;
//   2. extension walks left and right independently, one frame at a time,
//      stopping after `patience` consecutive sub-threshold frames or the
//      sequence edge; each boundary is the last passing frame (the apex
//      itself when none passed);
//   3. if any frame visited during the walk is strictly higher than the
//      current apex, the apex moves to the earliest such maximum and the
//      extension restarts around it;
//   4. the emitted apex is the earliest argmax inside the final boundaries.
// Residual overlaps are removed by greedy NMS (taller apex wins, overlap
// above nms_iou drops); the result is sorted by onset.
std::vector<Interval> decode_siss(std::span<const double> spot, const DecoderConfig& config);

// Shared NMS step, exposed for tests: keeps intervals in order of apex height
// desc (ties: apex asc, onset asc) and drops any interval whose IoU with a
// kept one exceeds nms_iou.
std::vector<Interval> greedy_nms(std::span<const double> spot, std::vector<Interval> intervals,
                                 double nms_iou);

}  // namespace mekit
