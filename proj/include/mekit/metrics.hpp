#pragma once

#include <span>
#include <string>
#include <vector>

#include "mekit/types.hpp"

namespace mekit {

// Temporal IoU over inclusive frame sets.
double iou(const Interval& a, const Interval& b);

struct MatchPair {
  int pred = 0;
  int gt = 0;
  double iou = 0.0;

  friend bool operator==(const MatchPair&, const MatchPair&) = default;
};

// One-to-one matching for a single video. Pairs are accepted greedily in
// (iou desc, pred asc, gt asc) order while iou is strictly above `threshold`.
struct MatchReport {
  std::vector<MatchPair> pairs;
  std::vector<int> fp;  // unmatched prediction indices, ascending
  std::vector<int> fn;  // unmatched ground-truth indices, ascending
  double threshold = 0.5;
};

MatchReport match(std::span<const Interval> preds, std::span<const Interval> gts,
                  double threshold);

struct SpotScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Each score is 0 when its denominator is 0.
SpotScores spotting_scores(long long tp, long long fp, long long fn);

// (iou_tp, iou_all) from the pairs of match(..., threshold = 0):
// iou_all averages every pair, iou_tp only those above 0.5; empty sets give 0.
struct IouSummary {
  double iou_tp = 0.0;
  double iou_all = 0.0;
};

IouSummary iou_summaries(std::span<const MatchPair> pairs_at_zero);

enum class Averaging { macro, micro };

struct RecognitionScores {
  double f1_rec = 0.0;   // uf1 under macro averaging, micro_f1 under micro
  double uf1 = 0.0;      // mean per-class F1
  double uar = 0.0;      // mean per-class recall
  double micro_f1 = 0.0; // trace / total, i.e. accuracy over matched intervals
};

// `confusion` is square with rows = ground truth, columns = prediction.
RecognitionScores recognition_scores(const std::vector<std::vector<long long>>& confusion,
                                     Averaging averaging = Averaging::macro);

// Spot-Then-Recognize Score.
double strs(double f1_spot, double f1_rec);

struct MetricsReport {
  long long tp = 0;
  long long fp = 0;
  long long fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1_spot = 0.0;
  double iou_tp = 0.0;
  double iou_all = 0.0;
  std::vector<std::vector<long long>> confusion;  // (N-1)x(N-1) over non-neutral classes
  double f1_rec = 0.0;
  double uf1 = 0.0;
  double uar = 0.0;
  double micro_f1 = 0.0;
  double strs = 0.0;
};

// Accumulates per-video matching results; counts and pair lists combine as a
// commutative monoid, so merge order never changes the final report.
class MetricsTally {
 public:
  // `labels` is the full class list including neutral at index 0.
  explicit MetricsTally(std::vector<std::string> labels);

  // Scores one video and folds it into the running totals. Returns the
  // per-video report (confusion left empty there).
  MetricsReport add_video(std::span<const LabeledInterval> preds, const Annotation& gt,
                          Averaging averaging = Averaging::macro);

  MetricsReport finalize(Averaging averaging = Averaging::macro) const;

 private:
  int class_index(const std::string& label) const;

  std::vector<std::string> labels_;
  long long tp_ = 0, fp_ = 0, fn_ = 0;
  std::vector<double> ious_at_zero_;
  std::vector<std::vector<long long>> confusion_;
};

struct VideoReport {
  std::string video_id;
  MetricsReport scores;
};

struct EvalReport {
  MetricsReport overall;
  std::vector<VideoReport> videos;
  std::vector<std::string> labels;  // full class list, neutral first
  Averaging averaging = Averaging::macro;
};

}  // namespace mekit
