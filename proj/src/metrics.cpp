#include "mekit/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "mekit/kernels.hpp"

namespace mekit {

double iou(const Interval& a, const Interval& b) {
  const int inter =
      std::min(a.offset, b.offset) - std::max(a.onset, b.onset) + 1;
  if (inter <= 0) return 0.0;
  const int uni = a.length() + b.length() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

MatchReport match(std::span<const Interval> preds, std::span<const Interval> gts,
                  double threshold) {
  struct Candidate {
    double iou;
    int pred;
    int gt;
  };
  std::vector<Candidate> candidates;
  for (int p = 0; p < static_cast<int>(preds.size()); ++p)
    for (int g = 0; g < static_cast<int>(gts.size()); ++g) {
      const double v = iou(preds[p], gts[g]);
      if (v > threshold) candidates.push_back({v, p, g});
    }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.iou != b.iou) return a.iou > b.iou;
    if (a.pred != b.pred) return a.pred < b.pred;
    return a.gt < b.gt;
  });

  MatchReport report;
  report.threshold = threshold;
  std::vector<char> pred_used(preds.size(), 0), gt_used(gts.size(), 0);
  for (const auto& c : candidates) {
    if (pred_used[c.pred] || gt_used[c.gt]) continue;
    pred_used[c.pred] = gt_used[c.gt] = 1;
    report.pairs.push_back({c.pred, c.gt, c.iou});
  }
  for (int p = 0; p < static_cast<int>(preds.size()); ++p)
    if (!pred_used[p]) report.fp.push_back(p);
  for (int g = 0; g < static_cast<int>(gts.size()); ++g)
    if (!gt_used[g]) report.fn.push_back(g);
  return report;
}

SpotScores spotting_scores(long long tp, long long fp, long long fn) {
  SpotScores s;
  if (tp + fp > 0) s.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn > 0) s.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  if (s.precision + s.recall > 0.0)
    s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

IouSummary iou_summaries(std::span<const MatchPair> pairs_at_zero) {
  IouSummary out;
  std::vector<double> all, tp;
  for (const auto& pair : pairs_at_zero) {
    all.push_back(pair.iou);
    if (pair.iou > 0.5) tp.push_back(pair.iou);
  }
  if (!all.empty()) out.iou_all = kernels::sum(all.data(), all.size()) / double(all.size());
  if (!tp.empty()) out.iou_tp = kernels::sum(tp.data(), tp.size()) / double(tp.size());
  return out;
}

RecognitionScores recognition_scores(const std::vector<std::vector<long long>>& confusion,
                                     Averaging averaging) {
  const std::size_t n = confusion.size();
  for (const auto& row : confusion)
    if (row.size() != n) throw Error(Err::non_square_matrix, "confusion matrix must be square");

  RecognitionScores out;
  if (n == 0) return out;

  long long total = 0, trace = 0;
  double f1_sum = 0.0, recall_sum = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    long long tp = confusion[c][c];
    long long row = 0, col = 0;
    for (std::size_t j = 0; j < n; ++j) {
      row += confusion[c][j];
      col += confusion[j][c];
    }
    total += row;
    trace += tp;
    const long long fn = row - tp;
    const long long fp = col - tp;
    const SpotScores s = spotting_scores(tp, fp, fn);  // same zero conventions
    f1_sum += s.f1;
    recall_sum += s.recall;
  }
  out.uf1 = f1_sum / static_cast<double>(n);
  out.uar = recall_sum / static_cast<double>(n);
  if (total > 0) out.micro_f1 = static_cast<double>(trace) / static_cast<double>(total);
  out.f1_rec = averaging == Averaging::macro ? out.uf1 : out.micro_f1;
  return out;
}

double strs(double f1_spot, double f1_rec) { return f1_spot * f1_rec; }

MetricsTally::MetricsTally(std::vector<std::string> labels) : labels_(std::move(labels)) {
  const std::size_t classes = labels_.empty() ? 0 : labels_.size() - 1;
  confusion_.assign(classes, std::vector<long long>(classes, 0));
}

int MetricsTally::class_index(const std::string& label) const {
  for (std::size_t i = 1; i < labels_.size(); ++i)
    if (labels_[i] == label) return static_cast<int>(i) - 1;  // non-neutral index
  throw Error(Err::unknown_label, "label \"" + label + "\"");
}

namespace {

MetricsReport report_from(long long tp, long long fp, long long fn,
                          std::span<const double> ious_at_zero,
                          const std::vector<std::vector<long long>>& confusion,
                          Averaging averaging) {
  MetricsReport r;
  r.tp = tp;
  r.fp = fp;
  r.fn = fn;
  const SpotScores spot = spotting_scores(tp, fp, fn);
  r.precision = spot.precision;
  r.recall = spot.recall;
  r.f1_spot = spot.f1;

  std::vector<MatchPair> pairs;
  pairs.reserve(ious_at_zero.size());
  for (double v : ious_at_zero) pairs.push_back({0, 0, v});
  const IouSummary summary = iou_summaries(pairs);
  r.iou_tp = summary.iou_tp;
  r.iou_all = summary.iou_all;

  const RecognitionScores rec = recognition_scores(confusion, averaging);
  r.f1_rec = rec.f1_rec;
  r.uf1 = rec.uf1;
  r.uar = rec.uar;
  r.micro_f1 = rec.micro_f1;
  r.strs = strs(r.f1_spot, r.f1_rec);
  return r;
}

}  // namespace

MetricsReport MetricsTally::add_video(std::span<const LabeledInterval> preds,
                                      const Annotation& gt, Averaging averaging) {
  std::vector<Interval> pred_intervals, gt_intervals;
  pred_intervals.reserve(preds.size());
  for (const auto& p : preds) pred_intervals.push_back(p.interval);
  gt_intervals.reserve(gt.events.size());
  for (const auto& e : gt.events) gt_intervals.push_back(e.interval);

  const MatchReport tp_match = match(pred_intervals, gt_intervals, 0.5);
  const MatchReport any_match = match(pred_intervals, gt_intervals, 0.0);

  const long long tp = static_cast<long long>(tp_match.pairs.size());
  const long long fp = static_cast<long long>(tp_match.fp.size());
  const long long fn = static_cast<long long>(tp_match.fn.size());

  std::vector<double> video_ious;
  for (const auto& pair : any_match.pairs) video_ious.push_back(pair.iou);

  const std::size_t classes = confusion_.size();
  std::vector<std::vector<long long>> video_confusion(classes,
                                                      std::vector<long long>(classes, 0));
  for (const auto& pair : tp_match.pairs) {
    const int gt_class = class_index(gt.events[pair.gt].label);
    const int pred_class = class_index(preds[pair.pred].label);
    ++video_confusion[gt_class][pred_class];
  }

  tp_ += tp;
  fp_ += fp;
  fn_ += fn;
  ious_at_zero_.insert(ious_at_zero_.end(), video_ious.begin(), video_ious.end());
  for (std::size_t i = 0; i < classes; ++i)
    for (std::size_t j = 0; j < classes; ++j) confusion_[i][j] += video_confusion[i][j];

  return report_from(tp, fp, fn, video_ious, video_confusion, averaging);
}

MetricsReport MetricsTally::finalize(Averaging averaging) const {
  MetricsReport r = report_from(tp_, fp_, fn_, ious_at_zero_, confusion_, averaging);
  r.confusion = confusion_;
  return r;
}

}  // namespace mekit
