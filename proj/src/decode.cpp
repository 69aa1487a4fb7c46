#include "mekit/decode.hpp"

#include <algorithm>
#include <cstdlib>

#include "mekit/metrics.hpp"

namespace mekit {

std::vector<Peak> find_peaks(std::span<const double> spot, double min_peak_height) {
  std::vector<Peak> peaks;
  const int n = static_cast<int>(spot.size());
  int i = 0;
  while (i < n) {
    int j = i;
    while (j + 1 < n && spot[j + 1] == spot[i]) ++j;  // plateau [i, j]
    const bool above_left = i == 0 || spot[i - 1] < spot[i];
    const bool above_right = j == n - 1 || spot[j + 1] < spot[i];
    if (above_left && above_right && spot[i] >= min_peak_height)
      peaks.push_back({(i + j) / 2, spot[i]});
    i = j + 1;
  }
  std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) {
    if (a.height != b.height) return a.height > b.height;
    return a.index < b.index;
  });
  return peaks;
}

namespace {

struct Walk {
  int onset;     // last passing frame to the left (apex when none)
  int offset;    // last passing frame to the right
  int visit_lo;  // lowest frame examined, apex when the walk never left it
  int visit_hi;  // highest frame examined
};

inline bool violates(std::span<const double> spot, int f, int apex, const DecoderConfig& c) {
  const bool inner = std::abs(f - apex) <= c.k / 2;
  return spot[f] < (inner ? c.theta_low : c.theta_high);
}

Walk extend(std::span<const double> spot, int apex, const DecoderConfig& c) {
  const int n = static_cast<int>(spot.size());
  Walk w{apex, apex, apex, apex};
  int run = 0;
  for (int f = apex - 1; f >= 0; --f) {
    w.visit_lo = f;
    if (violates(spot, f, apex, c)) {
      if (++run == c.patience) break;
    } else {
      run = 0;
      w.onset = f;
    }
  }
  run = 0;
  for (int f = apex + 1; f < n; ++f) {
    w.visit_hi = f;
    if (violates(spot, f, apex, c)) {
      if (++run == c.patience) break;
    } else {
      run = 0;
      w.offset = f;
    }
  }
  return w;
}

// earliest visited frame strictly higher than the current apex (and maximal
// among those), or -1; the apex frame itself is not a candidate
int reselect_apex(std::span<const double> spot, const Walk& w, int apex) {
  int best = -1;
  double best_height = spot[apex];
  for (int f = w.visit_lo; f <= w.visit_hi; ++f) {
    if (f == apex) continue;
    if (spot[f] > best_height) {
      best_height = spot[f];
      best = f;
    }
  }
  return best;
}

bool covered(const std::vector<Interval>& accepted, int frame) {
  for (const auto& interval : accepted)
    if (interval.contains(frame)) return true;
  return false;
}

void sort_by_onset(std::vector<Interval>& intervals) {
  std::sort(intervals.begin(), intervals.end(), [](const Interval& a, const Interval& b) {
    if (a.onset != b.onset) return a.onset < b.onset;
    if (a.apex != b.apex) return a.apex < b.apex;
    return a.offset < b.offset;
  });
}

}  // namespace

std::vector<Interval> greedy_nms(std::span<const double> spot, std::vector<Interval> intervals,
                                 double nms_iou) {
  std::vector<int> order(intervals.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double ha = spot[intervals[a].apex], hb = spot[intervals[b].apex];
    if (ha != hb) return ha > hb;
    if (intervals[a].apex != intervals[b].apex) return intervals[a].apex < intervals[b].apex;
    if (intervals[a].onset != intervals[b].onset) return intervals[a].onset < intervals[b].onset;
    return intervals[a].offset < intervals[b].offset;
  });
  std::vector<Interval> kept;
  for (int idx : order) {
    bool drop = false;
    for (const auto& k : kept)
      if (iou(intervals[idx], k) > nms_iou) {
        drop = true;
        break;
      }
    if (!drop) kept.push_back(intervals[idx]);
  }
  return kept;
}

std::vector<Interval> decode_fixed(std::span<const double> spot, const DecoderConfig& config) {
  validate(config);
  const int n = static_cast<int>(spot.size());
  std::vector<Interval> accepted;
  for (const Peak& peak : find_peaks(spot, config.min_peak_height)) {
    if (covered(accepted, peak.index)) continue;
    const int onset = peak.index - (config.k - 1) / 2;
    const int offset = onset + config.k - 1;
    accepted.push_back(
        {std::clamp(onset, 0, n - 1), peak.index, std::clamp(offset, 0, n - 1)});
  }
  accepted = greedy_nms(spot, std::move(accepted), config.nms_iou);
  sort_by_onset(accepted);
  return accepted;
}

std::vector<Interval> decode_siss(std::span<const double> spot, const DecoderConfig& config) {
  validate(config);
  std::vector<Interval> accepted;
  for (const Peak& peak : find_peaks(spot, config.min_peak_height)) {
    if (covered(accepted, peak.index)) continue;

    int apex = peak.index;
    Walk walk = extend(spot, apex, config);
    // terminates: the apex height strictly increases on every restart
    for (int better = reselect_apex(spot, walk, apex); better >= 0;
         better = reselect_apex(spot, walk, apex)) {
      apex = better;
      walk = extend(spot, apex, config);
    }

    int emitted_apex = walk.onset;
    for (int f = walk.onset + 1; f <= walk.offset; ++f)
      if (spot[f] > spot[emitted_apex]) emitted_apex = f;
    accepted.push_back({walk.onset, emitted_apex, walk.offset});
  }
  accepted = greedy_nms(spot, std::move(accepted), config.nms_iou);
  sort_by_onset(accepted);
  return accepted;
}

}  // namespace mekit
