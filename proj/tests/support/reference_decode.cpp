#include "support/reference_decode.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "mekit/metrics.hpp"

namespace mekit::testsupport {

namespace {

struct Candidate {
  int index;
  double height;
};

// brute-force plateau test per frame: f represents the plateau it sits on iff
// it equals floor((lo+hi)/2) of that plateau and the plateau is a strict
// local maximum
std::vector<Candidate> brute_force_peaks(std::span<const double> spot, double floor_height) {
  const int n = static_cast<int>(spot.size());
  std::vector<Candidate> found;
  for (int f = 0; f < n; ++f) {
    int lo = f, hi = f;
    while (lo - 1 >= 0 && spot[lo - 1] == spot[f]) --lo;
    while (hi + 1 < n && spot[hi + 1] == spot[f]) ++hi;
    if (f != (lo + hi) / 2) continue;
    if (lo - 1 >= 0 && !(spot[lo - 1] < spot[f])) continue;
    if (hi + 1 < n && !(spot[hi + 1] < spot[f])) continue;
    if (spot[f] >= floor_height) found.push_back({f, spot[f]});
  }
  std::stable_sort(found.begin(), found.end(),
                   [](const Candidate& a, const Candidate& b) { return a.height > b.height; });
  return found;
}

std::vector<char> violation_flags(std::span<const double> spot, int apex,
                                  const DecoderConfig& c) {
  std::vector<char> viol(spot.size());
  for (int f = 0; f < static_cast<int>(spot.size()); ++f) {
    const bool inner = std::abs(f - apex) <= c.k / 2;
    viol[f] = spot[f] < (inner ? c.theta_low : c.theta_high) ? 1 : 0;
  }
  return viol;
}

struct SideResult {
  int boundary;     // furthest passing frame reached (apex if none)
  int visited_end;  // furthest frame examined at all (apex if none)
};

// Left side: runs of violations within [0, apex-1], walked from high to low
// index. The nearest run of length >= patience stops the walk `patience`
// frames into itself; the boundary is the passing frame just beyond that run
// toward the apex.
SideResult left_side(const std::vector<char>& viol, int apex, int patience) {
  std::vector<std::pair<int, int>> runs;  // maximal [start, end] within [0, apex-1]
  for (int f = 0; f < apex; ++f) {
    if (!viol[f]) continue;
    if (!runs.empty() && runs.back().second == f - 1) runs.back().second = f;
    else runs.emplace_back(f, f);
  }
  for (auto it = runs.rbegin(); it != runs.rend(); ++it) {
    const auto [start, end] = *it;
    if (end - start + 1 >= patience)
      return {end + 1 <= apex - 1 ? end + 1 : apex, end - patience + 1};
  }
  // no terminating run: every frame down to 0 is visited
  if (apex == 0) return {apex, apex};
  int boundary = apex;
  for (int f = 0; f < apex; ++f)
    if (!viol[f]) {
      boundary = f;
      break;
    }
  return {boundary, 0};
}

SideResult right_side(const std::vector<char>& viol, int apex, int patience, int n) {
  std::vector<std::pair<int, int>> runs;  // maximal [start, end] within [apex+1, n-1]
  for (int f = apex + 1; f < n; ++f) {
    if (!viol[f]) continue;
    if (!runs.empty() && runs.back().second == f - 1) runs.back().second = f;
    else runs.emplace_back(f, f);
  }
  for (const auto& [start, end] : runs) {
    if (end - start + 1 >= patience)
      return {start - 1 >= apex + 1 ? start - 1 : apex, start + patience - 1};
  }
  if (apex == n - 1) return {apex, apex};
  int boundary = apex;
  for (int f = n - 1; f > apex; --f)
    if (!viol[f]) {
      boundary = f;
      break;
    }
  return {boundary, n - 1};
}

}  // namespace

std::vector<Interval> reference_decode_siss(std::span<const double> spot,
                                            const DecoderConfig& config) {
  validate(config);
  const int n = static_cast<int>(spot.size());
  std::vector<Interval> accepted;

  for (const Candidate& candidate : brute_force_peaks(spot, config.min_peak_height)) {
    bool inside = false;
    for (const auto& iv : accepted) inside = inside || iv.contains(candidate.index);
    if (inside) continue;

    int apex = candidate.index;
    int onset = apex, offset = apex;
    while (true) {
      const std::vector<char> viol = violation_flags(spot, apex, config);
      const SideResult left = left_side(viol, apex, config.patience);
      const SideResult right = right_side(viol, apex, config.patience, n);
      onset = left.boundary;
      offset = right.boundary;

      // earliest maximal visited frame strictly above the current apex
      int better = -1;
      double best = spot[apex];
      for (int f = left.visited_end; f <= right.visited_end; ++f) {
        if (f == apex) continue;
        if (spot[f] > best) {
          best = spot[f];
          better = f;
        }
      }
      if (better < 0) break;
      apex = better;
    }

    Interval result{onset, onset, offset};
    for (int f = onset; f <= offset; ++f)
      if (spot[f] > spot[result.apex]) result.apex = f;
    accepted.push_back(result);
  }

  // brute-force NMS: repeatedly take the tallest remaining interval
  std::vector<char> alive(accepted.size(), 1), kept_flag(accepted.size(), 0);
  std::vector<Interval> kept;
  while (true) {
    int best = -1;
    for (int i = 0; i < static_cast<int>(accepted.size()); ++i) {
      if (!alive[i]) continue;
      if (best < 0) {
        best = i;
        continue;
      }
      const double hi = spot[accepted[i].apex], hb = spot[accepted[best].apex];
      const auto key = [&](const Interval& iv) {
        return std::make_tuple(iv.apex, iv.onset, iv.offset);
      };
      if (hi > hb || (hi == hb && key(accepted[i]) < key(accepted[best]))) best = i;
    }
    if (best < 0) break;
    alive[best] = 0;
    bool overlaps = false;
    for (int i = 0; i < static_cast<int>(accepted.size()); ++i)
      if (kept_flag[i] && iou(accepted[i], accepted[best]) > config.nms_iou) overlaps = true;
    if (!overlaps) {
      kept_flag[best] = 1;
      kept.push_back(accepted[best]);
    }
  }

  std::sort(kept.begin(), kept.end(), [](const Interval& a, const Interval& b) {
    if (a.onset != b.onset) return a.onset < b.onset;
    if (a.apex != b.apex) return a.apex < b.apex;
    return a.offset < b.offset;
  });
  return kept;
}

}  // namespace mekit::testsupport
