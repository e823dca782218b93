#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <vector>

#include "rodfluid/model.hpp"

namespace rodfluid {

/// Rod height from `time` onward.
struct RodPoint {
  double time = 0;
  int rod_y = 0;
};

struct Snapshot {
  double time = 0;
  FullState state;
};

/// Rod path as the initial point followed by one entry per height change.
/// Consecutive entries differ by exactly one in height.
struct Trajectory {
  std::vector<RodPoint> points;
  std::vector<Snapshot> snapshots;
  std::optional<FullState> initial_state;
  double end_time = 0;

  int initial_y() const { return points.front().rod_y; }
  int final_y() const { return points.back().rod_y; }

  /// Height at time t (right-continuous path).
  int height_at(double t) const {
    auto it = std::upper_bound(points.begin(), points.end(), t,
                               [](double v, const RodPoint& pt) { return v < pt.time; });
    return it == points.begin() ? points.front().rod_y : std::prev(it)->rod_y;
  }

  /// Total time spent at each height over [0, end_time].
  std::map<int, double> occupation_time() const {
    std::map<int, double> occ;
    for (std::size_t k = 0; k < points.size(); ++k) {
      const double until = k + 1 < points.size() ? points[k + 1].time : end_time;
      occ[points[k].rod_y] += until - points[k].time;
    }
    return occ;
  }
};

/// Rod trial outcomes per starting height.
struct TrialCounts {
  long up_attempts = 0;
  long up_successes = 0;
  long down_attempts = 0;
  long down_successes = 0;
};

using TrialStats = std::map<int, TrialCounts>;

}  // namespace rodfluid
