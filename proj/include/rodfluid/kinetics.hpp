#pragma once

// Exact continuous-time simulation of the coupled monomer/rod dynamics.
//
// Exact mode runs the direct (Gillespie) method over a sum tree of every
// active transition: swaps across discordant horizontal edges (rate
// gamma1/2), feasible vertical jumps (gamma2*p up, gamma2*q down) and the two
// rod trial clocks (a, b), which always run and may fail. Swapping two equal
// occupancies is the identity, so concordant edges carry no rate.
//
// Stirred mode is the gamma1 = infinity surrogate: every horizontal row is
// uniformly shuffled (given its particle count) at the instant a clock that
// reads it rings. Vertical and rod clocks are run by thinning at their
// constant graphical-construction rates.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "rodfluid/model.hpp"
#include "rodfluid/random.hpp"
#include "rodfluid/rate_index.hpp"
#include "rodfluid/trajectory.hpp"

namespace rodfluid {

enum class EventKind { HSwap, VUp, VDown, RodUpTrial, RodDownTrial };

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::HSwap: return "hswap";
    case EventKind::VUp: return "vup";
    case EventKind::VDown: return "vdown";
    case EventKind::RodUpTrial: return "rod_up";
    case EventKind::RodDownTrial: return "rod_down";
  }
  return "?";
}

/// One clock ring. `site` is the left end of a swapped edge or the source of
/// a vertical jump; for rod trials it is the rod's left end before the trial.
struct Event {
  EventKind kind = EventKind::HSwap;
  Site site{};
  double time = 0;
  bool succeeded = true;
};

enum class Mode { exact, stirred };

struct KineticsOptions {
  Mode mode = Mode::exact;
  bool vertical = true;  ///< false freezes vertical monomer motion
};

/// Uniformly rearrange the particles of row y over its non-rod sites.
inline void stir_row(FullState& state, int y, Rng& rng) {
  const auto& g = state.geometry();
  std::vector<int> free_cols;
  free_cols.reserve(static_cast<std::size_t>(g.width));
  for (int x = 0; x < g.width; ++x)
    if (!state.in_rod(x, y)) free_cols.push_back(x);
  const int k = state.row_count(y);
  if (k > static_cast<int>(free_cols.size()))
    throw std::logic_error("row particle count exceeds available sites");
  if (k == 0 || k == static_cast<int>(free_cols.size())) return;
  for (int x : free_cols) state.set(x, y, false);
  // Partial Fisher-Yates: the first k entries become a uniform k-subset.
  for (int i = 0; i < k; ++i) {
    const auto j = static_cast<std::size_t>(i) + rng.below(free_cols.size() - static_cast<std::size_t>(i));
    std::swap(free_cols[static_cast<std::size_t>(i)], free_cols[j]);
    state.set(free_cols[static_cast<std::size_t>(i)], y, true);
  }
}

/// Every row replaced by a uniform arrangement with the same particle count
/// (the ergodic law of stirring within a row).
inline FullState stirring_equilibrate(FullState state, Rng& rng) {
  const auto& g = state.geometry();
  for (int y = g.vmin; y <= g.vmax; ++y) stir_row(state, y, rng);
  return state;
}

/// Slot layout shared by the lattice rate indices: three slots per site.
struct SlotLayout {
  enum Kind : std::size_t { kEdge = 0, kUp = 1, kDown = 2 };

  static std::size_t slot(const LatticeGeometry& g, int x, int y, Kind k) { return 3 * g.index(x, y) + k; }

  /// Calls f(slot) for every slot whose rate can depend on site (x, y):
  /// both horizontal edges touching it, its own vertical jumps, the up-jump
  /// from below and the down-jump from above.
  template <class F>
  static void for_dependents(const LatticeGeometry& g, int x, int y, F&& f) {
    f(slot(g, g.left(x), y, kEdge));
    f(slot(g, x, y, kEdge));
    f(slot(g, x, y, kUp));
    f(slot(g, x, y, kDown));
    if (y > g.vmin) f(slot(g, x, y - 1, kUp));
    if (y < g.vmax) f(slot(g, x, y + 1, kDown));
  }
};

class Simulator {
 public:
  Simulator(FullState state, Params params, KineticsOptions opts = {}, double clock = 0)
      : state_(std::move(state)), params_(params), opts_(opts), clock_(clock) {
    params_.validate();
    state_.check();
    const auto& g = state_.geometry();
    if (opts_.mode == Mode::exact) {
      index_.resize(3 * g.size());
      index_.assign([this](std::size_t s) { return slot_rate(s); });
    }
  }

  const FullState& state() const { return state_; }
  const Params& params() const { return params_; }
  double clock() const { return clock_; }
  const TrialStats& trial_stats() const { return trials_; }
  long events() const { return events_; }

  /// Sum of all clock rates driving the next event.
  double total_rate() const {
    if (opts_.mode == Mode::exact) return index_.total() + params_.a + params_.b;
    const auto& g = state_.geometry();
    const double v = opts_.vertical ? params_.gamma2 * (params_.p + params_.q) * static_cast<double>(g.size()) : 0.0;
    return v + params_.a + params_.b;
  }

  /// Draw the next event; if it would fall after `horizon`, stop the clock at
  /// `horizon` and return false (exact by memorylessness).
  bool step_until(double horizon, Rng& rng, Event* out = nullptr) {
    const double total = total_rate();
    const double t = clock_ + rng.exponential(total);
    if (t > horizon) {
      clock_ = horizon;
      return false;
    }
    clock_ = t;
    Event ev = opts_.mode == Mode::exact ? fire_exact(rng.uniform() * total, rng) : fire_stirred(rng);
    ev.time = t;
    ++events_;
    if (out) *out = ev;
    return true;
  }

  Event step(Rng& rng) {
    Event ev;
    step_until(std::numeric_limits<double>::infinity(), rng, &ev);
    return ev;
  }

  /// Run until `t`, appending rod height changes to `traj` when given.
  void advance_to(double t, Rng& rng, Trajectory* traj = nullptr) {
    Event ev;
    while (step_until(t, rng, &ev)) {
      if (traj && ev.succeeded && (ev.kind == EventKind::RodUpTrial || ev.kind == EventKind::RodDownTrial))
        traj->points.push_back({ev.time, state_.rod_y()});
    }
  }

  /// Rebuild-and-compare check of the incremental rate bookkeeping.
  bool index_consistent(double tol = 1e-9) const {
    if (opts_.mode != Mode::exact) return true;
    double expect = 0;
    for (std::size_t s = 0; s < index_.size(); ++s) {
      const double r = slot_rate(s);
      if (r != index_.rate(s)) return false;
      expect += r;
    }
    return std::abs(expect - index_.total()) <= tol * std::max(1.0, expect);
  }

 private:
  double slot_rate(std::size_t s) const {
    const auto& g = state_.geometry();
    const Site site = g.site(s / 3);
    const int x = site.x, y = site.y;
    switch (s % 3) {
      case SlotLayout::kEdge: {
        if (!g.has_edge(x)) return 0.0;
        const int x2 = g.right(x);
        if (state_.in_rod(x, y) || state_.in_rod(x2, y)) return 0.0;
        return state_.occupied(x, y) != state_.occupied(x2, y) ? 0.5 * params_.gamma1 : 0.0;
      }
      case SlotLayout::kUp:
        if (!opts_.vertical || y >= g.vmax || !state_.occupied(x, y)) return 0.0;
        if (state_.in_rod(x, y + 1) || state_.occupied(x, y + 1)) return 0.0;
        return params_.gamma2 * params_.p;
      default:
        if (!opts_.vertical || y <= g.vmin || !state_.occupied(x, y)) return 0.0;
        if (state_.in_rod(x, y - 1) || state_.occupied(x, y - 1)) return 0.0;
        return params_.gamma2 * params_.q;
    }
  }

  void refresh(int x, int y) {
    SlotLayout::for_dependents(state_.geometry(), x, y, [this](std::size_t s) { index_.set(s, slot_rate(s)); });
  }

  void refresh_rod_rows(int y_old, int y_new) {
    for (int x = 0; x < state_.rod_len(); ++x) {
      refresh(x, y_old);
      refresh(x, y_new);
    }
  }

  Event rod_trial(bool up) {
    Event ev;
    ev.kind = up ? EventKind::RodUpTrial : EventKind::RodDownTrial;
    const int y = state_.rod_y();
    ev.site = {0, y};
    const int target = up ? y + 1 : y - 1;
    ev.succeeded = state_.region_empty(target);
    auto& c = trials_[y];
    (up ? c.up_attempts : c.down_attempts) += 1;
    if (ev.succeeded) {
      (up ? c.up_successes : c.down_successes) += 1;
      state_.set_rod_y(target);
      if (opts_.mode == Mode::exact) refresh_rod_rows(y, target);
    }
    return ev;
  }

  Event fire_exact(double u, Rng&) {
    const double monomer = index_.total();
    if (u >= monomer) return rod_trial(u - monomer < params_.a);
    const std::size_t s = index_.sample(u);
    const auto& g = state_.geometry();
    const Site site = g.site(s / 3);
    Event ev;
    ev.site = site;
    switch (s % 3) {
      case SlotLayout::kEdge: {
        ev.kind = EventKind::HSwap;
        const Site other{g.right(site.x), site.y};
        state_.swap_sites(site, other);
        refresh(site.x, site.y);
        refresh(other.x, other.y);
        break;
      }
      case SlotLayout::kUp:
      case SlotLayout::kDown: {
        const bool up = s % 3 == SlotLayout::kUp;
        ev.kind = up ? EventKind::VUp : EventKind::VDown;
        const int ty = up ? site.y + 1 : site.y - 1;
        state_.set(site.x, site.y, false);
        state_.set(site.x, ty, true);
        refresh(site.x, site.y);
        refresh(site.x, ty);
        break;
      }
    }
    return ev;
  }

  Event fire_stirred(Rng& rng) {
    const double u = rng.uniform() * total_rate();
    const auto& g = state_.geometry();
    if (u < params_.a || u < params_.a + params_.b) {
      const bool up = u < params_.a;
      const int target = up ? state_.rod_y() + 1 : state_.rod_y() - 1;
      if (g.contains_row(target)) stir_row(state_, target, rng);
      return rod_trial(up);
    }
    const auto site = g.site(rng.below(g.size()));
    const bool up = rng.uniform() * (params_.p + params_.q) < params_.p;
    Event ev;
    ev.kind = up ? EventKind::VUp : EventKind::VDown;
    ev.site = site;
    ev.succeeded = false;
    const int ty = up ? site.y + 1 : site.y - 1;
    if (!g.contains_row(ty) || state_.in_rod(site.x, site.y) || state_.in_rod(site.x, ty)) return ev;
    stir_row(state_, site.y, rng);
    stir_row(state_, ty, rng);
    if (state_.occupied(site.x, site.y) && !state_.occupied(site.x, ty)) {
      state_.set(site.x, site.y, false);
      state_.set(site.x, ty, true);
      ev.succeeded = true;
    }
    return ev;
  }

  FullState state_;
  Params params_;
  KineticsOptions opts_;
  double clock_ = 0;
  long events_ = 0;
  RateIndex index_;
  TrialStats trials_;
};

/// Run the coupled dynamics from `state0` over [0, T]. Snapshots of the full
/// state are recorded at each of `snapshot_times` that lies in [0, T].
inline Trajectory simulate(FullState state0, double T, const Params& params, Rng& rng,
                           const KineticsOptions& opts = {}, std::vector<double> snapshot_times = {},
                           TrialStats* trials = nullptr) {
  if (!(T >= 0)) throw ParameterError("T", "T >= 0");
  Trajectory traj;
  traj.points.push_back({0.0, state0.rod_y()});
  traj.initial_state = state0;
  Simulator sim(std::move(state0), params, opts);
  std::sort(snapshot_times.begin(), snapshot_times.end());
  for (double ts : snapshot_times) {
    if (ts < 0 || ts > T) continue;
    sim.advance_to(ts, rng, &traj);
    traj.snapshots.push_back({ts, sim.state()});
  }
  sim.advance_to(T, rng, &traj);
  traj.end_time = T;
  if (trials) *trials = sim.trial_stats();
  return traj;
}

}  // namespace rodfluid
