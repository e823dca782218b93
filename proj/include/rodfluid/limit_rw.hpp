#pragma once

// The rod's limiting random walk: jump rates averaged over the equilibrium
// fluid, its reversible law, exact simulation, and the closed forms of the
// continuous approximation (normalizer, mean, mode).

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include <boost/math/special_functions/digamma.hpp>

#include "rodfluid/ctmc.hpp"
#include "rodfluid/model.hpp"
#include "rodfluid/random.hpp"
#include "rodfluid/trajectory.hpp"

namespace rodfluid {

/// The walk's reversible law does not exist for these parameters.
class NotNormalizable : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct RwRates {
  double up = 0;
  double down = 0;
};

/// up = a [1 - rho(y+1)]^N, down = b [1 - rho(y-1)]^N, with the powers taken
/// in log-space.
inline RwRates rw_rates(int y, const Params& params) {
  const double n = params.N;
  return {params.a * std::exp(n * log_vacancy(params, y + 1.0)),
          params.b * std::exp(n * log_vacancy(params, y - 1.0))};
}

/// log of the unnormalized reversible weight (a/b)^y / (1 + kappa (p/q)^y)^N.
inline double log_rw_weight(const Params& params, double y) {
  return -params.alpha() * y + params.N * log_vacancy(params, y);
}

/// Normalized reversible law of the walk on the window [ymin, ymax].
struct RWLaw {
  Params params;
  double alpha = 0;
  double beta = 0;
  int ymin = 0;
  int ymax = 0;
  std::vector<double> weights;

  double prob(int y) const { return y < ymin || y > ymax ? 0.0 : weights[static_cast<std::size_t>(y - ymin)]; }

  double mean() const {
    double m = 0;
    for (int y = ymin; y <= ymax; ++y) m += y * prob(y);
    return m;
  }

  int mode() const {
    return ymin + static_cast<int>(std::max_element(weights.begin(), weights.end()) - weights.begin());
  }

  std::map<int, double> as_map() const {
    std::map<int, double> out;
    for (int y = ymin; y <= ymax; ++y) out[y] = prob(y);
    return out;
  }
};

/// Throws NotNormalizable unless 0 < alpha < N beta. The upper bound is the
/// recurrence condition a/b > (p/q)^N; alpha <= 0 leaves the upward tail
/// (where the fluid is thin) unsummable.
inline void require_normalizable(const Params& params) {
  params.validate();
  const double alpha = params.alpha(), beta = params.beta();
  if (!(alpha < params.N * beta))
    throw NotNormalizable("rod walk not positive recurrent: need a/b > (p/q)^N (alpha < N beta)");
  if (!(alpha > 0)) throw NotNormalizable("rod walk drifts upward forever: need a < b (alpha > 0)");
}

/// Reversible law m(y) ~ (a/b)^y / (1 + kappa (p/q)^y)^N, normalized on
/// `window` or, when none is given, on the smallest window around the peak
/// whose edge weights fall below 1e-12 of the maximum.
inline RWLaw stationary_measure(const Params& params, std::optional<std::pair<int, int>> window = std::nullopt) {
  require_normalizable(params);
  RWLaw law;
  law.params = params;
  law.alpha = params.alpha();
  law.beta = params.beta();
  if (window) {
    if (window->first > window->second) throw ParameterError("window", "ymin <= ymax");
    law.ymin = window->first;
    law.ymax = window->second;
  } else {
    // The log-weight is concave in y, so both tails decay monotonically from the peak.
    const double peak_x = (std::log(params.kappa) + std::log(params.N * law.beta / law.alpha - 1)) / law.beta;
    int peak = static_cast<int>(std::lround(peak_x));
    while (log_rw_weight(params, peak + 1) > log_rw_weight(params, peak)) ++peak;
    while (log_rw_weight(params, peak - 1) > log_rw_weight(params, peak)) --peak;
    const double top = log_rw_weight(params, peak);
    const double cut = top + std::log(1e-12);
    law.ymin = peak;
    law.ymax = peak;
    while (log_rw_weight(params, law.ymin) >= cut) --law.ymin;
    while (log_rw_weight(params, law.ymax) >= cut) ++law.ymax;
  }
  std::vector<double> lw;
  for (int y = law.ymin; y <= law.ymax; ++y) lw.push_back(log_rw_weight(params, y));
  const double top = *std::max_element(lw.begin(), lw.end());
  double z = 0;
  for (double v : lw) z += std::exp(v - top);
  for (double v : lw) law.weights.push_back(std::exp(v - top) / z);
  return law;
}

/// max over interior y of |m(y) up(y) - m(y+1) down(y+1)|.
inline double rw_detailed_balance_residual(const RWLaw& law) {
  double worst = 0;
  for (int y = law.ymin; y < law.ymax; ++y) {
    const double flow_up = law.prob(y) * rw_rates(y, law.params).up;
    const double flow_down = law.prob(y + 1) * rw_rates(y + 1, law.params).down;
    worst = std::max(worst, std::abs(flow_up - flow_down));
  }
  return worst;
}

/// Generator of the walk truncated to [ymin, ymax] (jumps out suppressed).
inline GeneratorMatrix rw_generator(const Params& params, int ymin, int ymax) {
  GeneratorMatrix Q(static_cast<std::size_t>(ymax - ymin + 1));
  for (int y = ymin; y <= ymax; ++y) {
    const auto r = rw_rates(y, params);
    const auto i = static_cast<std::size_t>(y - ymin);
    if (y < ymax) Q.add_rate(i, i + 1, r.up);
    if (y > ymin) Q.add_rate(i, i - 1, r.down);
  }
  return Q;
}

/// Exact Gillespie simulation of the walk on the integers.
class RodWalk {
 public:
  RodWalk(int y0, Params params) : y_(y0), params_(params) { params_.validate(); }

  int height() const { return y_; }
  double clock() const { return clock_; }

  /// Next jump if it happens by `horizon`; otherwise stop the clock there.
  bool step_until(double horizon, Rng& rng) {
    const auto r = rw_rates(y_, params_);
    const double total = r.up + r.down;
    const double t = total > 0 ? clock_ + rng.exponential(total) : std::numeric_limits<double>::infinity();
    if (t > horizon) {
      clock_ = horizon;
      return false;
    }
    clock_ = t;
    y_ += rng.uniform() * total < r.up ? 1 : -1;
    return true;
  }

  /// One jump, returning its holding time.
  double step(Rng& rng) {
    const double t0 = clock_;
    step_until(std::numeric_limits<double>::infinity(), rng);
    return clock_ - t0;
  }

 private:
  int y_;
  Params params_;
  double clock_ = 0;
};

inline Trajectory simulate_rw(int y0, double T, const Params& params, Rng& rng) {
  if (!(T >= 0)) throw ParameterError("T", "T >= 0");
  Trajectory traj;
  traj.points.push_back({0.0, y0});
  RodWalk walk(y0, params);
  while (walk.step_until(T, rng)) traj.points.push_back({walk.clock(), walk.height()});
  traj.end_time = T;
  return traj;
}

/// Time-weighted occupation law over `events` jumps started at y0. Each visit
/// is credited with its mean holding time 1/(up + down) rather than the sampled
/// one: same expectation, far less variance where both rates are tiny.
inline std::map<int, double> rw_occupation(int y0, long events, const Params& params, Rng& rng) {
  std::map<int, double> occ;
  RodWalk walk(y0, params);
  double total = 0;
  for (long k = 0; k < events; ++k) {
    const auto r = rw_rates(walk.height(), params);
    const double dt = 1.0 / (r.up + r.down);
    occ[walk.height()] += dt;
    total += dt;
    walk.step(rng);
  }
  for (auto& [y, v] : occ) v /= total;
  return occ;
}

namespace detail {
inline double ratio_in_domain(double alpha, double beta, double N) {
  const double s = alpha / beta;
  if (!(beta > 0) || !(s > 0) || !(s < N)) throw std::domain_error("continuous law needs 0 < alpha/beta < N");
  return s;
}
}  // namespace detail

/// log Z(alpha, beta, N) = log of the integral of e^{-alpha x} / (1 + e^{-beta x})^N
/// = log[Gamma(s) Gamma(N - s) / (beta Gamma(N))] with s = alpha / beta.
inline double log_continuous_normalizer(double alpha, double beta, double N) {
  const double s = detail::ratio_in_domain(alpha, beta, N);
  return std::lgamma(s) + std::lgamma(N - s) - std::lgamma(N) - std::log(beta);
}

inline double continuous_normalizer(double alpha, double beta, double N) {
  return std::exp(log_continuous_normalizer(alpha, beta, N));
}

/// Mean of the continuous law: -d log Z / d alpha = (psi(N - s) - psi(s)) / beta.
inline double continuous_mean(double alpha, double beta, double N) {
  const double s = detail::ratio_in_domain(alpha, beta, N);
  return (boost::math::digamma(N - s) - boost::math::digamma(s)) / beta;
}

/// Maximizer of e^{-alpha x} / (1 + e^{-beta x})^N: log(N beta / alpha - 1) / beta.
inline double modus(double alpha, double beta, double N) {
  const double ratio = N * beta / alpha;
  if (!(alpha > 0) || !(beta > 0) || !(ratio > 1)) throw std::domain_error("modus needs N beta / alpha > 1");
  return std::log(ratio - 1) / beta;
}

inline double modus(const Params& params) { return modus(params.alpha(), params.beta(), params.N); }

}  // namespace rodfluid
