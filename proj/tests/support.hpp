#pragma once

// Independent numerical oracles shared by the unit and acceptance tests.

#include <cmath>
#include <functional>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "rodfluid/model.hpp"

namespace rodfluid::testing {

/// log of e^{-alpha x} / (1 + e^{-beta x})^N
inline double log_continuous_density(double alpha, double beta, double n, double x) {
  return -alpha * x - n * softplus(-beta * x);
}

struct QuadratureMoments {
  double z = 0;
  double mean = 0;
};

/// Z and the mean of the continuous law by adaptive Gauss-Kronrod on a window
/// wide enough that both tails are below e^-60 of the peak. The integrand is
/// scaled by its peak value, and x is measured from the peak to keep the first
/// moment free of cancellation.
inline QuadratureMoments quadrature_moments(double alpha, double beta, double n) {
  // Locate the peak numerically (golden section on the concave log-density).
  const double left_rate = n * beta - alpha, right_rate = alpha;
  double lo = -200.0 / left_rate, hi = 200.0 / right_rate;
  for (int it = 0; it < 300; ++it) {
    const double m1 = lo + (hi - lo) * 0.381966, m2 = hi - (hi - lo) * 0.381966;
    if (log_continuous_density(alpha, beta, n, m1) < log_continuous_density(alpha, beta, n, m2)) lo = m1;
    else hi = m2;
  }
  const double peak = 0.5 * (lo + hi);
  const double top = log_continuous_density(alpha, beta, n, peak);
  const double a = peak - 60.0 / left_rate - 60.0 / beta, b = peak + 60.0 / right_rate + 60.0 / beta;
  auto f = [&](double u) { return std::exp(log_continuous_density(alpha, beta, n, peak + u) - top); };
  auto g = [&](double u) { return u * f(u); };
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double i0 = GK::integrate(f, a - peak, 0.0, 20, 1e-14) + GK::integrate(f, 0.0, b - peak, 20, 1e-14);
  const double i1 = GK::integrate(g, a - peak, 0.0, 20, 1e-14) + GK::integrate(g, 0.0, b - peak, 20, 1e-14);
  return {std::exp(top) * i0, peak + i1 / i0};
}

/// Argmax of the continuous density on a uniform grid of spacing h around a
/// starting bracket [lo, hi].
inline double grid_argmax(double alpha, double beta, double n, double lo, double hi, double h) {
  double best_x = lo, best = -std::numeric_limits<double>::infinity();
  for (double x = lo; x <= hi; x += h) {
    const double v = log_continuous_density(alpha, beta, n, x);
    if (v > best) {
      best = v;
      best_x = x;
    }
  }
  return best_x;
}

}  // namespace rodfluid::testing
