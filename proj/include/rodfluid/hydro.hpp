#pragma once

// Noiseless discrete Burgers equation for the vertical fluid profile and the
// time-inhomogeneous rod walk driven by it.

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "rodfluid/model.hpp"
#include "rodfluid/random.hpp"
#include "rodfluid/trajectory.hpp"

namespace rodfluid {

/// Density per height on [vmin, vmin + rho.size() - 1].
struct DensityField {
  int vmin = 0;
  std::vector<double> rho;
  double time = 0;

  int vmax() const { return vmin + static_cast<int>(rho.size()) - 1; }
  bool contains(int i) const { return i >= vmin && i <= vmax(); }
  double at(int i) const { return rho[static_cast<std::size_t>(i - vmin)]; }
  double mass() const {
    double m = 0;
    for (double r : rho) m += r;
    return m;
  }
};

inline DensityField equilibrium_field(const Params& params, int vmin, int vmax) {
  DensityField f{vmin, {}, 0.0};
  for (int i = vmin; i <= vmax; ++i) f.rho.push_back(density_profile(params, i));
  return f;
}

/// rho_below on heights <= 0, rho_above on heights > 0.
inline DensityField riemann_field(int vmin, int vmax, double rho_below, double rho_above) {
  DensityField f{vmin, {}, 0.0};
  for (int i = vmin; i <= vmax; ++i) f.rho.push_back(i <= 0 ? rho_below : rho_above);
  return f;
}

/// d rho(i)/dt = -p rho(i)(1-rho(i+1)) - q rho(i)(1-rho(i-1))
///              + p rho(i-1)(1-rho(i)) + q rho(i+1)(1-rho(i)),
/// with every term that references a height outside the window dropped.
inline std::vector<double> burgers_rhs(const std::vector<double>& rho, const Params& params) {
  const std::size_t n = rho.size();
  std::vector<double> d(n, 0.0);
  // Net upward current across each interior bond (i, i+1); boundaries carry none.
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double current = params.p * rho[i] * (1 - rho[i + 1]) - params.q * rho[i + 1] * (1 - rho[i]);
    d[i] -= current;
    d[i + 1] += current;
  }
  return d;
}

inline std::vector<double> burgers_rhs(const DensityField& field, const Params& params) {
  return burgers_rhs(field.rho, params);
}

/// Fields at equally spaced times 0, h, 2h, ..., T (h = T / steps <= dt).
struct DensityTrajectory {
  std::vector<DensityField> frames;
  double step = 0;

  const DensityField& back() const { return frames.back(); }
  double end_time() const { return frames.back().time; }

  /// rho(i, t) by linear interpolation in time; heights outside the window
  /// are reported as NaN.
  double rho(int i, double t) const {
    const auto& f0 = frames.front();
    if (!f0.contains(i)) return std::numeric_limits<double>::quiet_NaN();
    if (frames.size() == 1 || t <= f0.time) return f0.at(i);
    if (t >= end_time()) return back().at(i);
    const double pos = (t - f0.time) / step;
    auto k = static_cast<std::size_t>(pos);
    if (k + 1 >= frames.size()) k = frames.size() - 2;
    const double w = pos - static_cast<double>(k);
    return (1 - w) * frames[k].at(i) + w * frames[k + 1].at(i);
  }
};

/// Classical fourth-order Runge-Kutta with a fixed step. The step must satisfy
/// dt <= 0.1 / (p + q). Values are never clamped: leaving [0, 1] or drifting in
/// mass by more than 1e-10 per unit time aborts with a diagnostic.
inline DensityTrajectory integrate(DensityField rho0, double T, double dt, const Params& params,
                                   int record_every = 1) {
  if (!(T >= 0)) throw ParameterError("T", "T >= 0");
  if (!(dt > 0) || dt > 0.1 / (params.p + params.q) * (1 + 1e-12)) throw ParameterError("dt", "0 < dt <= 0.1/(p+q)");
  if (record_every < 1) throw ParameterError("record_every", "record_every >= 1");

  const auto steps = T == 0 ? std::size_t{0} : static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
  const double h = steps ? T / static_cast<double>(steps) : dt;
  const double t0 = rho0.time;
  const double mass0 = rho0.mass();

  DensityTrajectory out;
  out.step = h * record_every;
  out.frames.push_back(rho0);

  std::vector<double> y = rho0.rho, tmp(y.size());
  for (std::size_t k = 1; k <= steps; ++k) {
    const auto k1 = burgers_rhs(y, params);
    for (std::size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
    const auto k2 = burgers_rhs(tmp, params);
    for (std::size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
    const auto k3 = burgers_rhs(tmp, params);
    for (std::size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + h * k3[i];
    const auto k4 = burgers_rhs(tmp, params);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);

    const double t = t0 + h * static_cast<double>(k);
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (!(y[i] >= -1e-12 && y[i] <= 1 + 1e-12)) {
        std::ostringstream msg;
        msg << "burgers: density left [0,1] at t=" << t << " height=" << rho0.vmin + static_cast<int>(i)
            << " value=" << y[i] << " (dt=" << h << ")";
        throw std::runtime_error(msg.str());
      }
    }
    double mass = 0;
    for (double r : y) mass += r;
    if (std::abs(mass - mass0) > 1e-10 * std::max(1.0, t - t0)) {
      std::ostringstream msg;
      msg << "burgers: mass drift " << mass - mass0 << " at t=" << t;
      throw std::runtime_error(msg.str());
    }
    if (k % static_cast<std::size_t>(record_every) == 0 || k == steps) out.frames.push_back({rho0.vmin, y, t});
  }
  return out;
}

/// Rod walk with time-dependent rates a[1-rho(y+1,t)]^N and b[1-rho(y-1,t)]^N,
/// simulated exactly by thinning a rate-(a+b) Poisson stream. Targets outside
/// the density window are blocked. Proposals and acceptances per starting
/// height are recorded into `stats` when given.
inline Trajectory inhomogeneous_rod_walk(int y0, double T, const DensityTrajectory& field, const Params& params,
                                         Rng& rng, TrialStats* stats = nullptr) {
  if (!(T >= 0)) throw ParameterError("T", "T >= 0");
  if (T > field.end_time() + 1e-12) throw ParameterError("T", "density trajectory must cover [0, T]");
  Trajectory traj;
  traj.points.push_back({0.0, y0});
  const double bound = params.a + params.b;
  int y = y0;
  double t = 0;
  for (;;) {
    t += rng.exponential(bound);
    if (t > T) break;
    const bool up = rng.uniform() * bound < params.a;
    const int target = up ? y + 1 : y - 1;
    const double rho = field.rho(target, t);
    const bool accept = !std::isnan(rho) && rng.uniform() < std::pow(1 - rho, params.N);
    if (stats) {
      auto& c = (*stats)[y];
      (up ? c.up_attempts : c.down_attempts) += 1;
      if (accept) (up ? c.up_successes : c.down_successes) += 1;
    }
    if (accept) {
      y = target;
      traj.points.push_back({t, y});
    }
  }
  traj.end_time = T;
  return traj;
}

}  // namespace rodfluid
