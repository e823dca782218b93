#pragma once

// Lattice geometry, model constants, occupancy state and the vertical
// density profile of the monomer fluid.

#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "rodfluid/random.hpp"

namespace rodfluid {

/// Raised for invalid parameters or configuration. Carries the offending key
/// and the violated constraint so front ends can emit a structured record.
class ParameterError : public std::invalid_argument {
 public:
  ParameterError(std::string key, std::string constraint)
      : std::invalid_argument(key + ": " + constraint),
        key_(std::move(key)),
        constraint_(std::move(constraint)) {}

  const std::string& key() const noexcept { return key_; }
  const std::string& constraint() const noexcept { return constraint_; }

 private:
  std::string key_;
  std::string constraint_;
};

/// Numerically stable log(1 + e^x).
inline double softplus(double x) noexcept {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

/// Model constants.
///
/// p, q   vertical monomer jump rates (up, down), 0 < p < q
/// a, b   rod trial rates (up, down)
/// gamma1 horizontal speed-up, gamma2 vertical speed-up
/// kappa  density parameter of the fluid profile
/// N      rod length in lattice sites
struct Params {
  double p = std::exp(-1.0);
  double q = 1.0;
  double a = std::exp(-1.0);
  double b = 1.0;
  double gamma1 = 1.0;
  double gamma2 = 1.0;
  double kappa = 1.0;
  int N = 2;

  /// log(b/a); the rod's own field strength.
  double alpha() const { return std::log(b / a); }
  /// log(q/p); the monomers' field strength.
  double beta() const { return std::log(q / p); }

  void validate() const {
    auto finite_positive = [](double v) { return std::isfinite(v) && v > 0; };
    // p = 0 is allowed by the model but makes beta infinite; the profile and
    // all log-space analytics need a finite beta.
    if (!(finite_positive(p))) throw ParameterError("p", "0 < p < q (beta = log(q/p) must be finite)");
    if (!(std::isfinite(q) && q > p)) throw ParameterError("q", "p < q < inf");
    if (!finite_positive(a)) throw ParameterError("a", "a > 0");
    if (!finite_positive(b)) throw ParameterError("b", "b > 0");
    if (!finite_positive(gamma1)) throw ParameterError("gamma1", "gamma1 > 0");
    if (!finite_positive(gamma2)) throw ParameterError("gamma2", "gamma2 > 0");
    if (!finite_positive(kappa)) throw ParameterError("kappa", "kappa > 0");
    if (N < 2) throw ParameterError("N", "N >= 2");
  }
};

struct Site {
  int x = 0;
  int y = 0;
  auto operator<=>(const Site&) const = default;
};

/// Finite box: `width` columns with periodic horizontal boundary, rows
/// vmin..vmax with closed vertical boundary (jumps leaving the box are
/// suppressed).
struct LatticeGeometry {
  int width = 16;
  int vmin = -8;
  int vmax = 8;

  int height() const { return vmax - vmin + 1; }
  std::size_t size() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height()); }
  bool contains_row(int y) const { return y >= vmin && y <= vmax; }

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y - vmin) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x);
  }
  Site site(std::size_t i) const {
    return {static_cast<int>(i % static_cast<std::size_t>(width)),
            static_cast<int>(i / static_cast<std::size_t>(width)) + vmin};
  }
  int right(int x) const { return x + 1 == width ? 0 : x + 1; }
  int left(int x) const { return x == 0 ? width - 1 : x - 1; }

  /// Whether the horizontal edge (x, right(x)) exists. On a ring of two
  /// columns both wrap directions name the same pair, which counts once.
  bool has_edge(int x) const { return width >= 3 || (width == 2 && x == 0); }

  /// Shape-only checks (used by the brute-force oracle on tiny boxes).
  void validate_shape() const {
    if (width < 1) throw ParameterError("width", "width >= 1");
    if (vmin > vmax) throw ParameterError("vmin", "vmin <= vmax");
  }

  /// Full checks for simulation: the rod fits and the origin is interior.
  void validate(const Params& params) const {
    validate_shape();
    if (width < params.N) throw ParameterError("width", "width >= N");
    if (!(vmin < 0)) throw ParameterError("vmin", "vmin < 0 < vmax");
    if (!(vmax > 0)) throw ParameterError("vmax", "vmin < 0 < vmax");
  }
};

/// Log-odds of occupation at height y: log kappa - beta * y.
inline double log_odds(const Params& params, double y) {
  return std::log(params.kappa) - params.beta() * y;
}

/// Fluid density at height y: kappa (p/q)^y / (1 + kappa (p/q)^y).
/// Evaluated as a logistic in log-space so that |y| in the thousands is safe.
inline double density_profile(const Params& params, double y) {
  const double z = log_odds(params, y);
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

/// log(1 - rho(y)) = -log(1 + kappa (p/q)^y).
inline double log_vacancy(const Params& params, double y) {
  return -softplus(log_odds(params, y));
}

/// Sites covered by a rod of length n at height y.
inline std::vector<Site> rod_region(int y, int n) {
  std::vector<Site> sites;
  sites.reserve(static_cast<std::size_t>(n > 0 ? n : 0));
  for (int x = 0; x < n; ++x) sites.push_back({x, y});
  return sites;
}

/// Monomer occupancy on the box plus the rod height.
///
/// Invariant: no monomer on the rod region. Row particle counts are cached.
class FullState {
 public:
  FullState() = default;
  FullState(LatticeGeometry geom, int rod_len, int rod_y)
      : geom_(geom),
        rod_len_(rod_len),
        rod_y_(rod_y),
        occ_(geom.size(), 0),
        row_count_(static_cast<std::size_t>(geom.height()), 0) {}

  const LatticeGeometry& geometry() const { return geom_; }
  int rod_len() const { return rod_len_; }
  int rod_y() const { return rod_y_; }

  bool in_rod(int x, int y) const { return y == rod_y_ && x < rod_len_; }
  bool occupied(int x, int y) const { return occ_[geom_.index(x, y)] != 0; }
  bool occupied(std::size_t i) const { return occ_[i] != 0; }

  void set(int x, int y, bool value) {
    auto& cell = occ_[geom_.index(x, y)];
    if (static_cast<bool>(cell) == value) return;
    cell = value ? 1 : 0;
    row_count_[static_cast<std::size_t>(y - geom_.vmin)] += value ? 1 : -1;
  }

  /// Exchange the contents of two sites.
  void swap_sites(Site s, Site t) {
    const bool a = occupied(s.x, s.y);
    const bool b = occupied(t.x, t.y);
    set(s.x, s.y, b);
    set(t.x, t.y, a);
  }

  void set_rod_y(int y) { rod_y_ = y; }

  int row_count(int y) const { return row_count_[static_cast<std::size_t>(y - geom_.vmin)]; }
  long total() const {
    long n = 0;
    for (int c : row_count_) n += c;
    return n;
  }

  /// Whether every site of the rod region at height y lies in the box and is empty.
  bool region_empty(int y) const {
    if (!geom_.contains_row(y)) return false;
    for (int x = 0; x < rod_len_; ++x)
      if (occupied(x, y)) return false;
    return true;
  }

  const std::vector<std::uint8_t>& occupancy() const { return occ_; }

  /// Throws std::logic_error when the exclusion or count cache is broken.
  void check() const {
    if (rod_len_ > geom_.width) throw std::logic_error("rod wider than lattice");
    if (!geom_.contains_row(rod_y_)) throw std::logic_error("rod outside lattice");
    for (int x = 0; x < rod_len_; ++x)
      if (occupied(x, rod_y_)) throw std::logic_error("monomer on rod site");
    for (int y = geom_.vmin; y <= geom_.vmax; ++y) {
      int n = 0;
      for (int x = 0; x < geom_.width; ++x) n += occupied(x, y);
      if (n != row_count(y)) throw std::logic_error("row count cache out of sync");
    }
  }

  friend bool operator==(const FullState& a, const FullState& b) {
    return a.rod_y_ == b.rod_y_ && a.rod_len_ == b.rod_len_ && a.occ_ == b.occ_;
  }

 private:
  LatticeGeometry geom_{};
  int rod_len_ = 0;
  int rod_y_ = 0;
  std::vector<std::uint8_t> occ_;
  std::vector<int> row_count_;
};

/// Draw from the product measure with the density profile, conditioned on the
/// rod region at y0 being empty. Since the measure is a product, conditioning
/// amounts to leaving the rod sites empty.
inline FullState sample_initial(const LatticeGeometry& geom, const Params& params, int y0, Rng& rng) {
  FullState state(geom, params.N, y0);
  for (int y = geom.vmin; y <= geom.vmax; ++y) {
    const double rho = density_profile(params, y);
    for (int x = 0; x < geom.width; ++x) {
      if (state.in_rod(x, y)) continue;
      if (rng.bernoulli(rho)) state.set(x, y, true);
    }
  }
  return state;
}

}  // namespace rodfluid
