#pragma once

// Brute-force ground truth on tiny boxes: enumerate every exclusion-valid
// configuration, write down the generator from the jump rules directly (bit
// operations on occupancy masks, independent of the simulator's rate index),
// and compare laws exactly.

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "rodfluid/ctmc.hpp"
#include "rodfluid/model.hpp"

namespace rodfluid {

enum class ChainMode {
  coupled,       ///< monomers and rod; rod height ranges over the box
  monomer_only,  ///< monomers around a rod fixed at OracleOptions::rod_y
};

struct OracleOptions {
  ChainMode mode = ChainMode::coupled;
  int rod_y = 0;                  ///< used by monomer_only
  std::optional<int> particles;   ///< restrict to one particle-number sector
  std::size_t max_states = 2'000'000;
};

struct LatticeStateKey {
  int rod_y = 0;
  std::uint64_t mask = 0;  ///< bit g.index(x, y) set when (x, y) is occupied
};

/// Bijection between valid configurations of a tiny box and 0..size()-1.
class StateIndex {
 public:
  StateIndex(LatticeGeometry geom, int rod_len, OracleOptions opts) : geom_(geom), rod_len_(rod_len), opts_(opts) {
    geom_.validate_shape();
    if (geom_.size() > 40) throw std::length_error("StateIndex: box too large for bitmask enumeration");
    std::vector<int> heights;
    if (opts_.mode == ChainMode::coupled) {
      if (rod_len_ > geom_.width) throw ParameterError("width", "width >= N");
      for (int y = geom_.vmin; y <= geom_.vmax; ++y) heights.push_back(y);
    } else {
      heights.push_back(opts_.rod_y);
    }
    for (int y : heights) {
      const std::uint64_t free = ~rod_mask(y) & full_mask();
      const int nfree = std::popcount(free);
      const double count = opts_.particles ? std::round(std::exp(std::lgamma(nfree + 1.0) - std::lgamma(*opts_.particles + 1.0) -
                                                                 std::lgamma(nfree - *opts_.particles + 1.0)))
                                           : std::ldexp(1.0, nfree);
      if (static_cast<double>(keys_.size()) + count > static_cast<double>(opts_.max_states))
        throw std::length_error("StateIndex: state space exceeds cap");
      // Enumerate every subset of the free sites.
      std::uint64_t sub = 0;
      do {
        if (!opts_.particles || std::popcount(sub) == *opts_.particles) add({y, sub});
        sub = (sub - free) & free;
      } while (sub != 0);
    }
  }

  std::size_t size() const { return keys_.size(); }
  const LatticeStateKey& key(std::size_t i) const { return keys_[i]; }
  const LatticeGeometry& geometry() const { return geom_; }
  int rod_len() const { return rod_len_; }
  const OracleOptions& options() const { return opts_; }

  std::optional<std::size_t> find(const LatticeStateKey& k) const {
    auto it = lookup_.find(pack(k));
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
  }

  /// Rod sites at height y that lie inside the box.
  std::uint64_t rod_mask(int y) const {
    std::uint64_t m = 0;
    if (!geom_.contains_row(y)) return m;
    for (int x = 0; x < rod_len_; ++x) m |= bit(x, y);
    return m;
  }

  std::uint64_t bit(int x, int y) const { return std::uint64_t{1} << geom_.index(x, y); }
  std::uint64_t full_mask() const {
    return geom_.size() == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << geom_.size()) - 1;
  }

 private:
  std::uint64_t pack(const LatticeStateKey& k) const {
    return k.mask | (static_cast<std::uint64_t>(k.rod_y - geom_.vmin + 4096) << 40);
  }

  void add(const LatticeStateKey& k) {
    lookup_.emplace(pack(k), keys_.size());
    keys_.push_back(k);
  }

  LatticeGeometry geom_;
  int rod_len_;
  OracleOptions opts_;
  std::vector<LatticeStateKey> keys_;
  std::unordered_map<std::uint64_t, std::size_t> lookup_;
};

/// Generator of the monomer (and, in coupled mode, rod) dynamics on the
/// enumerated states, with every exclusion and boundary indicator applied.
inline GeneratorMatrix build_generator(const StateIndex& index, const Params& params) {
  const auto& g = index.geometry();
  GeneratorMatrix Q(index.size());
  for (std::size_t s = 0; s < index.size(); ++s) {
    const auto [rod_y, mask] = index.key(s);
    const std::uint64_t rod = index.rod_mask(rod_y);
    auto go = [&](std::uint64_t m, int y, double rate) {
      auto t = index.find({y, m});
      if (!t) throw std::logic_error("build_generator: transition leaves the enumerated space");
      Q.add_rate(s, *t, rate);
    };
    for (int y = g.vmin; y <= g.vmax; ++y) {
      for (int x = 0; x < g.width; ++x) {
        const std::uint64_t here = index.bit(x, y);
        if (g.has_edge(x)) {
          const std::uint64_t nb = index.bit(g.right(x), y);
          if (!((here | nb) & rod) && bool(mask & here) != bool(mask & nb))
            go(mask ^ here ^ nb, rod_y, 0.5 * params.gamma1);
        }
        if (!(mask & here)) continue;
        if (y < g.vmax) {
          const std::uint64_t up = index.bit(x, y + 1);
          if (!(up & rod) && !(mask & up)) go(mask ^ here ^ up, rod_y, params.gamma2 * params.p);
        }
        if (y > g.vmin) {
          const std::uint64_t dn = index.bit(x, y - 1);
          if (!(dn & rod) && !(mask & dn)) go(mask ^ here ^ dn, rod_y, params.gamma2 * params.q);
        }
      }
    }
    if (index.options().mode == ChainMode::coupled) {
      if (rod_y < g.vmax && !(mask & index.rod_mask(rod_y + 1))) go(mask, rod_y + 1, params.a);
      if (rod_y > g.vmin && !(mask & index.rod_mask(rod_y - 1))) go(mask, rod_y - 1, params.b);
    }
  }
  return Q;
}

/// Product-measure weights with the density profile, restricted to the
/// enumerated states (hence conditioned on the rod region and sector) and
/// normalized to one. `site_scale` optionally multiplies one site's odds.
inline std::vector<double> product_weights(const StateIndex& index, const Params& params,
                                           std::optional<std::pair<Site, double>> site_scale = std::nullopt) {
  const auto& g = index.geometry();
  std::vector<double> log_w(index.size());
  for (std::size_t s = 0; s < index.size(); ++s) {
    const auto& k = index.key(s);
    double lw = 0;
    for (int y = g.vmin; y <= g.vmax; ++y) {
      for (int x = 0; x < g.width; ++x) {
        if (!(k.mask & index.bit(x, y))) continue;
        lw += log_odds(params, y);
        if (site_scale && site_scale->first == Site{x, y}) lw += std::log(site_scale->second);
      }
    }
    log_w[s] = lw;
  }
  double top = -INFINITY;
  for (double v : log_w) top = std::max(top, v);
  double z = 0;
  for (double v : log_w) z += std::exp(v - top);
  std::vector<double> w(index.size());
  for (std::size_t s = 0; s < index.size(); ++s) w[s] = std::exp(log_w[s] - top) / z;
  return w;
}

/// Joint reversible law of the coupled chain: product weights times (a/b)^y.
inline std::vector<double> joint_weights(const StateIndex& index, const Params& params) {
  const auto& g = index.geometry();
  std::vector<double> log_w(index.size());
  for (std::size_t s = 0; s < index.size(); ++s) {
    const auto& k = index.key(s);
    double lw = -params.alpha() * k.rod_y;
    for (int y = g.vmin; y <= g.vmax; ++y)
      for (int x = 0; x < g.width; ++x)
        if (k.mask & index.bit(x, y)) lw += log_odds(params, y);
    log_w[s] = lw;
  }
  double top = -INFINITY;
  for (double v : log_w) top = std::max(top, v);
  double z = 0;
  for (double v : log_w) z += std::exp(v - top);
  std::vector<double> w(index.size());
  for (std::size_t s = 0; s < index.size(); ++s) w[s] = std::exp(log_w[s] - top) / z;
  return w;
}

/// Initial law nu_rho^{y0} x delta_{y0} on a coupled index.
inline std::vector<double> conditioned_initial_law(const StateIndex& index, const Params& params, int y0) {
  const auto& g = index.geometry();
  std::vector<double> w(index.size(), 0.0);
  for (std::size_t s = 0; s < index.size(); ++s) {
    const auto& k = index.key(s);
    if (k.rod_y != y0) continue;
    double prob = 1;
    const std::uint64_t rod = index.rod_mask(y0);
    for (int y = g.vmin; y <= g.vmax; ++y) {
      const double rho = density_profile(params, y);
      for (int x = 0; x < g.width; ++x) {
        const std::uint64_t b = index.bit(x, y);
        if (b & rod) continue;
        prob *= (k.mask & b) ? rho : 1 - rho;
      }
    }
    w[s] = prob;
  }
  return w;
}

/// Marginal law of the rod height.
inline std::map<int, double> rod_marginal(const StateIndex& index, const std::vector<double>& law) {
  std::map<int, double> out;
  for (std::size_t s = 0; s < index.size(); ++s) out[index.key(s).rod_y] += law[s];
  return out;
}

}  // namespace rodfluid
