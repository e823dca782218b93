#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "rodfluid/random.hpp"

namespace rodfluid {

/// Counts of rod heights over replicas.
class EmpiricalLaw {
 public:
  void add(int y, long n = 1) {
    counts_[y] += n;
    total_ += n;
  }

  long replicas() const { return total_; }
  const std::map<int, long>& counts() const { return counts_; }

  double prob(int y) const {
    auto it = counts_.find(y);
    return it == counts_.end() || total_ == 0 ? 0.0 : static_cast<double>(it->second) / static_cast<double>(total_);
  }

  /// Multinomial standard error of prob(y).
  double std_error(int y) const {
    const double p = prob(y);
    return total_ ? std::sqrt(p * (1 - p) / static_cast<double>(total_)) : 0.0;
  }

  std::map<int, double> probabilities() const {
    std::map<int, double> out;
    for (const auto& [y, c] : counts_) out[y] = static_cast<double>(c) / static_cast<double>(total_);
    return out;
  }

 private:
  std::map<int, long> counts_;
  long total_ = 0;
};

/// Half the L1 distance, summed over the union of both supports (mass the
/// reference puts off the empirical support is therefore counted in full).
inline double tv_distance(const std::map<int, double>& p, const std::map<int, double>& q) {
  double s = 0;
  auto ip = p.begin();
  auto iq = q.begin();
  while (ip != p.end() || iq != q.end()) {
    if (iq == q.end() || (ip != p.end() && ip->first < iq->first)) {
      s += std::abs(ip->second);
      ++ip;
    } else if (ip == p.end() || iq->first < ip->first) {
      s += std::abs(iq->second);
      ++iq;
    } else {
      s += std::abs(ip->second - iq->second);
      ++ip;
      ++iq;
    }
  }
  return 0.5 * s;
}

struct TvEstimate {
  double tv = 0;
  double lo = 0;  ///< lower end of the bootstrap percentile interval
  double hi = 0;
};

/// TV distance of an empirical law from a reference, with a percentile
/// bootstrap interval from `resamples` multinomial resamples of the counts.
inline TvEstimate tv_with_bootstrap(const EmpiricalLaw& law, const std::map<int, double>& reference, int resamples,
                                    std::uint64_t seed, double level = 0.95) {
  TvEstimate est;
  est.tv = tv_distance(law.probabilities(), reference);
  if (resamples <= 0 || law.replicas() == 0) {
    est.lo = est.hi = est.tv;
    return est;
  }
  std::vector<int> support;
  std::vector<double> cdf;
  double acc = 0;
  for (const auto& [y, c] : law.counts()) {
    support.push_back(y);
    acc += static_cast<double>(c) / static_cast<double>(law.replicas());
    cdf.push_back(acc);
  }
  Rng rng(seed);
  std::vector<double> tvs;
  tvs.reserve(static_cast<std::size_t>(resamples));
  std::vector<long> boot(support.size());
  for (int b = 0; b < resamples; ++b) {
    std::fill(boot.begin(), boot.end(), 0);
    for (long k = 0; k < law.replicas(); ++k) {
      const double u = rng.uniform() * acc;
      auto j = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
      boot[std::min(j, boot.size() - 1)] += 1;
    }
    std::map<int, double> pb;
    for (std::size_t j = 0; j < support.size(); ++j)
      if (boot[j]) pb[support[j]] = static_cast<double>(boot[j]) / static_cast<double>(law.replicas());
    tvs.push_back(tv_distance(pb, reference));
  }
  std::sort(tvs.begin(), tvs.end());
  const auto pick = [&](double f) {
    auto i = static_cast<std::size_t>(std::floor(f * static_cast<double>(tvs.size() - 1)));
    return tvs[std::min(i, tvs.size() - 1)];
  };
  est.lo = pick((1 - level) / 2);
  est.hi = pick(1 - (1 - level) / 2);
  return est;
}

}  // namespace rodfluid
