#pragma once

// Finite continuous-time Markov chains: sparse generator storage, detailed
// balance residuals and transient laws by uniformization.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace rodfluid {

/// Rate matrix Q with off-diagonal rows stored sparsely and the diagonal set
/// to minus the exit rate, so every row sums to zero up to rounding.
class GeneratorMatrix {
 public:
  struct Entry {
    std::size_t to;
    double rate;
  };

  GeneratorMatrix() = default;
  explicit GeneratorMatrix(std::size_t n) : rows_(n), diag_(n, 0.0) {}

  std::size_t size() const { return rows_.size(); }

  /// Accumulate rate on the transition from -> to (from != to).
  void add_rate(std::size_t from, std::size_t to, double rate) {
    if (from == to) throw std::invalid_argument("GeneratorMatrix: diagonal rates are implied");
    if (rate < 0) throw std::invalid_argument("GeneratorMatrix: negative rate");
    if (rate == 0) return;
    auto& row = rows_[from];
    auto it = std::find_if(row.begin(), row.end(), [to](const Entry& e) { return e.to == to; });
    if (it == row.end())
      row.push_back({to, rate});
    else
      it->rate += rate;
    diag_[from] -= rate;
  }

  const std::vector<Entry>& row(std::size_t i) const { return rows_[i]; }
  double diagonal(std::size_t i) const { return diag_[i]; }
  double exit_rate(std::size_t i) const { return -diag_[i]; }

  double rate(std::size_t from, std::size_t to) const {
    if (from == to) return diag_[from];
    for (const auto& e : rows_[from])
      if (e.to == to) return e.rate;
    return 0.0;
  }

  /// max_s |sum_j Q(s, j)|.
  double max_row_sum() const {
    double worst = 0;
    for (std::size_t i = 0; i < size(); ++i) {
      double s = diag_[i];
      for (const auto& e : rows_[i]) s += e.rate;
      worst = std::max(worst, std::abs(s));
    }
    return worst;
  }

  /// Row vector times Q.
  std::vector<double> left_multiply(const std::vector<double>& v) const {
    std::vector<double> out(size(), 0.0);
    for (std::size_t i = 0; i < size(); ++i) {
      if (v[i] == 0) continue;
      out[i] += v[i] * diag_[i];
      for (const auto& e : rows_[i]) out[e.to] += v[i] * e.rate;
    }
    return out;
  }

 private:
  std::vector<std::vector<Entry>> rows_;
  std::vector<double> diag_;
};

/// max over transitions of |mu(s) Q(s,s') - mu(s') Q(s',s)|.
inline double check_detailed_balance(const GeneratorMatrix& Q, const std::vector<double>& mu) {
  if (mu.size() != Q.size()) throw std::invalid_argument("check_detailed_balance: size mismatch");
  double worst = 0;
  for (std::size_t s = 0; s < Q.size(); ++s) {
    for (const auto& e : Q.row(s)) {
      const double forward = mu[s] * e.rate;
      const double backward = mu[e.to] * Q.rate(e.to, s);
      worst = std::max(worst, std::abs(forward - backward));
    }
  }
  return worst;
}

/// ||mu^T Q||_inf; zero exactly when mu is stationary.
inline double stationarity_residual(const GeneratorMatrix& Q, const std::vector<double>& mu) {
  double worst = 0;
  for (double v : Q.left_multiply(mu)) worst = std::max(worst, std::abs(v));
  return worst;
}

/// Law at time t of the chain started from `initial`, i.e. initial * exp(tQ).
///
/// Uniformization with rate L = max exit rate: exp(tQ) = sum_k Pois(k; Lt) P^k
/// with P = I + Q/L. Long horizons are split into pieces with L*dt <= 32 so the
/// Poisson weights never underflow; each piece truncates its Poisson series
/// once the remaining tail mass is below tol / pieces.
inline std::vector<double> transient_law(const GeneratorMatrix& Q, std::vector<double> initial, double t,
                                         double tol = 1e-13) {
  if (initial.size() != Q.size()) throw std::invalid_argument("transient_law: size mismatch");
  if (t < 0) throw std::invalid_argument("transient_law: t < 0");
  double lambda = 0;
  for (std::size_t i = 0; i < Q.size(); ++i) lambda = std::max(lambda, Q.exit_rate(i));
  if (t == 0 || lambda == 0) return initial;

  const auto pieces = static_cast<std::size_t>(std::ceil(lambda * t / 32.0));
  const double h = t / static_cast<double>(pieces);
  const double mean = lambda * h;
  const double piece_tol = tol / static_cast<double>(pieces);

  std::vector<double> v = std::move(initial);
  for (std::size_t piece = 0; piece < pieces; ++piece) {
    std::vector<double> term = v;  // v P^k
    double w = std::exp(-mean);
    std::vector<double> acc(term.size());
    for (std::size_t i = 0; i < term.size(); ++i) acc[i] = w * term[i];
    for (std::size_t k = 1;; ++k) {
      // Tail after index k-1 is at most w_{k-1} * mean / (k - mean) once k > mean.
      if (static_cast<double>(k) > mean + 1 && w * mean / (static_cast<double>(k) - mean) < piece_tol) break;
      auto qv = Q.left_multiply(term);
      for (std::size_t i = 0; i < term.size(); ++i) term[i] += qv[i] / lambda;
      w *= mean / static_cast<double>(k);
      for (std::size_t i = 0; i < term.size(); ++i) acc[i] += w * term[i];
    }
    v = std::move(acc);
  }
  return v;
}

}  // namespace rodfluid
