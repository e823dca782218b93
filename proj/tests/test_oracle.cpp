#include <gtest/gtest.h>

#include <cmath>

#include "rodfluid/experiments.hpp"
#include "rodfluid/oracle.hpp"

using namespace rodfluid;

namespace {

OracleOptions fixed_rod(int y) {
  OracleOptions s;
  s.mode = ChainMode::monomer_only;
  s.rod_y = y;
  return s;
}

double max_row_sum_abs(const GeneratorMatrix& Q) {
  double m = 0;
  for (std::size_t i = 0; i < Q.size(); ++i) {
    double s = Q.diagonal(i);
    for (std::size_t j = 0; j < Q.size(); ++j)
      if (j != i) s += Q.rate(i, j);
    m = std::max(m, std::abs(s));
  }
  return m;
}

}  // namespace

TEST(Oracle, TwoSitesOneRowByHand) {
  // Rod parked outside a 2x1 box: the only move is a swap across the single
  // horizontal edge at rate gamma1/2.
  LatticeGeometry g{2, 0, 0};
  Params p;
  p.gamma1 = 3.0;
  StateIndex idx(g, 2, fixed_rod(5));
  ASSERT_EQ(idx.size(), 4u);
  auto Q = build_generator(idx, p);
  const auto lone_left = *idx.find({5, idx.bit(0, 0)});
  const auto lone_right = *idx.find({5, idx.bit(1, 0)});
  EXPECT_DOUBLE_EQ(Q.rate(lone_left, lone_right), 1.5);
  EXPECT_DOUBLE_EQ(Q.rate(lone_right, lone_left), 1.5);
  EXPECT_DOUBLE_EQ(Q.exit_rate(*idx.find({5, 0})), 0.0);
  EXPECT_DOUBLE_EQ(Q.exit_rate(*idx.find({5, idx.full_mask()})), 0.0);
}

TEST(Oracle, EmptyFluidRodIsBirthDeath) {
  LatticeGeometry g{2, -1, 1};
  Params p;
  p.a = 0.3;
  p.b = 0.9;
  OracleOptions s;
  s.particles = 0;
  StateIndex idx(g, 2, s);
  ASSERT_EQ(idx.size(), 3u);
  auto Q = build_generator(idx, p);
  EXPECT_DOUBLE_EQ(Q.rate(*idx.find({-1, 0}), *idx.find({0, 0})), 0.3);
  EXPECT_DOUBLE_EQ(Q.rate(*idx.find({0, 0}), *idx.find({-1, 0})), 0.9);
  EXPECT_DOUBLE_EQ(Q.exit_rate(*idx.find({1, 0})), 0.9);
  EXPECT_DOUBLE_EQ(Q.exit_rate(*idx.find({-1, 0})), 0.3);
}

TEST(Oracle, RowsSumToZero) {
  Params p;
  p.kappa = 0.7;
  for (auto opts : {fixed_rod(0), OracleOptions{}}) {
    StateIndex idx(LatticeGeometry{3, -1, 1}, 2, opts);
    EXPECT_LT(max_row_sum_abs(build_generator(idx, p)), 1e-14);
  }
}

TEST(Oracle, ProductMeasureIsReversibleForFixedRod) {
  LatticeGeometry g{3, -2, 1};
  Rng rng(5);
  for (int k = 0; k < 10; ++k) {
    Params p;
    p.p = 0.05 + 0.5 * rng.uniform();
    p.q = p.p + 0.1 + rng.uniform();
    p.gamma1 = std::exp(3 * rng.uniform() - 1);
    p.gamma2 = std::exp(3 * rng.uniform() - 1);
    p.kappa = std::exp(2 * rng.uniform() - 1);
    const int rod = -2 + static_cast<int>(rng.below(4));
    StateIndex idx(g, 2, fixed_rod(rod));
    auto Q = build_generator(idx, p);
    auto mu = product_weights(idx, p);
    EXPECT_LT(check_detailed_balance(Q, mu), 1e-12);
    EXPECT_LT(stationarity_residual(Q, mu), 1e-12);
  }
}

TEST(Oracle, PerturbedMeasureFailsDetailedBalance) {
  LatticeGeometry g{3, -2, 1};
  Params p;
  StateIndex idx(g, 2, fixed_rod(0));
  auto Q = build_generator(idx, p);
  auto mu = product_weights(idx, p, std::make_pair(Site{2, 1}, 1.1));
  EXPECT_GT(check_detailed_balance(Q, mu), 1e-3);
}

TEST(Oracle, UniformLawForSymmetricWalk) {
  GeneratorMatrix Q(5);
  for (std::size_t i = 0; i + 1 < 5; ++i) {
    Q.add_rate(i, i + 1, 0.8);
    Q.add_rate(i + 1, i, 0.8);
  }
  EXPECT_EQ(check_detailed_balance(Q, std::vector<double>(5, 0.2)), 0.0);
}

TEST(Oracle, SectorsAreReversibleSeparately) {
  LatticeGeometry g{3, -1, 1};
  Params p;
  p.kappa = 1.3;
  for (int n = 0; n <= 7; ++n) {
    OracleOptions s = fixed_rod(0);
    s.particles = n;
    StateIndex idx(g, 2, s);
    auto Q = build_generator(idx, p);
    EXPECT_LT(check_detailed_balance(Q, product_weights(idx, p)), 1e-12) << "sector " << n;
  }
}

TEST(Oracle, JointLawOfCoupledChainIsReversible) {
  LatticeGeometry g{3, -1, 1};
  Params p;
  p.a = 0.4;
  p.kappa = 0.8;
  StateIndex idx(g, 2, OracleOptions{});
  auto Q = build_generator(idx, p);
  auto mu = joint_weights(idx, p);
  EXPECT_LT(check_detailed_balance(Q, mu), 1e-12);
  EXPECT_LT(stationarity_residual(Q, mu), 1e-12);
}

TEST(TransientLaw, TimeZeroIsIdentity) {
  StateIndex idx(LatticeGeometry{2, -1, 1}, 2, OracleOptions{});
  auto Q = build_generator(idx, Params{});
  std::vector<double> init(idx.size(), 0.0);
  init[3] = 1;
  EXPECT_EQ(transient_law(Q, init, 0.0), init);
}

TEST(TransientLaw, TwoStateClosedForm) {
  const double a = 0.7, b = 2.3;
  GeneratorMatrix Q(2);
  Q.add_rate(0, 1, a);
  Q.add_rate(1, 0, b);
  for (double t : {0.01, 0.5, 3.0, 40.0}) {
    auto law = transient_law(Q, {1.0, 0.0}, t);
    const double p1 = a / (a + b) * (1 - std::exp(-(a + b) * t));
    EXPECT_NEAR(law[1], p1, 1e-10);
    EXPECT_NEAR(law[0], 1 - p1, 1e-10);
  }
}

TEST(TransientLaw, StaysAProbabilityVector) {
  Params p;
  p.a = 0.6;
  p.p = 0.5;
  StateIndex idx(LatticeGeometry{3, -2, 1}, 2, OracleOptions{});
  auto Q = build_generator(idx, p);
  auto init = conditioned_initial_law(idx, p, 0);
  double s0 = 0;
  for (double v : init) s0 += v;
  EXPECT_NEAR(s0, 1.0, 1e-12);
  for (double t : {0.3, 2.0, 25.0}) {
    auto law = transient_law(Q, init, t);
    double s = 0;
    for (double v : law) {
      EXPECT_GE(v, -1e-15);
      s += v;
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(TransientLaw, RelaxesToSectorEquilibrium) {
  // One particle-number sector around a fixed rod is irreducible, so any
  // start converges to the conditioned product law.
  Params p;
  p.p = 0.5;
  OracleOptions s = fixed_rod(0);
  s.particles = 3;
  StateIndex idx(LatticeGeometry{3, -2, 1}, 2, s);
  auto Q = build_generator(idx, p);
  std::vector<double> init(idx.size(), 0.0);
  init[0] = 1;
  auto far = transient_law(Q, init, 300.0);
  auto mu = product_weights(idx, p);
  double d = 0;
  for (std::size_t i = 0; i < mu.size(); ++i) d = std::max(d, std::abs(far[i] - mu[i]));
  EXPECT_LT(d, 1e-9);
}

TEST(Oracle, SimulatorMatchesExactRodMarginal) {
  LatticeGeometry g{3, -2, 1};
  Params p;
  p.p = 0.5;
  p.a = 0.6;
  const std::vector<double> times{0.5, 1.0, 2.0};
  StateIndex idx(g, p.N, OracleOptions{});
  auto Q = build_generator(idx, p);
  auto law = conditioned_initial_law(idx, p, 0);
  auto ens = rod_ensemble(p, g, 0, times, 40000, 17, 0);
  double t_prev = 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    law = transient_law(Q, law, times[k] - t_prev);
    t_prev = times[k];
    EXPECT_LT(tv_distance(ens[k].probabilities(), rod_marginal(idx, law)), 0.02) << "t " << times[k];
  }
}

TEST(Oracle, RejectsOversizedBoxes) {
  EXPECT_THROW(StateIndex(LatticeGeometry{8, -3, 2}, 2, OracleOptions{}), std::length_error);
  OracleOptions capped;
  capped.max_states = 10;
  EXPECT_THROW(StateIndex(LatticeGeometry{3, -1, 1}, 2, capped), std::length_error);
}
