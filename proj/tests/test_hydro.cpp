#include <gtest/gtest.h>

#include <cmath>

#include "rodfluid/hydro.hpp"
#include "rodfluid/limit_rw.hpp"
#include "rodfluid/stats.hpp"

using namespace rodfluid;

namespace {

/// The displayed four-term equation written out literally, dropping every
/// term that references a height outside the window.
std::vector<double> literal_rhs(const std::vector<double>& r, const Params& P) {
  const std::size_t n = r.size();
  std::vector<double> d(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const bool has_up = i + 1 < n, has_down = i > 0;
    if (has_up) d[i] += -P.p * r[i] * (1 - r[i + 1]) + P.q * r[i + 1] * (1 - r[i]);
    if (has_down) d[i] += -P.q * r[i] * (1 - r[i - 1]) + P.p * r[i - 1] * (1 - r[i]);
  }
  return d;
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST(BurgersRhs, ConstantFieldsAreStill) {
  Params p;
  for (double c : {0.0, 1.0}) {
    auto d = burgers_rhs(std::vector<double>(21, c), p);
    for (double v : d) EXPECT_EQ(v, 0.0);
  }
}

TEST(BurgersRhs, EquilibriumProfileIsStill) {
  Params p;
  p.kappa = 1.7;
  auto d = burgers_rhs(equilibrium_field(p, -12, 12), p);
  for (double v : d) EXPECT_LT(std::abs(v), 1e-12);
}

TEST(BurgersRhs, MatchesLiteralEquation) {
  Rng rng(1);
  for (int k = 0; k < 100; ++k) {
    Params p;
    p.p = 0.1 + 0.5 * rng.uniform();
    p.q = p.p + 0.1 + rng.uniform();
    std::vector<double> r(1 + rng.below(30));
    for (double& v : r) v = rng.uniform();
    EXPECT_LT(sup_diff(burgers_rhs(r, p), literal_rhs(r, p)), 1e-15);
  }
}

TEST(Integrate, EquilibriumIsFixedPoint) {
  Params p;
  auto f0 = equilibrium_field(p, -10, 10);
  auto tr = integrate(f0, 10.0, 0.05, p);
  EXPECT_LT(sup_diff(tr.back().rho, f0.rho), 1e-8);
  EXPECT_DOUBLE_EQ(tr.end_time(), 10.0);
}

TEST(Integrate, RiemannDatumConservesMassAndRelaxes) {
  Params p;
  auto f0 = riemann_field(-15, 15, 0.8, 0.1);
  const double T = 10;
  auto tr = integrate(f0, T, 0.05, p, 5);
  for (const auto& f : tr.frames) {
    EXPECT_LT(std::abs(f.mass() - f0.mass()), 1e-10 * std::max(1.0, f.time));
    for (double v : f.rho) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
  // With p < q the front stays monotone decreasing in height and smooths out.
  const auto& last = tr.back().rho;
  for (std::size_t i = 1; i < last.size(); ++i) EXPECT_LE(last[i], last[i - 1] + 1e-12);
  EXPECT_LT(last[15] - last[16], 0.7);
}

TEST(Integrate, FourthOrderConvergence) {
  Params p;
  auto f0 = riemann_field(-10, 10, 0.8, 0.1);
  const double T = 2, dt = 0.07;
  const auto ref = integrate(f0, T, dt / 8, p).back().rho;
  const double e1 = sup_diff(integrate(f0, T, dt, p).back().rho, ref);
  const double e2 = sup_diff(integrate(f0, T, dt / 2, p).back().rho, ref);
  const double ratio = e1 / e2;
  EXPECT_GT(ratio, 12.0) << e1 << " " << e2;
  EXPECT_LT(ratio, 20.0) << e1 << " " << e2;
}

TEST(Integrate, RejectsLargeStep) {
  Params p;
  EXPECT_THROW(integrate(riemann_field(-3, 3, 0.8, 0.1), 1.0, 0.2 / (p.p + p.q), p), ParameterError);
  EXPECT_THROW(integrate(riemann_field(-3, 3, 0.8, 0.1), -1.0, 0.01, p), ParameterError);
}

TEST(Integrate, OutOfRangeDataAbortsWithDiagnostic) {
  Params p;
  DensityField f{-2, {0.5, 1.2, 0.5, 0.5, 0.5}, 0};
  try {
    integrate(f, 1.0, 0.01, p);
    FAIL() << "accepted density outside [0,1]";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("height="), std::string::npos);
  }
}

TEST(DensityTrajectory, InterpolatesAndReportsOutside) {
  Params p;
  auto tr = integrate(riemann_field(-3, 3, 0.8, 0.1), 1.0, 0.05, p);
  EXPECT_TRUE(std::isnan(tr.rho(10, 0.5)));
  EXPECT_DOUBLE_EQ(tr.rho(0, 0.0), 0.8);
  EXPECT_DOUBLE_EQ(tr.rho(0, 1.0), tr.back().at(0));
}

TEST(InhomogeneousWalk, StaticEquilibriumMatchesLimitWalk) {
  Params p;
  const int vmin = -30, vmax = 30;
  auto field = integrate(equilibrium_field(p, vmin, vmax), 1.0, 0.05, p);
  const int n = 100000;
  EmpiricalLaw a, b;
  for (int r = 0; r < n; ++r) {
    Rng r1(replica_seed(1, 0, static_cast<std::uint64_t>(r)));
    a.add(inhomogeneous_rod_walk(0, 1.0, field, p, r1).final_y());
    Rng r2(replica_seed(1, 1, static_cast<std::uint64_t>(r)));
    b.add(simulate_rw(0, 1.0, p, r2).final_y());
  }
  EXPECT_LT(tv_distance(a.probabilities(), b.probabilities()), 0.02);
}

TEST(InhomogeneousWalk, EmptyFluidIsFreeWalk) {
  Params p;
  p.a = 0.5;
  auto field = integrate(riemann_field(-200, 200, 0.0, 0.0), 10.0, 0.05, p);
  const int n = 20000;
  double s = 0;
  TrialStats stats;
  for (int r = 0; r < n; ++r) {
    Rng rng(replica_seed(2, 0, static_cast<std::uint64_t>(r)));
    s += inhomogeneous_rod_walk(0, 10.0, field, p, rng, &stats).final_y();
  }
  EXPECT_NEAR(s / n, (p.a - p.b) * 10, 3 * std::sqrt((p.a + p.b) * 10 / n));
  for (const auto& [y, c] : stats) {
    EXPECT_EQ(c.up_attempts, c.up_successes);
    EXPECT_EQ(c.down_attempts, c.down_successes);
  }
}

TEST(InhomogeneousWalk, ConstantDensityScalesRates) {
  Params p;
  p.a = 0.6;
  p.N = 3;
  const double c = 0.3;
  auto field = integrate(riemann_field(-200, 200, c, c), 10.0, 0.05, p);
  const int n = 20000;
  double s = 0;
  for (int r = 0; r < n; ++r) {
    Rng rng(replica_seed(3, 0, static_cast<std::uint64_t>(r)));
    s += inhomogeneous_rod_walk(0, 10.0, field, p, rng).final_y();
  }
  const double f = std::pow(1 - c, p.N);
  EXPECT_NEAR(s / n, (p.a - p.b) * f * 10, 3 * std::sqrt((p.a + p.b) * f * 10 / n));
}

TEST(InhomogeneousWalk, AcceptanceMatchesVacancyPower) {
  Params p;
  auto field = integrate(equilibrium_field(p, -20, 20), 5.0, 0.05, p);
  TrialStats stats;
  for (int r = 0; r < 20000; ++r) {
    Rng rng(replica_seed(4, 0, static_cast<std::uint64_t>(r)));
    inhomogeneous_rod_walk(0, 5.0, field, p, rng, &stats);
  }
  int checked = 0;
  for (const auto& [y, c] : stats) {
    if (c.up_attempts < 1000 || c.down_attempts < 1000) continue;
    const double pu = std::pow(1 - density_profile(p, y + 1), p.N);
    const double pd = std::pow(1 - density_profile(p, y - 1), p.N);
    const double nu = static_cast<double>(c.up_attempts), nd = static_cast<double>(c.down_attempts);
    EXPECT_NEAR(c.up_successes / nu, pu, 3 * std::sqrt(pu * (1 - pu) / nu)) << "y " << y;
    EXPECT_NEAR(c.down_successes / nd, pd, 3 * std::sqrt(pd * (1 - pd) / nd)) << "y " << y;
    ++checked;
  }
  EXPECT_GE(checked, 3);
}

TEST(InhomogeneousWalk, FieldMustCoverHorizon) {
  Params p;
  auto field = integrate(equilibrium_field(p, -5, 5), 1.0, 0.05, p);
  Rng rng(1);
  EXPECT_THROW(inhomogeneous_rod_walk(0, 2.0, field, p, rng), ParameterError);
}
