#include <gtest/gtest.h>

#include <cmath>
#include <bit>
#include <map>

#include "rodfluid/kinetics.hpp"
#include "rodfluid/oracle.hpp"
#include "rodfluid/rate_index.hpp"

using namespace rodfluid;

namespace {

LatticeStateKey key_of(const FullState& s) {
  std::uint64_t mask = 0;
  for (std::size_t i = 0; i < s.geometry().size(); ++i)
    if (s.occupied(i)) mask |= std::uint64_t{1} << i;
  return {s.rod_y(), mask};
}

/// Total clock rate at state s in the oracle's terms: every Q transition plus
/// the rod clocks that ring without moving the rod.
double oracle_total_rate(const GeneratorMatrix& Q, const StateIndex& index, std::size_t s, const Params& p) {
  double rod_out = 0;
  for (const auto& e : Q.row(s))
    if (index.key(e.to).rod_y != index.key(s).rod_y) rod_out += e.rate;
  return Q.exit_rate(s) + (p.a + p.b - rod_out);
}

}  // namespace

TEST(RateIndex, SumsSamplesAndUpdates) {
  RateIndex idx;
  idx.resize(5);
  idx.assign([](std::size_t i) { return static_cast<double>(i); });
  EXPECT_DOUBLE_EQ(idx.total(), 10.0);
  idx.set(2, 0.0);
  EXPECT_DOUBLE_EQ(idx.total(), 8.0);
  Rng rng(1);
  std::vector<int> hits(5, 0);
  for (int k = 0; k < 80000; ++k) hits[idx.sample(rng.uniform() * idx.total())]++;
  EXPECT_EQ(hits[0], 0);
  EXPECT_EQ(hits[2], 0);
  for (int i : {1, 3, 4}) {
    const double pr = i / 8.0;
    EXPECT_NEAR(hits[static_cast<std::size_t>(i)], 80000 * pr, 3 * std::sqrt(80000 * pr * (1 - pr)));
  }
}

TEST(Kinetics, EmptyFluidOnlyRodTrialsAllSucceedInside) {
  LatticeGeometry g{4, -50, 50};
  Params p;
  FullState s(g, p.N, 0);
  Simulator sim(s, p);
  Rng rng(3);
  for (int k = 0; k < 2000; ++k) {
    auto ev = sim.step(rng);
    ASSERT_TRUE(ev.kind == EventKind::RodUpTrial || ev.kind == EventKind::RodDownTrial);
    if (std::abs(ev.site.y) < 50) EXPECT_TRUE(ev.succeeded);
  }
}

TEST(Kinetics, EmptyFluidRodIsFreeWalk) {
  LatticeGeometry g{4, -200, 200};
  Params p;
  p.a = 0.7;
  p.b = 1.3;
  const double T = 20;
  const int n = 4000;
  double sum = 0, sum2 = 0;
  for (int r = 0; r < n; ++r) {
    Rng rng(replica_seed(5, 0, static_cast<std::uint64_t>(r)));
    auto traj = simulate(FullState(g, p.N, 0), T, p, rng);
    sum += traj.final_y();
    sum2 += traj.final_y() * traj.final_y();
  }
  const double mean = sum / n;
  EXPECT_NEAR(mean, (p.a - p.b) * T, 3 * std::sqrt((p.a + p.b) * T / n));
  EXPECT_NEAR(sum2 / n - mean * mean, (p.a + p.b) * T, 0.1 * (p.a + p.b) * T);
}

TEST(Kinetics, PackedRowAboveBlocksEveryUpTrial) {
  LatticeGeometry g{6, -3, 3};
  Params p;
  p.gamma2 = 1e-9;  // keep the packed row in place
  // Rod on the floor of the box, so it can only try to go up.
  FullState s(g, p.N, -3);
  for (int x = 0; x < g.width; ++x) s.set(x, -2, true);
  Simulator sim(s, p);
  Rng rng(8);
  int ups = 0;
  for (int k = 0; k < 20000 && sim.state().rod_y() == -3; ++k) {
    auto ev = sim.step(rng);
    if (ev.kind == EventKind::RodUpTrial && ev.site.y == -3) {
      ++ups;
      EXPECT_FALSE(ev.succeeded);
    }
  }
  EXPECT_GT(ups, 0);
}

TEST(Kinetics, InvariantsHoldAfterEveryEvent) {
  Rng rng(99);
  for (int run = 0; run < 20; ++run) {
    LatticeGeometry g{static_cast<int>(3 + rng.below(8)), -static_cast<int>(1 + rng.below(4)),
                      static_cast<int>(1 + rng.below(4))};
    Params p;
    p.gamma1 = std::exp(4 * rng.uniform() - 1);
    p.gamma2 = std::exp(2 * rng.uniform() - 1);
    p.kappa = std::exp(2 * rng.uniform() - 1);
    p.N = static_cast<int>(2 + rng.below(static_cast<std::uint64_t>(g.width - 2)));
    Simulator sim(sample_initial(g, p, 0, rng), p);
    const long total = sim.state().total();
    double last_t = 0;
    for (int k = 0; k < 3000; ++k) {
      std::vector<int> rows;
      for (int y = g.vmin; y <= g.vmax; ++y) rows.push_back(sim.state().row_count(y));
      const int y_before = sim.state().rod_y();
      auto ev = sim.step(rng);
      ASSERT_GT(ev.time, last_t);
      last_t = ev.time;
      ASSERT_EQ(sim.state().total(), total);
      ASSERT_NO_THROW(sim.state().check());
      ASSERT_LE(std::abs(sim.state().rod_y() - y_before), 1);
      int changed = 0;
      for (int y = g.vmin; y <= g.vmax; ++y) changed += sim.state().row_count(y) != rows[static_cast<std::size_t>(y - g.vmin)];
      if (ev.kind == EventKind::HSwap) ASSERT_EQ(changed, 0);
      if (ev.kind == EventKind::VUp || ev.kind == EventKind::VDown) ASSERT_EQ(changed, 2);
      if (k % 500 == 0) ASSERT_TRUE(sim.index_consistent());
    }
    EXPECT_TRUE(sim.index_consistent());
  }
}

TEST(Kinetics, RodTrialSucceedsIffTargetRegionEmpty) {
  LatticeGeometry g{5, -2, 2};
  Params p;
  p.kappa = 2;
  Rng rng(12);
  Simulator sim(sample_initial(g, p, 0, rng), p);
  for (int k = 0; k < 20000; ++k) {
    const FullState before = sim.state();
    auto ev = sim.step(rng);
    if (ev.kind != EventKind::RodUpTrial && ev.kind != EventKind::RodDownTrial) continue;
    const int target = before.rod_y() + (ev.kind == EventKind::RodUpTrial ? 1 : -1);
    ASSERT_EQ(ev.succeeded, before.region_empty(target));
    if (!ev.succeeded) ASSERT_TRUE(sim.state() == before);
  }
}

TEST(Kinetics, ZeroHorizonKeepsOnlyInitialPoint) {
  Rng rng(1);
  auto traj = simulate(sample_initial(LatticeGeometry{}, Params{}, 0, rng), 0.0, Params{}, rng);
  ASSERT_EQ(traj.points.size(), 1u);
  EXPECT_EQ(traj.points[0].rod_y, 0);
  EXPECT_EQ(traj.end_time, 0.0);
}

TEST(Kinetics, SameSeedSameTrajectory) {
  auto run = [](Mode mode) {
    Rng rng(4242);
    KineticsOptions o;
    o.mode = mode;
    return simulate(sample_initial(LatticeGeometry{}, Params{}, 0, rng), 5.0, Params{}, rng, o, {1.0, 2.5});
  };
  for (Mode m : {Mode::exact, Mode::stirred}) {
    auto a = run(m), b = run(m);
    ASSERT_EQ(a.points.size(), b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) {
      EXPECT_EQ(a.points[i].time, b.points[i].time);
      EXPECT_EQ(a.points[i].rod_y, b.points[i].rod_y);
    }
    ASSERT_EQ(a.snapshots.size(), 2u);
    EXPECT_TRUE(a.snapshots[1].state == b.snapshots[1].state);
  }
}

TEST(Kinetics, TrajectoryStepsAreUnit) {
  Rng rng(21);
  auto traj = simulate(sample_initial(LatticeGeometry{}, Params{}, 0, rng), 20.0, Params{}, rng);
  for (std::size_t i = 1; i < traj.points.size(); ++i) {
    EXPECT_EQ(std::abs(traj.points[i].rod_y - traj.points[i - 1].rod_y), 1);
    EXPECT_GT(traj.points[i].time, traj.points[i - 1].time);
  }
}

// Embedded jump chain on a 3 x {-1,0,1} box against the generator written
// down by the oracle: pooled chi-square over frequent transitions and one 3σ
// check per transition type.
TEST(Kinetics, JumpChainMatchesOracleGenerator) {
  LatticeGeometry g{3, -1, 1};
  Params p;
  p.gamma1 = 1.7;
  p.gamma2 = 0.9;
  p.kappa = 1.3;
  StateIndex index(g, p.N, {ChainMode::coupled, 0, std::nullopt});
  const auto Q = build_generator(index, p);

  Rng rng(31337);
  Simulator sim(sample_initial(g, p, 0, rng), p);
  std::map<std::pair<std::size_t, std::size_t>, long> counts;
  std::vector<long> visits(index.size(), 0);
  for (long k = 0; k < 1'000'000; ++k) {
    const auto from = *index.find(key_of(sim.state()));
    sim.step(rng);
    const auto to = *index.find(key_of(sim.state()));
    ++visits[from];
    ++counts[{from, to}];
  }

  double chi2 = 0;
  int dof = 0;
  enum { kH, kV, kRod, kStay, kTypes };
  double obs[kTypes] = {}, expect[kTypes] = {}, var[kTypes] = {};
  for (std::size_t s = 0; s < index.size(); ++s) {
    if (!visits[s]) continue;
    const double n = static_cast<double>(visits[s]);
    const double total = oracle_total_rate(Q, index, s, p);
    double moved = 0;
    for (const auto& e : Q.row(s)) {
      const double pr = e.rate / total;
      moved += pr;
      const double c = static_cast<double>(counts[{s, e.to}]);
      const double mu = n * pr;
      if (mu >= 20) {
        chi2 += (c - mu) * (c - mu) / mu;
        ++dof;
      }
      int type = kV;
      if (index.key(e.to).rod_y != index.key(s).rod_y) {
        type = kRod;
      } else {
        // Both monomer moves flip two bits; a horizontal one stays in its row.
        const auto diff = index.key(s).mask ^ index.key(e.to).mask;
        const int lo = std::countr_zero(diff), hi = 63 - std::countl_zero(diff);
        if (g.site(static_cast<std::size_t>(lo)).y == g.site(static_cast<std::size_t>(hi)).y) type = kH;
      }
      obs[type] += c;
      expect[type] += mu;
      var[type] += mu * (1 - pr);
    }
    const double stay = 1 - moved;
    obs[kStay] += static_cast<double>(counts[{s, s}]);
    expect[kStay] += n * stay;
    var[kStay] += n * stay * (1 - stay);
  }
  ASSERT_GT(dof, 50);
  EXPECT_LT(chi2, dof + 3 * std::sqrt(2.0 * dof)) << "dof " << dof;
  for (int t = 0; t < kTypes; ++t) EXPECT_NEAR(obs[t], expect[t], 3 * std::sqrt(var[t])) << "type " << t;
}

TEST(Kinetics, HoldingTimeMeanIsInverseTotalRate) {
  LatticeGeometry g{3, -1, 1};
  Params p;
  p.gamma1 = 2.5;
  StateIndex index(g, p.N, {ChainMode::coupled, 0, std::nullopt});
  const auto Q = build_generator(index, p);
  Rng rng(4);
  const FullState s0 = sample_initial(g, p, 0, rng);
  const double total = oracle_total_rate(Q, index, *index.find(key_of(s0)), p);
  const Simulator proto(s0, p);
  EXPECT_NEAR(proto.total_rate(), total, 1e-12);
  const int n = 100000;
  double sum = 0;
  for (int k = 0; k < n; ++k) {
    Simulator sim = proto;
    sum += sim.step(rng).time;
  }
  EXPECT_NEAR(sum / n, 1 / total, 3 / total / std::sqrt(n));
}

TEST(Kinetics, UpTrialSuccessApproachesLimitRateAtLargeGamma1) {
  LatticeGeometry g{8, -4, 4};
  Params p;
  p.gamma1 = 100;
  const int replicas = 6000;
  long att = 0, succ = 0;
  for (int r = 0; r < replicas; ++r) {
    Rng rng(replica_seed(17, 0, static_cast<std::uint64_t>(r)));
    TrialStats stats;
    simulate(sample_initial(g, p, 0, rng), 2.0, p, rng, {}, {}, &stats);
    att += stats[0].up_attempts;
    succ += stats[0].up_successes;
  }
  const double target = std::pow(1 - density_profile(p, 1), p.N);
  const double freq = static_cast<double>(succ) / static_cast<double>(att);
  // Finite-width and finite-gamma1 corrections are a few parts in a hundred here.
  EXPECT_NEAR(freq, target, 0.02 + 3 * std::sqrt(target * (1 - target) / static_cast<double>(att)))
      << "attempts " << att;
}

TEST(Stirring, PreservesCountsAndLeavesTrivialRows) {
  LatticeGeometry g{6, -2, 2};
  Params p;
  Rng rng(6);
  FullState s = sample_initial(g, p, 0, rng);
  for (int x = 0; x < g.width; ++x) {
    s.set(x, 2, true);
    s.set(x, -2, false);
  }
  for (int k = 0; k < 100; ++k) {
    auto t = stirring_equilibrate(s, rng);
    ASSERT_NO_THROW(t.check());
    for (int y = g.vmin; y <= g.vmax; ++y) EXPECT_EQ(t.row_count(y), s.row_count(y));
    for (int x = 0; x < g.width; ++x) {
      EXPECT_TRUE(t.occupied(x, 2));
      EXPECT_FALSE(t.occupied(x, -2));
    }
  }
}

TEST(Stirring, UniformOverArrangements) {
  LatticeGeometry g{4, -1, 1};
  FullState s(g, 2, -1);
  s.set(0, 1, true);
  s.set(1, 1, true);
  Rng rng(10);
  std::map<int, long> hist;
  const int n = 60000;
  for (int k = 0; k < n; ++k) {
    stir_row(s, 1, rng);
    int code = 0;
    for (int x = 0; x < 4; ++x) code |= s.occupied(x, 1) << x;
    hist[code]++;
  }
  ASSERT_EQ(hist.size(), 6u);
  for (const auto& [code, c] : hist) EXPECT_NEAR(c, n / 6.0, 3 * std::sqrt(n / 6.0 * 5 / 6.0)) << code;
}

TEST(Stirring, SuccessIsHypergeometric) {
  // Vertical motion off: row counts never change, so every up trial from
  // height 0 sees k particles spread uniformly over the W sites of row 1.
  LatticeGeometry g{8, -2, 2};
  Params p;
  p.N = 3;
  p.a = 1;
  p.b = 1;
  const int k = 2;
  FullState s(g, p.N, 0);
  for (int x = 0; x < k; ++x) s.set(x + 4, 1, true);
  KineticsOptions o;
  o.mode = Mode::stirred;
  o.vertical = false;
  Simulator sim(s, p, o);
  Rng rng(55);
  for (int i = 0; i < 200000; ++i) sim.step(rng);
  const auto& c = sim.trial_stats().at(0);
  const double hyper = std::exp(std::lgamma(g.width - p.N + 1.0) - std::lgamma(g.width - p.N - k + 1.0) -
                                std::lgamma(g.width + 1.0) + std::lgamma(g.width - k + 1.0));
  const double n = static_cast<double>(c.up_attempts);
  EXPECT_NEAR(c.up_successes / n, hyper, 3 * std::sqrt(hyper * (1 - hyper) / n));
}

TEST(Stirring, BinomialAverageOfHypergeometricIsLimitRate) {
  // Averaging the hypergeometric success over Binomial(W, rho) row counts
  // gives exactly (1 - rho)^N: N given sites of an iid row are empty.
  for (int w : {4, 16, 64})
    for (double rho : {0.1, 0.5, 0.8}) {
      const int n = 3;
      double avg = 0;
      for (int k = 0; k <= w - n; ++k) {
        const double binom = std::exp(std::lgamma(w + 1.0) - std::lgamma(k + 1.0) - std::lgamma(w - k + 1.0) +
                                      k * std::log(rho) + (w - k) * std::log1p(-rho));
        const double hyper = std::exp(std::lgamma(w - n + 1.0) - std::lgamma(w - n - k + 1.0) -
                                      std::lgamma(w + 1.0) + std::lgamma(w - k + 1.0));
        avg += binom * hyper;
      }
      EXPECT_NEAR(avg, std::pow(1 - rho, n), 1e-12);
    }
}

TEST(Stirring, StirredModeKeepsInvariants) {
  LatticeGeometry g{8, -3, 3};
  Params p;
  KineticsOptions o;
  o.mode = Mode::stirred;
  Rng rng(71);
  Simulator sim(sample_initial(g, p, 0, rng), p, o);
  const long total = sim.state().total();
  for (int k = 0; k < 20000; ++k) {
    sim.step(rng);
    ASSERT_EQ(sim.state().total(), total);
    ASSERT_NO_THROW(sim.state().check());
  }
}
