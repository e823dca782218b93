#pragma once

// Ensemble experiments. Replica r of stream k always draws from
// Rng(replica_seed(cfg.seed, k, r)), so results depend only on the config.

#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rodfluid/config.hpp"
#include "rodfluid/coupling.hpp"
#include "rodfluid/ctmc.hpp"
#include "rodfluid/hydro.hpp"
#include "rodfluid/io.hpp"
#include "rodfluid/kinetics.hpp"
#include "rodfluid/limit_rw.hpp"
#include "rodfluid/parallel.hpp"
#include "rodfluid/random.hpp"
#include "rodfluid/stats.hpp"

namespace rodfluid {

// Stream numbers reserved for auxiliary randomness.
inline constexpr std::uint64_t kBootstrapStream = 1u << 20;
inline constexpr std::uint64_t kStirredStream = 1u << 16;

/// Law at each observation time of the limit walk started at y0, on the
/// walk truncated to the box heights.
inline std::vector<std::map<int, double>> reference_rod_laws(const Params& params, const LatticeGeometry& geom, int y0,
                                                             const std::vector<double>& times) {
  const auto Q = rw_generator(params, geom.vmin, geom.vmax);
  std::vector<double> law(Q.size(), 0.0);
  law[static_cast<std::size_t>(y0 - geom.vmin)] = 1.0;
  std::vector<std::map<int, double>> out;
  double t_prev = 0;
  for (double t : times) {
    law = transient_law(Q, law, t - t_prev);
    t_prev = t;
    std::map<int, double> m;
    for (std::size_t i = 0; i < law.size(); ++i)
      if (law[i] > 0) m[geom.vmin + static_cast<int>(i)] = law[i];
    out.push_back(std::move(m));
  }
  return out;
}

/// Rod height at each observation time over `replicas` runs of the full
/// system started from the conditioned product measure with the rod at y0.
inline std::vector<EmpiricalLaw> rod_ensemble(const Params& params, const LatticeGeometry& geom, int y0,
                                              const std::vector<double>& times, long replicas, std::uint64_t seed,
                                              std::uint64_t stream, const KineticsOptions& opts = {}) {
  auto heights = run_replicas(static_cast<std::size_t>(replicas), [&](std::size_t r) {
    Rng rng(replica_seed(seed, stream, r));
    Simulator sim(sample_initial(geom, params, y0, rng), params, opts);
    std::vector<int> h;
    h.reserve(times.size());
    for (double t : times) {
      sim.advance_to(t, rng);
      h.push_back(sim.state().rod_y());
    }
    return h;
  });
  std::vector<EmpiricalLaw> laws(times.size());
  for (const auto& h : heights)
    for (std::size_t i = 0; i < h.size(); ++i) laws[i].add(h[i]);
  return laws;
}

// ---------------------------------------------------------------- convergence

struct ConvergenceRow {
  std::string mode;  ///< "exact" or "stirred"
  double gamma1 = 0;
  double t = 0;
  TvEstimate tv;
  long replicas = 0;
  EmpiricalLaw law;
};

struct ConvergenceResult {
  std::vector<std::map<int, double>> reference;  ///< per observation time
  std::vector<ConvergenceRow> rows;
};

/// TV between the simulated rod law and the limit-walk law, per gamma1 in the
/// sweep and per observation time, starting from the product measure with the
/// rod at height 0. With include_stirred, one more row group is added for the
/// infinitely fast stirring surrogate.
inline ConvergenceResult experiment_convergence(const ExperimentConfig& cfg) {
  cfg.validate();
  ConvergenceResult res;
  res.reference = reference_rod_laws(cfg.params, cfg.geom, 0, cfg.times);
  auto run_group = [&](const std::string& mode, double gamma1, std::uint64_t stream) {
    Params params = cfg.params;
    if (std::isfinite(gamma1)) params.gamma1 = gamma1;  // the stirred surrogate ignores gamma1
    KineticsOptions opts;
    opts.mode = mode == "stirred" ? Mode::stirred : Mode::exact;
    auto laws = rod_ensemble(params, cfg.geom, 0, cfg.times, cfg.replicas, cfg.seed, stream, opts);
    for (std::size_t i = 0; i < cfg.times.size(); ++i) {
      ConvergenceRow row;
      row.mode = mode;
      row.gamma1 = gamma1;
      row.t = cfg.times[i];
      row.tv = tv_with_bootstrap(laws[i], res.reference[i], cfg.bootstrap,
                                 replica_seed(cfg.seed, kBootstrapStream + stream, i));
      row.replicas = cfg.replicas;
      row.law = std::move(laws[i]);
      res.rows.push_back(std::move(row));
    }
  };
  for (std::size_t k = 0; k < cfg.gamma1_sweep.size(); ++k) run_group("exact", cfg.gamma1_sweep[k], k);
  if (cfg.include_stirred) run_group("stirred", std::numeric_limits<double>::infinity(), kStirredStream);
  return res;
}

// ----------------------------------------------------------------- stationary

struct StationaryResult {
  RWLaw law;
  std::map<int, double> occupation;
  double tv = 0;
  double mean_empirical = 0;
  double mean_law = 0;
  double log_n_over_beta = 0;
  double continuous_mean = 0;
  int histogram_mode = 0;
  double modus = 0;
  long events = 0;
};

/// Time-averaged occupation of one long limit-walk run against its reversible law.
inline StationaryResult experiment_stationary(const ExperimentConfig& cfg) {
  const auto& params = cfg.params;
  require_normalizable(params);
  if (cfg.events < 1) throw ParameterError("events", "events >= 1");
  StationaryResult res;
  res.events = cfg.events;
  res.law = stationary_measure(params);
  Rng rng(replica_seed(cfg.seed, 0, 0));
  res.occupation = rw_occupation(cfg.y0, cfg.events, params, rng);
  res.tv = tv_distance(res.occupation, res.law.as_map());
  double best = -1;
  for (const auto& [y, w] : res.occupation) {
    res.mean_empirical += y * w;
    if (w > best) {
      best = w;
      res.histogram_mode = y;
    }
  }
  res.mean_law = res.law.mean();
  res.log_n_over_beta = std::log(static_cast<double>(params.N)) / params.beta();
  res.continuous_mean = continuous_mean(params.alpha(), params.beta(), params.N);
  res.modus = modus(params);
  return res;
}

// ----------------------------------------------------------------- archimedes

struct ArchimedesRow {
  double N = 0;
  double kappa = 0;
  double mean = 0;         ///< continuous_mean(alpha, beta, N)
  double rho_at_mean = 0;  ///< density_profile at the mean height
  double product = 0;      ///< rho_at_mean * N
  double identity_lhs = 0; ///< rho((1/beta) log N)
  double identity_rhs = 0; ///< (kappa/N) / (1 + kappa/N)
};

/// Density at the continuous mean height, times N, over the N and kappa sweeps.
inline std::vector<ArchimedesRow> experiment_archimedes(const ExperimentConfig& cfg) {
  std::vector<ArchimedesRow> rows;
  for (double kappa : cfg.kappa_sweep) {
    for (double n : cfg.N_sweep) {
      Params params = cfg.params;
      params.kappa = kappa;
      params.N = static_cast<int>(n);
      params.validate();
      ArchimedesRow row;
      row.N = n;
      row.kappa = kappa;
      row.mean = continuous_mean(params.alpha(), params.beta(), n);
      row.rho_at_mean = density_profile(params, row.mean);
      row.product = row.rho_at_mean * n;
      row.identity_lhs = density_profile(params, std::log(n) / params.beta());
      row.identity_rhs = (kappa / n) / (1 + kappa / n);
      rows.push_back(row);
    }
  }
  return rows;
}

// -------------------------------------------------------------------- burgers

struct BurgersResult {
  DensityTrajectory field;
  std::vector<double> mean_height;  ///< per recorded frame
  TrialStats trials;
};

/// Step initial profile relaxed by the Burgers flow, with an ensemble of rods
/// walking in the evolving fluid.
inline BurgersResult experiment_burgers(const ExperimentConfig& cfg) {
  cfg.params.validate();
  cfg.geom.validate_shape();
  BurgersResult res;
  res.field = integrate(riemann_field(cfg.geom.vmin, cfg.geom.vmax, cfg.rho_below, cfg.rho_above), cfg.T, cfg.dt,
                        cfg.params, cfg.record_every);
  std::vector<double> frame_times;
  for (const auto& f : res.field.frames) frame_times.push_back(f.time);
  auto runs = run_replicas(static_cast<std::size_t>(cfg.replicas), [&](std::size_t r) {
    Rng rng(replica_seed(cfg.seed, 0, r));
    TrialStats stats;
    auto traj = inhomogeneous_rod_walk(cfg.y0, cfg.T, res.field, cfg.params, rng, &stats);
    std::vector<int> h;
    for (double t : frame_times) h.push_back(traj.height_at(t));
    return std::make_pair(std::move(h), std::move(stats));
  });
  res.mean_height.assign(frame_times.size(), 0.0);
  for (const auto& [h, stats] : runs) {
    for (std::size_t i = 0; i < h.size(); ++i) res.mean_height[i] += h[i];
    for (const auto& [y, c] : stats) {
      auto& d = res.trials[y];
      d.up_attempts += c.up_attempts;
      d.up_successes += c.up_successes;
      d.down_attempts += c.down_attempts;
      d.down_successes += c.down_successes;
    }
  }
  for (double& m : res.mean_height) m /= static_cast<double>(cfg.replicas);
  return res;
}

// --------------------------------------------------------------------- return

struct ReturnResult {
  std::vector<ReturnScanRow> rows;
  double slope = 0;
};

/// Return probability of a single second-class particle at time T per gamma1.
inline ReturnResult experiment_return(const ExperimentConfig& cfg) {
  cfg.validate();
  ReturnResult res;
  res.rows = return_probability_scan(cfg.gamma1_sweep, cfg.T, cfg.params, cfg.geom, cfg.replicas, cfg.seed,
                                     {cfg.start_x, cfg.start_y});
  res.slope = loglog_slope(res.rows);
  return res;
}

// -------------------------------------------------------------------- writers

inline std::string law_csv_header() { return "mode,gamma1,t,y,empirical,stderr,reference\n"; }

inline nlohmann::json write_convergence(const ConvergenceResult& res, OutputSet& out) {
  std::string table = "mode,gamma1,t,tv,tv_lo,tv_hi,replicas\n";
  std::string laws = law_csv_header();
  auto summary = nlohmann::json::array();
  std::size_t ntimes = res.reference.size();
  for (std::size_t i = 0; i < res.rows.size(); ++i) {
    const auto& r = res.rows[i];
    const auto& ref = res.reference[i % ntimes];
    table += r.mode + "," + format_number(r.gamma1) + "," + format_number(r.t) + "," + format_number(r.tv.tv) + "," +
             format_number(r.tv.lo) + "," + format_number(r.tv.hi) + "," + std::to_string(r.replicas) + "\n";
    std::map<int, double> support = ref;
    for (const auto& [y, c] : r.law.counts()) support.emplace(y, 0.0);
    for (const auto& [y, unused] : support) {
      (void)unused;
      auto it = ref.find(y);
      laws += r.mode + "," + format_number(r.gamma1) + "," + format_number(r.t) + "," + std::to_string(y) + "," +
              format_number(r.law.prob(y)) + "," + format_number(r.law.std_error(y)) + "," +
              format_number(it == ref.end() ? 0.0 : it->second) + "\n";
    }
    summary.push_back({{"mode", r.mode}, {"gamma1", json_number(r.gamma1)}, {"t", r.t}, {"tv", r.tv.tv},
                       {"tv_lo", r.tv.lo}, {"tv_hi", r.tv.hi}});
  }
  out.write("convergence.csv", table);
  out.write("laws.csv", laws);
  return summary;
}

inline nlohmann::json write_stationary(const StationaryResult& res, OutputSet& out) {
  std::string csv = "y,occupation,m\n";
  std::map<int, double> support = res.law.as_map();
  for (const auto& [y, w] : res.occupation) support.emplace(y, 0.0);
  for (const auto& [y, unused] : support) {
    (void)unused;
    auto it = res.occupation.find(y);
    csv += std::to_string(y) + "," + format_number(it == res.occupation.end() ? 0.0 : it->second) + "," +
           format_number(res.law.prob(y)) + "\n";
  }
  out.write("stationary.csv", csv);
  return {{"tv", res.tv},
          {"mean_empirical", res.mean_empirical},
          {"mean_law", res.mean_law},
          {"log_N_over_beta", res.log_n_over_beta},
          {"continuous_mean", res.continuous_mean},
          {"histogram_mode", res.histogram_mode},
          {"modus", res.modus},
          {"events", res.events}};
}

inline nlohmann::json write_archimedes(const std::vector<ArchimedesRow>& rows, OutputSet& out) {
  std::string csv = "N,kappa,mean,rho_at_mean,rho_times_N,identity_lhs,identity_rhs\n";
  auto summary = nlohmann::json::array();
  for (const auto& r : rows) {
    csv += format_number(r.N) + "," + format_number(r.kappa) + "," + format_number(r.mean) + "," +
           format_number(r.rho_at_mean) + "," + format_number(r.product) + "," + format_number(r.identity_lhs) + "," +
           format_number(r.identity_rhs) + "\n";
    summary.push_back({{"N", r.N}, {"kappa", r.kappa}, {"rho_times_N", r.product}});
  }
  out.write("archimedes.csv", csv);
  return summary;
}

inline nlohmann::json write_burgers(const BurgersResult& res, OutputSet& out) {
  std::string field = "t,y,rho\n";
  std::string rod = "t,mean_rod_y\n";
  for (std::size_t k = 0; k < res.field.frames.size(); ++k) {
    const auto& f = res.field.frames[k];
    for (int y = f.vmin; y <= f.vmax(); ++y)
      field += format_number(f.time) + "," + std::to_string(y) + "," + format_number(f.at(y)) + "\n";
    rod += format_number(f.time) + "," + format_number(res.mean_height[k]) + "\n";
  }
  out.write("burgers_field.csv", field);
  out.write("rod_mean.csv", rod);
  out.write("trials.csv", trial_stats_csv(res.trials));
  const auto& f0 = res.field.frames.front();
  const auto& f1 = res.field.back();
  return {{"frames", res.field.frames.size()}, {"mass_drift", f1.mass() - f0.mass()},
          {"final_mean_rod_y", res.mean_height.back()}};
}

inline nlohmann::json write_return(const ReturnResult& res, OutputSet& out) {
  std::string csv = "gamma1,t,return_prob,stderr\n";
  for (const auto& r : res.rows)
    csv += format_number(r.gamma1) + "," + format_number(r.t) + "," + format_number(r.return_prob) + "," +
           format_number(r.std_error) + "\n";
  out.write("return_scan.csv", csv);
  return {{"loglog_slope", json_number(res.slope)}};
}

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"convergence", "stationary", "archimedes", "burgers", "return"};
  return names;
}

/// Run a named experiment and write its data files and manifest into
/// cfg.out_dir. Returns the manifest summary.
inline nlohmann::json run_experiment(const std::string& name, const ExperimentConfig& cfg) {
  nlohmann::json summary;
  OutputSet out(cfg.out_dir);
  if (name == "convergence") summary = write_convergence(experiment_convergence(cfg), out);
  else if (name == "stationary") summary = write_stationary(experiment_stationary(cfg), out);
  else if (name == "archimedes") summary = write_archimedes(experiment_archimedes(cfg), out);
  else if (name == "burgers") summary = write_burgers(experiment_burgers(cfg), out);
  else if (name == "return") summary = write_return(experiment_return(cfg), out);
  else throw ParameterError("experiment", "one of convergence, stationary, archimedes, burgers, return");
  out.write_manifest(cfg, "experiment " + name, summary);
  return summary;
}

}  // namespace rodfluid
