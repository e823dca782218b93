#pragma once

// Command-line front end. Failures are reported on the error stream as a
// single JSON object {"error": kind, "message": ..., ["key", "constraint"]}.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rodfluid/config.hpp"
#include "rodfluid/coupling.hpp"
#include "rodfluid/experiments.hpp"
#include "rodfluid/io.hpp"
#include "rodfluid/kinetics.hpp"
#include "rodfluid/limit_rw.hpp"
#include "rodfluid/oracle.hpp"

namespace rodfluid {

struct CliOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> mode;
  std::string format = "csv";
  bool verbose = false;
  unsigned threads = 0;
  std::string experiment;
};

namespace cli_detail {

inline ExperimentConfig resolve_config(const CliOptions& o) {
  ExperimentConfig cfg;
  if (!o.config_path.empty()) cfg = load_config(o.config_path);
  if (o.seed) cfg.seed = *o.seed;
  if (o.out_dir) cfg.out_dir = *o.out_dir;
  if (o.mode) cfg.mode = *o.mode;
  return cfg;
}

inline KineticsOptions kinetics_options(const ExperimentConfig& cfg) {
  KineticsOptions k;
  k.mode = cfg.mode == "stirred" ? Mode::stirred : Mode::exact;
  k.vertical = cfg.vertical;
  return k;
}

inline int verb_simulate(const CliOptions& o, std::ostream& out) {
  auto cfg = resolve_config(o);
  cfg.validate();
  if (o.format != "csv" && o.format != "jsonl") throw ParameterError("format", "csv | jsonl");
  Rng rng(replica_seed(cfg.seed, 0, 0));
  auto state = sample_initial(cfg.geom, cfg.params, cfg.y0, rng);
  TrialStats trials;
  const auto traj = simulate(std::move(state), cfg.T, cfg.params, rng, kinetics_options(cfg), cfg.snapshot_times, &trials);
  OutputSet files(cfg.out_dir);
  if (o.format == "csv") files.write("trajectory.csv", trajectory_csv(traj));
  else files.write("trajectory.jsonl", trajectory_jsonl(traj));
  if (!traj.snapshots.empty()) files.write("snapshots.csv", snapshots_csv(traj.snapshots));
  files.write("trials.csv", trial_stats_csv(trials));
  const nlohmann::json summary = {{"final_rod_y", traj.final_y()}, {"height_changes", traj.points.size() - 1}};
  files.write_manifest(cfg, "simulate", summary);
  out << summary.dump() << "\n";
  return 0;
}

inline int verb_couple(const CliOptions& o, std::ostream& out) {
  auto cfg = resolve_config(o);
  cfg.validate();
  const auto res = experiment_return(cfg);
  OutputSet files(cfg.out_dir);
  auto summary = write_return(res, files);
  if (o.verbose) {
    // Event log of one replica at the first gamma1 of the sweep.
    Params params = cfg.params;
    params.gamma1 = cfg.gamma1_sweep.empty() ? params.gamma1 : cfg.gamma1_sweep.front();
    Rng rng(replica_seed(cfg.seed, 1u << 24, 0));
    CoupledSimulator sim(single_discrepancy(cfg.geom, params, 0, {cfg.start_x, cfg.start_y}, rng), params);
    std::string log;
    Event ev;
    while (sim.step_until(cfg.T, rng, &ev)) {
      log += "{\"time\":" + format_number(ev.time) + ",\"kind\":\"" + to_string(ev.kind) +
             "\",\"x\":" + std::to_string(ev.site.x) + ",\"y\":" + std::to_string(ev.site.y) +
             ",\"succeeded\":" + (ev.succeeded ? "true" : "false") +
             ",\"discrepancies\":" + std::to_string(sim.state().discrepancy_count()) + "}\n";
    }
    files.write("events.jsonl", log);
    summary["monotonicity_violations"] = sim.monotonicity_violations();
  }
  files.write_manifest(cfg, "couple", summary);
  out << summary.dump() << "\n";
  return 0;
}

inline int verb_rw(const CliOptions& o, std::ostream& out) {
  auto cfg = resolve_config(o);
  cfg.params.validate();
  OutputSet files(cfg.out_dir);
  Rng rng(replica_seed(cfg.seed, 0, 0));
  files.write("rw_trajectory.csv", trajectory_csv(simulate_rw(cfg.y0, cfg.T, cfg.params, rng)));
  const auto law = stationary_measure(cfg.params);
  std::string m = "y,m\n";
  for (int y = law.ymin; y <= law.ymax; ++y) m += std::to_string(y) + "," + format_number(law.prob(y)) + "\n";
  files.write("stationary_law.csv", m);
  std::string moments = "N,mean,continuous_mean,modus,log_N_over_beta\n";
  for (double n : cfg.N_sweep) {
    Params p = cfg.params;
    p.N = static_cast<int>(n);
    const auto l = stationary_measure(p);
    moments += format_number(n) + "," + format_number(l.mean()) + "," +
               format_number(continuous_mean(p.alpha(), p.beta(), n)) + "," + format_number(modus(p)) + "," +
               format_number(std::log(n) / p.beta()) + "\n";
  }
  files.write("moments.csv", moments);
  const nlohmann::json summary = {{"mean", law.mean()},
                                  {"mode", law.mode()},
                                  {"detailed_balance_residual", rw_detailed_balance_residual(law)}};
  files.write_manifest(cfg, "rw", summary);
  out << summary.dump() << "\n";
  return 0;
}

inline int verb_burgers(const CliOptions& o, std::ostream& out) {
  auto cfg = resolve_config(o);
  out << run_experiment("burgers", cfg).dump() << "\n";
  return 0;
}

/// Exact checks on the configured (tiny) box: detailed balance of the fixed-rod
/// monomer chain and of the coupled chain, and, when replicas > 0, TV between
/// simulated and exact rod marginals at the observation times.
inline int verb_oracle_check(const CliOptions& o, std::ostream& out) {
  auto cfg = resolve_config(o);
  cfg.validate();
  const auto& p = cfg.params;

  StateIndex fixed(cfg.geom, p.N, {ChainMode::monomer_only, cfg.y0, std::nullopt});
  const auto Qf = build_generator(fixed, p);
  const auto muf = product_weights(fixed, p);
  const double db_fixed = check_detailed_balance(Qf, muf);

  StateIndex joint(cfg.geom, p.N, {ChainMode::coupled, 0, std::nullopt});
  const auto Qj = build_generator(joint, p);
  const double db_joint = check_detailed_balance(Qj, joint_weights(joint, p));

  nlohmann::json report = {{"states_fixed_rod", fixed.size()},
                           {"states_coupled", joint.size()},
                           {"detailed_balance_fixed_rod", db_fixed},
                           {"detailed_balance_coupled", db_joint},
                           {"stationarity_fixed_rod", stationarity_residual(Qf, muf)}};
  bool ok = db_fixed < 1e-12 && db_joint < 1e-12;

  if (cfg.replicas > 0) {
    auto law = conditioned_initial_law(joint, p, cfg.y0);
    auto sims = rod_ensemble(p, cfg.geom, cfg.y0, cfg.times, cfg.replicas, cfg.seed, 0, kinetics_options(cfg));
    auto tvs = nlohmann::json::array();
    double t_prev = 0;
    for (std::size_t i = 0; i < cfg.times.size(); ++i) {
      law = transient_law(Qj, law, cfg.times[i] - t_prev);
      t_prev = cfg.times[i];
      const double tv = tv_distance(sims[i].probabilities(), rod_marginal(joint, law));
      tvs.push_back({{"t", cfg.times[i]}, {"tv", tv}});
    }
    report["rod_marginal_tv"] = tvs;
    report["replicas"] = cfg.replicas;
  }
  report["ok"] = ok;
  out << report.dump(2) << "\n";
  return ok ? 0 : 1;
}

inline void error_record(std::ostream& err, const std::string& kind, const std::string& message,
                         const ParameterError* pe = nullptr) {
  nlohmann::json rec = {{"error", kind}, {"message", message}};
  if (pe) {
    rec["key"] = pe->key();
    rec["constraint"] = pe->constraint();
  }
  err << rec.dump() << "\n";
}

}  // namespace cli_detail

/// Entry point of the `rodfluid` tool; returns the process exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  using namespace cli_detail;
  CLI::App app{"Rod in a lattice fluid: simulation, exact checks and experiments", "rodfluid"};
  CliOptions o;
  app.add_option("--config", o.config_path, "key = value configuration file");
  app.add_option("--seed", o.seed, "master seed (overrides the config)");
  app.add_option("--out", o.out_dir, "output directory (overrides the config)");
  app.add_option("--mode", o.mode, "kinetics: exact | stirred");
  app.add_option("--format", o.format, "trajectory format: csv | jsonl");
  app.add_option("--threads", o.threads, "worker threads (0 = all cores)");
  app.add_flag("--verbose", o.verbose, "also write a per-event log where supported");
  app.require_subcommand(1);
  app.fallthrough();

  auto* sim = app.add_subcommand("simulate", "simulate the full system, write the rod trajectory");
  auto* cpl = app.add_subcommand("couple", "second-class particle return-probability scan");
  auto* rw = app.add_subcommand("rw", "limit walk: trajectory, reversible law, moments");
  auto* brg = app.add_subcommand("burgers", "Burgers relaxation with rods walking in the evolving fluid");
  auto* orc = app.add_subcommand("oracle-check", "exact checks on a tiny box");
  auto* exp = app.add_subcommand("experiment", "run a named experiment");
  exp->add_option("name", o.experiment, "convergence | stationary | archimedes | burgers | return")->required();
  for (auto* s : {sim, cpl, rw, brg, orc, exp}) s->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << app.help();
    error_record(err, "usage", e.what());
    return 2;
  }

  const unsigned saved_threads = worker_threads();
  worker_threads() = o.threads;
  int code = 1;
  try {
    if (*sim) code = verb_simulate(o, out);
    else if (*cpl) code = verb_couple(o, out);
    else if (*rw) code = verb_rw(o, out);
    else if (*brg) code = verb_burgers(o, out);
    else if (*orc) code = verb_oracle_check(o, out);
    else if (*exp) {
      auto cfg = resolve_config(o);
      out << run_experiment(o.experiment, cfg).dump() << "\n";
      code = 0;
    }
  } catch (const ParameterError& e) {
    error_record(err, "parameter", e.what(), &e);
    code = 3;
  } catch (const NotNormalizable& e) {
    error_record(err, "not_normalizable", e.what());
    code = 3;
  } catch (const std::logic_error& e) {
    error_record(err, "invariant", e.what());
    code = 4;
  } catch (const std::exception& e) {
    error_record(err, "runtime", e.what());
    code = 5;
  }
  worker_threads() = saved_threads;
  return code;
}

}  // namespace rodfluid
