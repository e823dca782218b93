#pragma once

// Output formats. Numbers are written in shortest round-trip form so that
// identical runs produce identical bytes.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rodfluid/config.hpp"
#include "rodfluid/model.hpp"
#include "rodfluid/trajectory.hpp"

#ifndef RODFLUID_VERSION
#define RODFLUID_VERSION "0.1.0"
#endif

namespace rodfluid {

inline constexpr const char* code_version = RODFLUID_VERSION;

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

/// Finite numbers as JSON numbers, everything else as null.
inline nlohmann::json json_number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

/// `time,rod_y`, one record per height change (the initial point first).
inline std::string trajectory_csv(const Trajectory& traj) {
  std::string out = "time,rod_y\n";
  for (const auto& p : traj.points) out += format_number(p.time) + "," + std::to_string(p.rod_y) + "\n";
  return out;
}

inline std::string trajectory_jsonl(const Trajectory& traj) {
  std::string out;
  for (const auto& p : traj.points)
    out += "{\"time\":" + format_number(p.time) + ",\"rod_y\":" + std::to_string(p.rod_y) + "}\n";
  return out;
}

/// Row y as runs "v*len" separated by spaces; v is 0, 1, or R for rod sites.
inline std::string rle_row(const FullState& s, int y) {
  std::string out;
  char cur = 0;
  int len = 0;
  auto flush = [&] {
    if (!len) return;
    if (!out.empty()) out += ' ';
    out += cur;
    out += '*' + std::to_string(len);
  };
  for (int x = 0; x < s.geometry().width; ++x) {
    const char c = s.in_rod(x, y) ? 'R' : (s.occupied(x, y) ? '1' : '0');
    if (c != cur) {
      flush();
      cur = c;
      len = 0;
    }
    ++len;
  }
  flush();
  return out;
}

/// `time,rod_y,y,row` with one record per height per snapshot.
inline std::string snapshots_csv(const std::vector<Snapshot>& snaps) {
  std::string out = "time,rod_y,y,row\n";
  for (const auto& snap : snaps) {
    const auto& g = snap.state.geometry();
    for (int y = g.vmin; y <= g.vmax; ++y)
      out += format_number(snap.time) + "," + std::to_string(snap.state.rod_y()) + "," + std::to_string(y) + "," +
             rle_row(snap.state, y) + "\n";
  }
  return out;
}

inline std::string trial_stats_csv(const TrialStats& stats) {
  std::string out = "y,up_attempts,up_successes,down_attempts,down_successes\n";
  for (const auto& [y, c] : stats)
    out += std::to_string(y) + "," + std::to_string(c.up_attempts) + "," + std::to_string(c.up_successes) + "," +
           std::to_string(c.down_attempts) + "," + std::to_string(c.down_successes) + "\n";
  return out;
}

inline nlohmann::json config_json(const ExperimentConfig& cfg) {
  auto list = [](const std::vector<double>& v) {
    auto a = nlohmann::json::array();
    for (double x : v) a.push_back(json_number(x));
    return a;
  };
  const auto& p = cfg.params;
  return {
      {"experiment", cfg.experiment},
      {"p", p.p}, {"q", p.q}, {"a", p.a}, {"b", p.b},
      {"gamma1", json_number(p.gamma1)}, {"gamma2", p.gamma2}, {"kappa", p.kappa}, {"N", p.N},
      {"width", cfg.geom.width}, {"vmin", cfg.geom.vmin}, {"vmax", cfg.geom.vmax},
      {"seed", cfg.seed}, {"replicas", cfg.replicas}, {"times", list(cfg.times)},
      {"gamma1_sweep", list(cfg.gamma1_sweep)}, {"bootstrap", cfg.bootstrap},
      {"include_stirred", cfg.include_stirred}, {"mode", cfg.mode}, {"vertical", cfg.vertical},
      {"y0", cfg.y0}, {"T", cfg.T}, {"snapshot_times", list(cfg.snapshot_times)}, {"events", cfg.events},
      {"N_sweep", list(cfg.N_sweep)}, {"kappa_sweep", list(cfg.kappa_sweep)}, {"dt", cfg.dt},
      {"rho_below", cfg.rho_below}, {"rho_above", cfg.rho_above}, {"record_every", cfg.record_every},
      {"start_x", cfg.start_x}, {"start_y", cfg.start_y},
  };
}

/// Files written into one output directory, plus the manifest describing them.
class OutputSet {
 public:
  explicit OutputSet(std::string dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

  const std::string& dir() const { return dir_; }
  const std::vector<std::string>& files() const { return files_; }

  void write(const std::string& name, const std::string& content) {
    std::ofstream f(std::filesystem::path(dir_) / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + name + " in " + dir_);
    f << content;
    files_.push_back(name);
  }

  /// manifest.json: config echo, code version, seed, file list and summary.
  void write_manifest(const ExperimentConfig& cfg, const std::string& verb, const nlohmann::json& summary) {
    nlohmann::json m = {{"verb", verb},
                        {"code_version", code_version},
                        {"seed", cfg.seed},
                        {"config", config_json(cfg)},
                        {"files", files_},
                        {"summary", summary}};
    std::ofstream f(std::filesystem::path(dir_) / "manifest.json", std::ios::binary);
    if (!f) throw std::runtime_error("cannot write manifest.json in " + dir_);
    f << m.dump(2) << "\n";
  }

 private:
  std::string dir_;
  std::vector<std::string> files_;
};

}  // namespace rodfluid
