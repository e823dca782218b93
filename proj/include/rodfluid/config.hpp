#pragma once

// key = value configuration files. Blank lines and lines starting with '#'
// are ignored; list values are comma separated.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "rodfluid/model.hpp"

namespace rodfluid {

struct ExperimentConfig {
  std::string experiment;
  Params params;
  LatticeGeometry geom;
  std::uint64_t seed = 1;
  std::string out_dir = "out";

  long replicas = 1000;
  std::vector<double> times{1.0};
  std::vector<double> gamma1_sweep{1, 10, 100, 1000};
  int bootstrap = 1000;
  bool include_stirred = false;

  std::string mode = "exact";  ///< exact | stirred
  bool vertical = true;
  int y0 = 0;
  double T = 1.0;
  std::vector<double> snapshot_times;

  long events = 10'000'000;
  std::vector<double> N_sweep{10, 100, 1000};
  std::vector<double> kappa_sweep{0.5, 1, 2};

  double dt = 0.01;
  double rho_below = 0.8;
  double rho_above = 0.1;
  int record_every = 10;

  int start_x = 8;
  int start_y = 1;

  void validate() const {
    params.validate();
    geom.validate(params);
    if (replicas < 1) throw ParameterError("replicas", "replicas >= 1");
    for (std::size_t i = 1; i < times.size(); ++i)
      if (times[i] < times[i - 1]) throw ParameterError("times", "observation times sorted ascending");
    for (double t : times)
      if (t < 0) throw ParameterError("times", "times >= 0");
    if (mode != "exact" && mode != "stirred") throw ParameterError("mode", "exact | stirred");
    if (!(T >= 0)) throw ParameterError("T", "T >= 0");
    if (bootstrap < 0) throw ParameterError("bootstrap", "bootstrap >= 0");
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, std::string_view text) {
  text = trim(text);
  T value{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) throw ParameterError(key, "must be a number, got '" + std::string(text) + "'");
  return value;
}

inline bool parse_bool(const std::string& key, std::string_view text) {
  text = trim(text);
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ParameterError(key, "must be true or false");
}

inline std::vector<double> parse_list(const std::string& key, std::string_view text) {
  std::vector<double> out;
  while (!trim(text).empty()) {
    const auto comma = text.find(',');
    out.push_back(parse_number<double>(key, text.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

}  // namespace detail

/// Apply one key/value pair. Unknown keys are rejected.
inline void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  using detail::parse_bool;
  using detail::parse_list;
  using detail::parse_number;
  auto& p = cfg.params;
  auto& g = cfg.geom;
  if (key == "p") p.p = parse_number<double>(key, value);
  else if (key == "q") p.q = parse_number<double>(key, value);
  else if (key == "a") p.a = parse_number<double>(key, value);
  else if (key == "b") p.b = parse_number<double>(key, value);
  else if (key == "gamma1") p.gamma1 = parse_number<double>(key, value);
  else if (key == "gamma2") p.gamma2 = parse_number<double>(key, value);
  else if (key == "kappa") p.kappa = parse_number<double>(key, value);
  else if (key == "N") p.N = parse_number<int>(key, value);
  else if (key == "width") g.width = parse_number<int>(key, value);
  else if (key == "vmin") g.vmin = parse_number<int>(key, value);
  else if (key == "vmax") g.vmax = parse_number<int>(key, value);
  else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "experiment") cfg.experiment = std::string(detail::trim(value));
  else if (key == "out") cfg.out_dir = std::string(detail::trim(value));
  else if (key == "replicas") cfg.replicas = parse_number<long>(key, value);
  else if (key == "times") cfg.times = parse_list(key, value);
  else if (key == "gamma1_sweep") cfg.gamma1_sweep = parse_list(key, value);
  else if (key == "bootstrap") cfg.bootstrap = parse_number<int>(key, value);
  else if (key == "include_stirred") cfg.include_stirred = parse_bool(key, value);
  else if (key == "mode") cfg.mode = std::string(detail::trim(value));
  else if (key == "vertical") cfg.vertical = parse_bool(key, value);
  else if (key == "y0") cfg.y0 = parse_number<int>(key, value);
  else if (key == "T") cfg.T = parse_number<double>(key, value);
  else if (key == "snapshot_times") cfg.snapshot_times = parse_list(key, value);
  else if (key == "events") cfg.events = parse_number<long>(key, value);
  else if (key == "N_sweep") cfg.N_sweep = parse_list(key, value);
  else if (key == "kappa_sweep") cfg.kappa_sweep = parse_list(key, value);
  else if (key == "dt") cfg.dt = parse_number<double>(key, value);
  else if (key == "rho_below") cfg.rho_below = parse_number<double>(key, value);
  else if (key == "rho_above") cfg.rho_above = parse_number<double>(key, value);
  else if (key == "record_every") cfg.record_every = parse_number<int>(key, value);
  else if (key == "start_x") cfg.start_x = parse_number<int>(key, value);
  else if (key == "start_y") cfg.start_y = parse_number<int>(key, value);
  else throw ParameterError(key, "unknown key");
}

inline ExperimentConfig parse_config(std::istream& in, ExperimentConfig cfg = {}) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto text = detail::trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos)
      throw ParameterError("line " + std::to_string(lineno), "expected key = value");
    apply_setting(cfg, std::string(detail::trim(text.substr(0, eq))), std::string(detail::trim(text.substr(eq + 1))));
  }
  return cfg;
}

inline ExperimentConfig parse_config_text(const std::string& text, ExperimentConfig cfg = {}) {
  std::istringstream in(text);
  return parse_config(in, std::move(cfg));
}

inline ExperimentConfig load_config(const std::string& path, ExperimentConfig cfg = {}) {
  std::ifstream in(path);
  if (!in) throw ParameterError("config", "cannot open '" + path + "'");
  return parse_config(in, std::move(cfg));
}

}  // namespace rodfluid
