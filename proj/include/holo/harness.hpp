// Copyright 2026 The holo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Experiment configs, sweeps and result files behind the `holo` CLI.
//
// Exit codes: 0 success, 2 invalid config or usage (nothing written),
// 3 at least one row failed numerically (files still written, see the status
// column), 4 filesystem error.

#pragma once

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "holo/device.hpp"
#include "holo/gates.hpp"

namespace holo::harness {

using nlohmann::json;
using holo::detail::concat;

inline constexpr const char* kLibraryVersion = "0.1.0";
inline constexpr const char* kConfigSchema = "holo.experiment/1";
inline constexpr const char* kManifestSchema = "holo.manifest/1";

enum ExitCode : int { ok = 0, invalid = 2, numerical = 3, io = 4 };

struct validation_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Logging
// ---------------------------------------------------------------------------

enum class LogLevel { error = 0, info = 1, debug = 2 };

inline LogLevel parse_log_level(const std::string& s) {
  if (s == "error") return LogLevel::error;
  if (s == "info") return LogLevel::info;
  if (s == "debug") return LogLevel::debug;
  throw validation_error("HOLO_LOG must be one of error, info, debug (got '" + s + "')");
}

/// Reads HOLO_LOG once; unset means `error`.
inline LogLevel log_level_from_env() {
  const char* v = std::getenv("HOLO_LOG");
  return v == nullptr || *v == '\0' ? LogLevel::error : parse_log_level(v);
}

class Logger {
 public:
  explicit Logger(LogLevel level = LogLevel::error, std::ostream* sink = &std::cerr) : level_(level), sink_(sink) {}

  void info(const std::string& msg) const { write(LogLevel::info, "info", msg); }
  void debug(const std::string& msg) const { write(LogLevel::debug, "debug", msg); }

 private:
  void write(LogLevel l, const char* tag, const std::string& msg) const {
    if (static_cast<int>(l) > static_cast<int>(level_) || sink_ == nullptr) return;
    std::lock_guard<std::mutex> lock(mutex_);
    *sink_ << "holo [" << tag << "] " << msg << '\n';
  }
  LogLevel level_;
  std::ostream* sink_;
  mutable std::mutex mutex_;
};

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

enum class Kind { gate_up, gate_ub, gate_u2, fidelity_sweep, tct_spectrum, tct_transitions, structure_check };

inline const std::vector<std::pair<Kind, const char*>>& kind_names() {
  static const std::vector<std::pair<Kind, const char*>> names{
      {Kind::gate_up, "gate-up"},           {Kind::gate_ub, "gate-ub"},
      {Kind::gate_u2, "gate-u2"},           {Kind::fidelity_sweep, "fidelity-sweep"},
      {Kind::tct_spectrum, "tct-spectrum"}, {Kind::tct_transitions, "tct-transitions"},
      {Kind::structure_check, "structure-check"}};
  return names;
}

inline const char* kind_name(Kind k) {
  for (const auto& [kind, name] : kind_names())
    if (kind == k) return name;
  return "?";
}

inline Kind parse_kind(const std::string& s) {
  for (const auto& [kind, name] : kind_names())
    if (s == name) return kind;
  throw validation_error("kind: unknown experiment kind '" + s + "'");
}

inline bool is_gate_kind(Kind k) {
  return k == Kind::gate_up || k == Kind::gate_ub || k == Kind::gate_u2 || k == Kind::fidelity_sweep;
}

enum class GateName { up, ub, u2 };

struct GateConfig {
  GateName gate = GateName::up;
  double phi = kPi / 2;
  std::vector<double> T{1.0};
  int grid = 0;  // 0 selects gates::default_grid(T)
  gates::DriveMode mode = gates::DriveMode::tqda;
  bool path_csv = false;
};

struct DeviceConfig {
  device::DeviceParams params;
  int N = 12;
  int levels = 8;
  device::SweepVariable variable = device::SweepVariable::E_I;
  std::vector<double> values{0.0};
  device::LevelPermutation labels;
  std::vector<device::TransitionPair> pairs = device::default_pairs();
};

struct StructureConfig {
  gates::Scheme scheme = gates::Scheme::orange_slice;
  double phi = kPi / 2;
  double T = 1.0;
};

struct ExperimentConfig {
  std::string name;
  Kind kind = Kind::gate_up;
  std::string output = ".";
  std::uint64_t seed = 0;
  GateConfig gate;
  DeviceConfig device;
  StructureConfig structure;
};

namespace detail {

inline void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw validation_error(where + ": expected an object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : allowed) known = known || item.key() == k;
    if (!known) throw validation_error(where + ": unknown key '" + item.key() + "'");
  }
}

inline double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw validation_error(where + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw validation_error(where + ": not finite");
  return v;
}

inline int integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw validation_error(where + ": expected an integer");
  return j.get<int>();
}

inline std::string text(const json& j, const std::string& where) {
  if (!j.is_string()) throw validation_error(where + ": expected a string");
  return j.get<std::string>();
}

/// Either an explicit array or {start, stop, points, spacing: linear|log}.
inline std::vector<double> grid_values(const json& j, const std::string& where) {
  std::vector<double> out;
  if (j.is_array()) {
    for (std::size_t k = 0; k < j.size(); ++k) out.push_back(number(j[k], where + "[" + std::to_string(k) + "]"));
  } else if (j.is_object()) {
    check_keys(j, {"start", "stop", "points", "spacing"}, where);
    for (const char* k : {"start", "stop", "points"})
      if (!j.contains(k)) throw validation_error(where + ": missing '" + k + "'");
    const double a = number(j["start"], where + ".start");
    const double b = number(j["stop"], where + ".stop");
    const int n = integer(j["points"], where + ".points");
    const std::string spacing = j.contains("spacing") ? text(j["spacing"], where + ".spacing") : "linear";
    if (n < 1) throw validation_error(where + ".points: must be >= 1");
    if (spacing != "linear" && spacing != "log") throw validation_error(where + ".spacing: expected linear or log");
    if (spacing == "log" && !(a > 0.0 && b > 0.0)) throw validation_error(where + ": log spacing needs positive bounds");
    for (int k = 0; k < n; ++k) {
      const double s = n == 1 ? 0.0 : static_cast<double>(k) / (n - 1);
      out.push_back(spacing == "log" ? a * std::pow(b / a, s) : a + (b - a) * s);
    }
    if (n > 1) out.back() = b;
  } else {
    throw validation_error(where + ": expected an array or a range object");
  }
  if (out.empty()) throw validation_error(where + ": empty grid");
  return out;
}

inline device::Level parse_level(char c, const std::string& where) {
  switch (c) {
    case '0': return device::Level::zero;
    case '1': return device::Level::one;
    case 'a': return device::Level::aux;
    case 'e': return device::Level::excited;
  }
  throw validation_error(where + ": unknown level '" + std::string(1, c) + "'");
}

inline std::string gate_name(GateName g) {
  switch (g) {
    case GateName::up: return "up";
    case GateName::ub: return "ub";
    case GateName::u2: return "u2";
  }
  return "?";
}

inline std::string scheme_name(gates::Scheme s) {
  return s == gates::Scheme::orange_slice ? "orange-slice" : "geodesic-triangle";
}

}  // namespace detail

/// Checks every parameter against the preconditions of the targeted
/// operations. Throws validation_error.
inline void validate(const ExperimentConfig& c) {
  if (c.name.empty()) throw validation_error("name: must be non-empty");
  for (char ch : c.name) {
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-' || ch == '.')) {
      throw validation_error("name: only letters, digits, '_', '-' and '.' are allowed");
    }
  }
  if (c.output.empty()) throw validation_error("output: must be non-empty");
  try {
    if (is_gate_kind(c.kind)) {
      const auto& g = c.gate;
      if (g.grid < 0 || g.grid == 1) throw validation_error("gate.grid: must be 0 (default) or >= 2");
      for (double t : g.T) {
        if (!(t > 0.0)) throw validation_error("gate.T: durations must be positive");
        if (g.gate == GateName::ub) {
          gates::geodesic_triangle_schedule(g.phi, t);
        } else {
          gates::orange_slice_schedule(g.phi, t);
        }
      }
    } else if (c.kind == Kind::structure_check) {
      if (!(c.structure.T > 0.0)) throw validation_error("structure.T: must be positive");
      if (c.structure.scheme == gates::Scheme::orange_slice) {
        gates::orange_slice_schedule(c.structure.phi, c.structure.T);
      } else {
        gates::geodesic_triangle_schedule(c.structure.phi, c.structure.T);
      }
    } else {
      const auto& d = c.device;
      d.params.validate();
      const device::ChargeBasisConfig cfg{d.N};
      cfg.validate();
      if (d.levels < 4 || d.levels > cfg.dim()) throw validation_error("device.levels: must lie in [4, (2N+1)^2]");
      d.labels.validate();
      for (double x : d.values) device::with_variable(d.params, d.variable, x).validate();
      if (c.kind == Kind::tct_transitions && d.pairs.empty()) throw validation_error("device.pairs: empty");
    }
  } catch (const validation_error&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw validation_error(e.what());
  }
}

/// Parses and validates a config document. Unknown keys are rejected at every
/// level, including blocks that do not belong to the chosen kind.
inline ExperimentConfig parse_config(const json& j) {
  using namespace detail;
  check_keys(j, {"schema", "name", "kind", "output", "seed", "gate", "device", "structure"}, "config");
  if (!j.contains("schema")) throw validation_error("schema: missing");
  if (text(j["schema"], "schema") != kConfigSchema) {
    throw validation_error(std::string("schema: unsupported version (expected ") + kConfigSchema + ")");
  }
  for (const char* k : {"name", "kind"})
    if (!j.contains(k)) throw validation_error(std::string(k) + ": missing");

  ExperimentConfig c;
  c.name = text(j["name"], "name");
  c.kind = parse_kind(text(j["kind"], "kind"));
  if (j.contains("output")) c.output = text(j["output"], "output");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<long long>() >= 0)) {
      throw validation_error("seed: expected a non-negative integer");
    }
    c.seed = j["seed"].get<std::uint64_t>();
  }

  const char* block = is_gate_kind(c.kind) ? "gate" : c.kind == Kind::structure_check ? "structure" : "device";
  for (const char* other : {"gate", "device", "structure"}) {
    if (std::string(other) != block && j.contains(other)) {
      throw validation_error(std::string(other) + ": not used by kind " + kind_name(c.kind));
    }
  }

  if (is_gate_kind(c.kind)) {
    auto& g = c.gate;
    if (c.kind == Kind::gate_ub) g.gate = GateName::ub;
    if (c.kind == Kind::gate_u2) g.gate = GateName::u2;
    if (c.kind == Kind::fidelity_sweep) g.mode = gates::DriveMode::bare;
    if (j.contains("gate")) {
      const json& b = j["gate"];
      if (c.kind == Kind::fidelity_sweep) {
        check_keys(b, {"gate", "phi", "T", "grid", "mode", "path_csv"}, "gate");
      } else {
        check_keys(b, {"phi", "T", "grid", "mode", "path_csv"}, "gate");
      }
      if (b.contains("gate")) {
        const std::string s = text(b["gate"], "gate.gate");
        if (s == "up") g.gate = GateName::up;
        else if (s == "ub") g.gate = GateName::ub;
        else if (s == "u2") g.gate = GateName::u2;
        else throw validation_error("gate.gate: expected up, ub or u2");
      }
      if (b.contains("phi")) g.phi = number(b["phi"], "gate.phi");
      if (b.contains("T")) g.T = grid_values(b["T"], "gate.T");
      if (b.contains("grid")) g.grid = integer(b["grid"], "gate.grid");
      if (b.contains("mode")) {
        const std::string s = text(b["mode"], "gate.mode");
        if (s == "tqda") g.mode = gates::DriveMode::tqda;
        else if (s == "bare") g.mode = gates::DriveMode::bare;
        else throw validation_error("gate.mode: expected tqda or bare");
      }
      if (b.contains("path_csv")) {
        if (!b["path_csv"].is_boolean()) throw validation_error("gate.path_csv: expected a boolean");
        g.path_csv = b["path_csv"].get<bool>();
      }
    }
  } else if (c.kind == Kind::structure_check) {
    if (j.contains("structure")) {
      const json& b = j["structure"];
      check_keys(b, {"scheme", "phi", "T"}, "structure");
      if (b.contains("scheme")) {
        const std::string s = text(b["scheme"], "structure.scheme");
        if (s == "orange-slice") c.structure.scheme = gates::Scheme::orange_slice;
        else if (s == "geodesic-triangle") c.structure.scheme = gates::Scheme::geodesic_triangle;
        else throw validation_error("structure.scheme: expected orange-slice or geodesic-triangle");
      }
      if (b.contains("phi")) c.structure.phi = number(b["phi"], "structure.phi");
      if (b.contains("T")) c.structure.T = number(b["T"], "structure.T");
    }
  } else {
    auto& d = c.device;
    if (!j.contains("device")) throw validation_error("device: missing");
    const json& b = j["device"];
    check_keys(b, {"E_C_plus", "E_C_minus", "E_J0_plus", "E_J0_minus", "E_I", "n_g_plus", "n_g_minus", "f_plus",
                   "f_minus", "N", "levels", "sweep", "labels", "pairs"},
               "device");
    auto set = [&](const char* key, double& field) {
      if (b.contains(key)) field = number(b[key], std::string("device.") + key);
    };
    set("E_C_plus", d.params.E_C_plus);
    set("E_C_minus", d.params.E_C_minus);
    set("E_J0_plus", d.params.E_J0_plus);
    set("E_J0_minus", d.params.E_J0_minus);
    set("E_I", d.params.E_I);
    set("n_g_plus", d.params.n_g_plus);
    set("n_g_minus", d.params.n_g_minus);
    set("f_plus", d.params.f_plus);
    set("f_minus", d.params.f_minus);
    if (b.contains("N")) d.N = integer(b["N"], "device.N");
    if (b.contains("levels")) d.levels = integer(b["levels"], "device.levels");
    if (c.kind == Kind::tct_transitions) d.variable = device::SweepVariable::E_J_plus;
    if (!b.contains("sweep")) throw validation_error("device.sweep: missing");
    const json& s = b["sweep"];
    check_keys(s, {"variable", "values"}, "device.sweep");
    if (s.contains("variable")) {
      try {
        d.variable = device::parse_variable(text(s["variable"], "device.sweep.variable"));
      } catch (const device::parameter_error& e) {
        throw validation_error(std::string("device.sweep.variable: ") + e.what());
      }
    }
    if (!s.contains("values")) throw validation_error("device.sweep.values: missing");
    d.values = grid_values(s["values"], "device.sweep.values");
    if (b.contains("labels")) {
      const json& l = b["labels"];
      if (!l.is_array() || l.size() != 4) throw validation_error("device.labels: expected 4 ranks for 0, 1, a, e");
      for (std::size_t k = 0; k < 4; ++k) d.labels.rank[k] = integer(l[k], "device.labels");
      try {
        d.labels.validate();
      } catch (const device::parameter_error& e) {
        throw validation_error(std::string("device.labels: ") + e.what());
      }
    }
    if (b.contains("pairs")) {
      if (c.kind != Kind::tct_transitions) throw validation_error("device.pairs: only used by tct-transitions");
      const json& p = b["pairs"];
      if (!p.is_array()) throw validation_error("device.pairs: expected an array");
      d.pairs.clear();
      for (std::size_t k = 0; k < p.size(); ++k) {
        const std::string s2 = text(p[k], "device.pairs");
        if (s2.size() != 2) throw validation_error("device.pairs: entries look like \"e0\" or \"1a\"");
        d.pairs.push_back({parse_level(s2[0], "device.pairs"), parse_level(s2[1], "device.pairs")});
      }
    }
  }
  validate(c);
  return c;
}

/// Normalized echo with every default spelled out; parse_config(to_json(c))
/// reproduces c.
inline json to_json(const ExperimentConfig& c) {
  json j;
  j["schema"] = kConfigSchema;
  j["name"] = c.name;
  j["kind"] = kind_name(c.kind);
  j["output"] = c.output;
  j["seed"] = c.seed;
  if (is_gate_kind(c.kind)) {
    json g;
    if (c.kind == Kind::fidelity_sweep) g["gate"] = detail::gate_name(c.gate.gate);
    g["phi"] = c.gate.phi;
    g["T"] = c.gate.T;
    g["grid"] = c.gate.grid;
    g["mode"] = gates::mode_name(c.gate.mode);
    g["path_csv"] = c.gate.path_csv;
    j["gate"] = g;
  } else if (c.kind == Kind::structure_check) {
    j["structure"] = {{"scheme", detail::scheme_name(c.structure.scheme)}, {"phi", c.structure.phi},
                      {"T", c.structure.T}};
  } else {
    const auto& p = c.device.params;
    json d{{"E_C_plus", p.E_C_plus}, {"E_C_minus", p.E_C_minus}, {"E_J0_plus", p.E_J0_plus},
           {"E_J0_minus", p.E_J0_minus}, {"E_I", p.E_I}, {"n_g_plus", p.n_g_plus},
           {"n_g_minus", p.n_g_minus}, {"f_plus", p.f_plus}, {"f_minus", p.f_minus},
           {"N", c.device.N}, {"levels", c.device.levels}};
    d["sweep"] = {{"variable", device::variable_name(c.device.variable)}, {"values", c.device.values}};
    d["labels"] = c.device.labels.rank;
    if (c.kind == Kind::tct_transitions) {
      json pairs = json::array();
      for (const auto& [k, l] : c.device.pairs) pairs.push_back(std::string(device::level_name(k)) + device::level_name(l));
      d["pairs"] = pairs;
    }
    j["device"] = d;
  }
  return j;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot read config '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw validation_error(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

/// Shortest round-trip decimal for a double.
inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch == '\n' || ch == '\r' ? ' ' : ch;
  }
  return out + "\"";
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t failed() const {
    std::size_t n = 0;
    for (const auto& r : rows) n += r.back() != "ok";
    return n;
  }

  std::string csv() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t k = 0; k < cells.size(); ++k) {
        if (k) out += ',';
        out += csv_field(cells[k]);
      }
      out += '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out;
  }
};

// ---------------------------------------------------------------------------
// Parallel map
// ---------------------------------------------------------------------------

/// Outcome of one independent row job.
template <class T>
struct Slot {
  std::optional<T> value;
  std::string error;
  double seconds = 0.0;
};

/// Runs fn(0..n-1) on up to `parallelism` threads; results come back in index
/// order whatever the schedule. Exceptions are captured per index.
template <class T, class Fn>
std::vector<Slot<T>> parallel_map(std::size_t n, int parallelism, Fn fn) {
  std::vector<Slot<T>> out(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < n; k = next++) {
      const auto t0 = std::chrono::steady_clock::now();
      try {
        out[k].value.emplace(fn(k));
      } catch (const std::exception& e) {
        out[k].error = e.what();
      }
      out[k].seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
  };
  const std::size_t threads = std::min<std::size_t>(std::max(1, parallelism), std::max<std::size_t>(n, 1));
  if (threads <= 1) {
    worker();
    return out;
  }
  std::vector<std::thread> pool;
  for (std::size_t k = 0; k < threads; ++k) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return out;
}

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

struct ExperimentOutput {
  Table table;
  std::optional<Table> path;  // loop geometry for sphere plots
  std::vector<double> row_seconds;
};

namespace detail {

inline std::string failure(const std::string& what) { return "failed: " + what; }

inline std::vector<std::string> blanks(std::size_t n) { return std::vector<std::string>(n, ""); }

inline gates::GateSetup gate_setup(GateName g, double phi, double t) {
  switch (g) {
    case GateName::up: return gates::up_setup(phi, t);
    case GateName::ub: return gates::ub_setup(phi, t);
    case GateName::u2: return gates::u2_setup(phi, t);
  }
  throw validation_error("unknown gate");
}

inline double target_gamma(GateName g, double phi) { return g == GateName::ub ? phi : -phi; }

inline Table loop_path_table(const gates::LoopSchedule& loop) {
  Table t{{"t_fraction", "segment", "theta", "phi", "x", "y", "z"}, {}};
  constexpr int per_segment = 64;
  for (std::size_t s = 0; s < loop.segments().size(); ++s) {
    for (int k = 0; k <= per_segment; ++k) {
      if (s > 0 && k == 0) continue;
      const double time = loop.segment_begin(s) + (loop.segment_end(s) - loop.segment_begin(s)) * k / per_segment;
      const auto p = loop.point(time);
      const auto x = gates::sphere_point(p[0], p[1]);
      t.rows.push_back({format_number(time / loop.total_time()), std::to_string(s), format_number(p[0]),
                        format_number(p[1]), format_number(x(0)), format_number(x(1)), format_number(x(2))});
    }
  }
  return t;
}

inline ExperimentOutput run_gates(const ExperimentConfig& c, int parallelism, const Logger& log) {
  const auto& g = c.gate;
  ExperimentOutput out;
  out.table.header = {"experiment", "row", "gate", "mode", "phi", "T", "grid", "fidelity", "infidelity", "gamma",
                      "target_gamma", "gamma_error", "leakage", "final_leakage", "spectator_deviation", "status"};
  auto slots = parallel_map<gates::GateReport>(g.T.size(), parallelism, [&](std::size_t k) {
    const int grid = g.grid > 0 ? g.grid : gates::default_grid(g.T[k]);
    log.debug(concat("row ", k, ": T = ", g.T[k], ", grid = ", grid));
    return gates::run_gate(gate_setup(g.gate, g.phi, g.T[k]), grid, g.mode);
  });
  const double target = target_gamma(g.gate, g.phi);
  for (std::size_t k = 0; k < slots.size(); ++k) {
    const int grid = g.grid > 0 ? g.grid : gates::default_grid(g.T[k]);
    std::vector<std::string> row{c.name, std::to_string(k), gate_name(g.gate), gates::mode_name(g.mode),
                                 format_number(g.phi), format_number(g.T[k]), std::to_string(grid)};
    if (const auto& r = slots[k].value) {
      for (double v : {r->fidelity, 1.0 - r->fidelity, r->gamma, target, angular_distance(r->gamma, target),
                       r->leakage, r->final_leakage, r->spectator_deviation}) {
        row.push_back(format_number(v));
      }
      row.push_back("ok");
    } else {
      for (auto& b : blanks(8)) row.push_back(b);
      row.push_back(failure(slots[k].error));
    }
    out.table.rows.push_back(std::move(row));
    out.row_seconds.push_back(slots[k].seconds);
  }
  if (g.path_csv) {
    out.path = loop_path_table(g.gate == GateName::ub ? gates::geodesic_triangle_schedule(g.phi, 1.0)
                                                      : gates::orange_slice_schedule(g.phi, 1.0));
  }
  return out;
}

inline ExperimentOutput run_structure(const ExperimentConfig& c) {
  const auto& s = c.structure;
  const bool orange = s.scheme == gates::Scheme::orange_slice;
  const auto loop = orange ? gates::orange_slice_schedule(s.phi, s.T) : gates::geodesic_triangle_schedule(s.phi, s.T);
  const auto family = orange ? gates::lambda_family(1.0) : gates::tripod_family(1.0);
  ExperimentOutput out;
  out.table.header = {"experiment", "row", "scheme", "phi", "step", "found", "allowed", "pass", "status"};
  for (std::size_t k = 0; k < loop.segments().size(); ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<std::string> row{c.name, std::to_string(k), scheme_name(s.scheme), format_number(s.phi),
                                 std::to_string(k + 1)};
    try {
      const auto r = gates::structure_check(loop, family, k, gates::allowed_transitions(s.scheme, k));
      row.insert(row.end(), {gates::describe(r.found), gates::describe(r.allowed), r.pass ? "1" : "0", "ok"});
    } catch (const std::exception& e) {
      row.insert(row.end(), {"", "", "", failure(e.what())});
    }
    out.table.rows.push_back(std::move(row));
    out.row_seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return out;
}

// Per-point data of a device sweep: spectrum plus Gamma restricted to the
// tracked eigenvectors.
struct DevicePoint {
  device::Spectrum spectrum;
  Matrix gamma;
};

inline ExperimentOutput run_device(const ExperimentConfig& c, int parallelism, const Logger& log) {
  const auto& d = c.device;
  const device::ChargeBasisConfig cfg{d.N};
  const bool transitions = c.kind == Kind::tct_transitions;
  auto slots = parallel_map<DevicePoint>(d.values.size(), parallelism, [&](std::size_t k) {
    const auto p = device::with_variable(d.params, d.variable, d.values[k]);
    DevicePoint point{device::tracked_spectrum(p, cfg), {}};
    if (transitions) {
      const Matrix& v = point.spectrum.vectors;
      point.gamma = v.adjoint() * (device::drive_operator(p, cfg).matrix() / p.energy_unit()) * v;
    }
    return point;
  });

  // Labels continue across the longest successful prefix.
  std::size_t prefix = 0;
  while (prefix < slots.size() && slots[prefix].value) ++prefix;
  std::vector<device::Spectrum> spectra;
  for (std::size_t k = 0; k < prefix; ++k) spectra.push_back(slots[k].value->spectrum);
  std::vector<device::LevelLabeling> labels;
  std::string tracking_failure;
  std::size_t tracked = prefix;
  try {
    labels = device::track_levels(spectra, d.labels);
  } catch (const device::tracking_error& e) {
    tracking_failure = e.what();
    tracked = e.sweep_index;
    spectra.resize(tracked);
    labels = device::track_levels(spectra, d.labels);
  }
  if (tracked < d.values.size()) log.info(concat("labels tracked through ", tracked, " of ", d.values.size(), " points"));

  ExperimentOutput out;
  auto& h = out.table.header;
  h = {"experiment", "row", "variable", "value"};
  if (transitions) {
    for (const auto& pr : d.pairs) h.push_back(device::pair_name(pr));
  } else {
    for (int k = 0; k < d.levels; ++k) h.push_back("level_" + std::to_string(k));
    for (auto l : device::kLevels) h.push_back(std::string("E_") + device::level_name(l));
  }
  h.push_back("status");

  for (std::size_t k = 0; k < slots.size(); ++k) {
    std::vector<std::string> row{c.name, std::to_string(k), device::variable_name(d.variable),
                                 format_number(d.values[k])};
    const std::size_t width = h.size() - row.size() - 1;
    if (!slots[k].value) {
      for (auto& b : blanks(width)) row.push_back(b);
      row.push_back(failure(slots[k].error));
    } else if (k >= tracked) {
      for (auto& b : blanks(width)) row.push_back(b);
      row.push_back(failure(tracking_failure.empty() ? "label tracking interrupted by an earlier failed row"
                                                     : tracking_failure));
    } else {
      const auto& pt = *slots[k].value;
      if (transitions) {
        for (const auto& [a, b] : d.pairs) row.push_back(format_number(std::abs(pt.gamma(labels[k][a], labels[k][b]))));
      } else {
        for (int l = 0; l < d.levels; ++l) row.push_back(format_number(pt.spectrum.energies(l)));
        for (auto l : device::kLevels) row.push_back(format_number(pt.spectrum.energies(labels[k][l])));
      }
      row.push_back("ok");
    }
    out.table.rows.push_back(std::move(row));
    out.row_seconds.push_back(slots[k].seconds);
  }
  return out;
}

}  // namespace detail

/// Computes the experiment in memory; no files touched.
inline ExperimentOutput execute(const ExperimentConfig& c, int parallelism = 1, const Logger& log = Logger{}) {
  if (parallelism < 1) throw validation_error("parallelism must be >= 1");
  if (is_gate_kind(c.kind)) return detail::run_gates(c, parallelism, log);
  if (c.kind == Kind::structure_check) return detail::run_structure(c);
  return detail::run_device(c, parallelism, log);
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

struct RunOptions {
  std::optional<std::string> out;
  int parallel = 1;
  std::optional<std::uint64_t> seed;
};

struct RunResult {
  int exit_code = ExitCode::ok;
  std::filesystem::path csv;
  std::filesystem::path manifest;
  std::optional<std::filesystem::path> path_csv;
  std::size_t rows = 0;
  std::size_t failed = 0;
};

namespace detail {

inline std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Write-then-rename so a reader never sees a half-written file.
inline void write_file(const std::filesystem::path& path, const std::string& content) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open '" + tmp.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) throw io_error("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw io_error("cannot move '" + tmp.string() + "' into place: " + ec.message());
}

}  // namespace detail

/// Runs a validated config and writes <name>.csv and <name>.manifest.json
/// (plus <name>.path.csv when requested) into the output directory.
inline RunResult run(ExperimentConfig c, const RunOptions& opts, const Logger& log = Logger{}) {
  if (opts.out) c.output = *opts.out;
  if (opts.seed) c.seed = *opts.seed;
  if (opts.parallel < 1) throw validation_error("--parallel must be >= 1");
  validate(c);

  const std::string started = detail::utc_now();
  const auto t0 = std::chrono::steady_clock::now();
  log.info(concat("running ", kind_name(c.kind), " '", c.name, "' with parallelism ", opts.parallel));
  ExperimentOutput result = execute(c, opts.parallel, log);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  RunResult rr;
  const std::filesystem::path dir(c.output);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw io_error("cannot create output directory '" + dir.string() + "': " + ec.message());
  rr.csv = dir / (c.name + ".csv");
  rr.manifest = dir / (c.name + ".manifest.json");
  rr.rows = result.table.rows.size();
  rr.failed = result.table.failed();
  rr.exit_code = rr.failed ? ExitCode::numerical : ExitCode::ok;

  detail::write_file(rr.csv, result.table.csv());
  json outputs = json::array({rr.csv.filename().string()});
  if (result.path) {
    rr.path_csv = dir / (c.name + ".path.csv");
    detail::write_file(*rr.path_csv, result.path->csv());
    outputs.push_back(rr.path_csv->filename().string());
  }

  json manifest{{"schema", kManifestSchema},
                {"name", c.name},
                {"kind", kind_name(c.kind)},
                {"library_version", kLibraryVersion},
                {"config", to_json(c)},
                {"parallel", opts.parallel},
                {"started_utc", started},
                {"finished_utc", detail::utc_now()},
                {"wall_time_s", wall},
                {"row_wall_time_s", result.row_seconds},
                {"rows", rr.rows},
                {"failed_rows", rr.failed},
                {"exit_code", rr.exit_code},
                {"outputs", outputs}};
  detail::write_file(rr.manifest, manifest.dump(2) + "\n");
  log.info(concat("wrote ", rr.csv.string(), " (", rr.rows, " rows, ", rr.failed, " failed)"));
  return rr;
}

/// One-line machine-parsable failure reason for stderr.
inline std::string error_line(int code, const std::string& category, const std::string& message) {
  std::string m = message;
  for (char& ch : m)
    if (ch == '\n' || ch == '\r') ch = ' ';
  return concat("holo: exit=", code, " error=", category, " reason=", json(m).dump());
}

}  // namespace holo::harness
