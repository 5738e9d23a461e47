#pragma once

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ivi/montecarlo.hpp"

namespace ivi::cli {

inline constexpr const char* tool_version = "0.1.0";
inline constexpr const char* out_dir_env = "IVI_OUT_DIR";

// Config/flag problems exit with 2, numeric failures with 3.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

[[noreturn]] inline void bad_field(const std::string& path, const std::string& why) {
  throw ConfigError("config field '" + path + "': " + why);
}

enum class Command { Simulate, LaplaceError, Price, Smile, CharCheck };

inline const char* command_name(Command c) {
  switch (c) {
    case Command::Simulate: return "simulate";
    case Command::LaplaceError: return "laplace-error";
    case Command::Price: return "price";
    case Command::Smile: return "smile";
    default: return "char-check";
  }
}

struct CliRun {
  Command command = Command::Simulate;
  ExperimentConfig exp;
  int dump_paths = 10;  // simulate only
  std::string out_dir = ".";
};

// JSON serialization ----------------------------------------------------------

inline nlohmann::json kernel_to_json(const KernelSpec& k) {
  nlohmann::json j;
  switch (k.family) {
    case KernelFamily::Constant:
      j["family"] = "constant";
      j["beta"] = k.beta;
      break;
    case KernelFamily::ExpSum: {
      j["family"] = "exp_sum";
      nlohmann::json terms = nlohmann::json::array();
      for (const auto& t : k.exp_terms) terms.push_back({{"c", t.c}, {"x", t.x}});
      j["terms"] = std::move(terms);
      break;
    }
    case KernelFamily::ShiftedFractional:
      j["family"] = "shifted_fractional";
      j["H"] = k.H;
      j["epsilon"] = k.epsilon;
      j["beta"] = k.beta;
      break;
    case KernelFamily::FractionalPower:
      j["family"] = "fractional_power";
      j["H"] = k.H;
      j["beta"] = k.beta;
      break;
  }
  return j;
}

namespace detail {

inline void check_keys(const nlohmann::json& obj, const std::string& section,
                       std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* k : allowed)
      if (item.key() == k) {
        ok = true;
        break;
      }
    if (!ok) bad_field(section + "." + item.key(), "unknown key");
  }
}

inline double num_at(const nlohmann::json& obj, const std::string& section, const char* key,
                     double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) bad_field(section + "." + key, "must be a number");
  return obj[key].get<double>();
}

inline bool bool_at(const nlohmann::json& obj, const std::string& section, const char* key,
                    bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_boolean()) bad_field(section + "." + key, "must be a boolean");
  return obj[key].get<bool>();
}

inline std::string str_at(const nlohmann::json& obj, const std::string& section, const char* key,
                          const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_string()) bad_field(section + "." + key, "must be a string");
  return obj[key].get<std::string>();
}

}  // namespace detail

inline KernelSpec kernel_from_json(const nlohmann::json& j) {
  if (!j.is_object()) bad_field("kernel", "must be an object");
  detail::check_keys(j, "kernel", {"family", "H", "epsilon", "beta", "terms"});
  const std::string family = detail::str_at(j, "kernel", "family", "shifted_fractional");
  try {
    if (family == "constant")
      return KernelSpec::constant(detail::num_at(j, "kernel", "beta", 1.0));
    if (family == "exp_sum") {
      if (!j.contains("terms") || !j["terms"].is_array())
        bad_field("kernel.terms", "exp_sum needs an array of {c, x} terms");
      std::vector<ExpTerm> terms;
      for (const auto& t : j["terms"])
        terms.push_back({detail::num_at(t, "kernel.terms", "c", 0.0),
                         detail::num_at(t, "kernel.terms", "x", 0.0)});
      return KernelSpec::exp_sum(std::move(terms));
    }
    const double H = detail::num_at(j, "kernel", "H", 0.1);
    const double beta = detail::num_at(j, "kernel", "beta", 0.0);
    if (family == "fractional_power") return KernelSpec::fractional_power(H, beta);
    if (family == "shifted_fractional")
      return KernelSpec::shifted_fractional(H, detail::num_at(j, "kernel", "epsilon", 0.0), beta);
  } catch (const std::invalid_argument& e) {
    bad_field("kernel", e.what());
  }
  bad_field("kernel.family", "unknown family '" + family + "'");
}

inline nlohmann::json run_to_json(const CliRun& run) {
  const ExperimentConfig& e = run.exp;
  const ModelParams& p = e.params;
  nlohmann::json j;
  j["model"] = {{"a", p.a},     {"V0", p.V0}, {"b", p.b}, {"c", p.c},
                {"rho", p.rho}, {"T", p.T},   {"S0", p.S0}};
  j["kernel"] = kernel_to_json(p.kernel);
  j["scheme"] = {{"kind", e.scheme == SchemeKind::iVi ? "ivi" : "explicit"},
                 {"resolvent", e.resolvent}};
  nlohmann::json exp;
  switch (e.target.kind) {
    case Target::LaplaceU: exp["target"] = "laplace_u"; break;
    case Target::ATMCall: exp["target"] = "atm_call"; break;
    case Target::Smile: exp["target"] = "smile"; break;
    case Target::PathSample: exp["target"] = "path_sample"; break;
  }
  exp["w"] = e.target.w;
  exp["strikes"] = e.target.strikes;
  exp["steps"] = e.steps_list;
  exp["paths"] = e.paths;
  exp["threads"] = e.threads;
  exp["antithetic"] = e.antithetic;
  exp["riccati_m"] = e.riccati_m;
  exp["dump_paths"] = run.dump_paths;
  j["experiment"] = std::move(exp);
  j["rng"] = {{"seed", e.seed}};
  return j;
}

inline CliRun run_from_json(const nlohmann::json& input, Command command) {
  if (!input.is_object()) throw ConfigError("config: top level must be a JSON object");
  // A manifest wraps the original config under "config"; accept both.
  const nlohmann::json& j = input.contains("config") ? input["config"] : input;
  detail::check_keys(j, "config", {"model", "kernel", "scheme", "experiment", "rng"});

  CliRun run;
  run.command = command;
  ExperimentConfig& e = run.exp;

  const nlohmann::json model = j.value("model", nlohmann::json::object());
  detail::check_keys(model, "model", {"a", "V0", "b", "c", "rho", "T", "S0"});
  ModelParams& p = e.params;
  p.a = detail::num_at(model, "model", "a", 0.0);
  p.V0 = detail::num_at(model, "model", "V0", 0.0);
  p.b = detail::num_at(model, "model", "b", 0.0);
  p.c = detail::num_at(model, "model", "c", 0.0);
  p.rho = detail::num_at(model, "model", "rho", 0.0);
  p.T = detail::num_at(model, "model", "T", 1.0);
  p.S0 = detail::num_at(model, "model", "S0", 1.0);
  if (j.contains("kernel")) p.kernel = kernel_from_json(j["kernel"]);

  const nlohmann::json scheme = j.value("scheme", nlohmann::json::object());
  detail::check_keys(scheme, "scheme", {"kind", "resolvent"});
  const std::string kind = detail::str_at(scheme, "scheme", "kind", "ivi");
  if (kind == "ivi")
    e.scheme = SchemeKind::iVi;
  else if (kind == "explicit")
    e.scheme = SchemeKind::Explicit;
  else
    bad_field("scheme.kind", "must be 'ivi' or 'explicit'");
  e.resolvent = detail::bool_at(scheme, "scheme", "resolvent", false);

  const nlohmann::json exp = j.value("experiment", nlohmann::json::object());
  detail::check_keys(exp, "experiment",
                     {"target", "w", "strikes", "steps", "paths", "threads", "antithetic",
                      "riccati_m", "dump_paths"});
  const std::string target = detail::str_at(exp, "experiment", "target", "laplace_u");
  if (target == "laplace_u")
    e.target.kind = Target::LaplaceU;
  else if (target == "atm_call")
    e.target.kind = Target::ATMCall;
  else if (target == "smile")
    e.target.kind = Target::Smile;
  else if (target == "path_sample")
    e.target.kind = Target::PathSample;
  else
    bad_field("experiment.target", "unknown target '" + target + "'");
  e.target.w = detail::num_at(exp, "experiment", "w", -1.0);
  if (exp.contains("strikes")) {
    if (!exp["strikes"].is_array()) bad_field("experiment.strikes", "must be an array");
    e.target.strikes.clear();
    for (const auto& s : exp["strikes"]) {
      if (!s.is_number()) bad_field("experiment.strikes", "entries must be numbers");
      e.target.strikes.push_back(s.get<double>());
    }
  }
  if (exp.contains("steps")) {
    if (!exp["steps"].is_array()) bad_field("experiment.steps", "must be an array");
    e.steps_list.clear();
    for (const auto& s : exp["steps"]) {
      if (!s.is_number_integer()) bad_field("experiment.steps", "entries must be integers");
      e.steps_list.push_back(s.get<int>());
    }
  }
  const double paths = detail::num_at(exp, "experiment", "paths", 200000.0);
  if (paths < 1 || paths != std::floor(paths))
    bad_field("experiment.paths", "must be a positive integer");
  e.paths = static_cast<std::int64_t>(paths);
  e.threads = static_cast<int>(detail::num_at(exp, "experiment", "threads", 0.0));
  e.antithetic = detail::bool_at(exp, "experiment", "antithetic", false);
  e.riccati_m = static_cast<int>(detail::num_at(exp, "experiment", "riccati_m", 2000.0));
  run.dump_paths = static_cast<int>(detail::num_at(exp, "experiment", "dump_paths", 10.0));

  const nlohmann::json rng = j.value("rng", nlohmann::json::object());
  detail::check_keys(rng, "rng", {"seed"});
  if (rng.contains("seed")) {
    if (!rng["seed"].is_number_integer() && !rng["seed"].is_number_unsigned())
      bad_field("rng.seed", "must be an integer");
    e.seed = rng["seed"].get<std::uint64_t>();
  }
  return run;
}

inline CliRun load_config_file(const std::string& path, Command command) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  return run_from_json(j, command);
}

// Flag layer ------------------------------------------------------------------

// Raw command-line values; unset optionals leave the config-file value alone.
struct Options {
  std::string config_path;
  int preset_case = 0;  // 1..4, 0 = none
  bool has_hurst = false;
  double hurst = 0.1;
  std::string steps;    // comma-separated
  std::int64_t paths = -1;
  std::int64_t seed = -1;
  int threads = -1;
  bool antithetic = false;
  bool resolvent = false;
  bool has_w = false;
  double w = -1.0;
  std::string strikes;  // comma-separated
  std::string scheme;   // "ivi" | "explicit"
  int riccati_m = -1;
  std::string out_dir;
};

namespace detail {

template <class T, class Parse>
std::vector<T> parse_list(const std::string& text, const char* what, Parse&& parse) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(parse(item, used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(std::string("flag --") + what + ": cannot parse '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError(std::string("flag --") + what + ": empty list");
  return out;
}

inline std::vector<int> parse_int_list(const std::string& s, const char* what) {
  return parse_list<int>(s, what,
                         [](const std::string& t, std::size_t& used) { return std::stoi(t, &used); });
}

inline std::vector<double> parse_double_list(const std::string& s, const char* what) {
  return parse_list<double>(s, what, [](const std::string& t, std::size_t& used) {
    return std::stod(t, &used);
  });
}

}  // namespace detail

// Defaults, then config file, then presets and flags, in increasing priority.
inline CliRun build_run(Command command, const Options& opt) {
  CliRun run;
  run.command = command;
  if (!opt.config_path.empty()) {
    run = load_config_file(opt.config_path, command);
  } else if (opt.preset_case == 0) {
    run.exp.params = table_case(2);  // default preset
  }
  ExperimentConfig& e = run.exp;

  if (opt.preset_case != 0) e.params = table_case(opt.preset_case);
  if (opt.has_hurst) {
    const KernelSpec& k = e.params.kernel;
    if (!k.fractional())
      throw ConfigError("flag --hurst: only applies to fractional kernels");
    // Override resets beta to the 1/Gamma(H + 1/2) convention of the presets.
    e.params.kernel = KernelSpec::shifted_fractional(opt.hurst, k.epsilon);
  }
  if (!opt.steps.empty()) e.steps_list = detail::parse_int_list(opt.steps, "steps");
  if (opt.paths >= 0) e.paths = opt.paths;
  if (opt.seed >= 0) e.seed = static_cast<std::uint64_t>(opt.seed);
  if (opt.threads >= 0) e.threads = opt.threads;
  if (opt.antithetic) e.antithetic = true;
  if (opt.resolvent) e.resolvent = true;
  if (opt.has_w) e.target.w = opt.w;
  if (!opt.strikes.empty())
    e.target.strikes = detail::parse_double_list(opt.strikes, "strikes");
  if (!opt.scheme.empty()) {
    if (opt.scheme == "ivi")
      e.scheme = SchemeKind::iVi;
    else if (opt.scheme == "explicit")
      e.scheme = SchemeKind::Explicit;
    else
      throw ConfigError("flag --scheme: must be 'ivi' or 'explicit'");
  }
  if (opt.riccati_m > 0) e.riccati_m = opt.riccati_m;

  // command-determined target kind and per-command defaults
  switch (command) {
    case Command::Simulate:
      e.target.kind = Target::PathSample;
      run.dump_paths = static_cast<int>(opt.paths >= 0 ? opt.paths : run.dump_paths);
      e.paths = std::max<std::int64_t>(run.dump_paths, 1);
      break;
    case Command::LaplaceError:
      e.target.kind = Target::LaplaceU;
      break;
    case Command::CharCheck:
      e.target.kind = Target::LaplaceU;
      if (opt.steps.empty() && opt.config_path.empty()) e.steps_list = {1};
      break;
    case Command::Price:
    case Command::Smile:
      e.target.kind = Target::Smile;
      if (e.target.strikes.empty()) e.target.strikes = {1.0};
      break;
  }

  if (!opt.out_dir.empty()) {
    run.out_dir = opt.out_dir;
  } else if (const char* env = std::getenv(out_dir_env); env != nullptr && *env != '\0') {
    run.out_dir = env;
  }
  return run;
}

// CSV/manifest plumbing -------------------------------------------------------

inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct CsvWriter {
  std::ofstream out;

  explicit CsvWriter(const std::filesystem::path& path) : out(path) {
    if (!out) throw std::runtime_error("cannot open output file " + path.string());
  }
  void comment(const std::string& text) { out << "# " << text << "\n"; }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ",";
      out << cells[i];
    }
    out << "\n";
  }
};

inline void write_manifest(const CliRun& run, const std::filesystem::path& path,
                           const std::vector<std::string>& outputs, double wall_time) {
  nlohmann::json m;
  m["command"] = command_name(run.command);
  m["config"] = run_to_json(run);
  m["seed"] = run.exp.seed;
  m["tool_version"] = tool_version;
  m["wall_time_seconds"] = wall_time;
  m["outputs"] = outputs;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open manifest file " + path.string());
  out << m.dump(2) << "\n";
}

namespace detail {

inline std::filesystem::path prepare_out_dir(const CliRun& run) {
  std::filesystem::path dir(run.out_dir);
  std::filesystem::create_directories(dir);
  return dir;
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

}  // namespace detail

// Subcommands -----------------------------------------------------------------

inline std::filesystem::path do_simulate(const CliRun& run) {
  const auto dir = detail::prepare_out_dir(run);
  detail::Timer timer;
  if (run.dump_paths < 1 || run.dump_paths > 100)
    throw ConfigError("simulate: path count must be in 1..100");
  ExperimentConfig cfg = run.exp;
  cfg.target.kind = Target::PathSample;
  const auto rows = path_dump(cfg, run.dump_paths);
  const auto csv_path = dir / "paths.csv";
  {
    CsvWriter csv(csv_path);
    csv.row({"path", "i", "t_i", "U", "Z", "V", "logS"});
    for (const auto& r : rows)
      csv.row({std::to_string(r.path), std::to_string(r.step), fmt17(r.t), fmt17(r.u), fmt17(r.z),
               fmt17(r.v), fmt17(r.logS)});
  }
  write_manifest(run, dir / "paths_manifest.json", {csv_path.string()}, timer.seconds());
  return csv_path;
}

inline std::filesystem::path do_laplace_error(const CliRun& run) {
  const auto dir = detail::prepare_out_dir(run);
  detail::Timer timer;
  ExperimentConfig cfg = run.exp;
  cfg.target.kind = Target::LaplaceU;
  const auto rows = error_table(cfg);
  const auto csv_path = dir / "laplace_error.csv";
  {
    CsvWriter csv(csv_path);
    csv.comment("reference = " + fmt17(rows.empty() ? 0.0 : rows.front().reference));
    csv.row({"scheme", "steps", "value", "abs_error", "std_error", "reference"});
    for (const auto& r : rows)
      csv.row({r.scheme == SchemeKind::iVi ? "ivi" : "explicit", std::to_string(r.steps),
               fmt17(r.value), fmt17(r.abs_error), fmt17(r.std_error), fmt17(r.reference)});
  }
  write_manifest(run, dir / "laplace_error_manifest.json", {csv_path.string()}, timer.seconds());
  return csv_path;
}

inline std::filesystem::path do_price(const CliRun& run) {
  const auto dir = detail::prepare_out_dir(run);
  detail::Timer timer;
  FourierPricer pricer(run.exp.params, run.exp.riccati_m);
  const auto csv_path = dir / "price.csv";
  {
    CsvWriter csv(csv_path);
    csv.row({"strike", "price", "implied_vol"});
    for (double strike : run.exp.target.strikes) {
      const double price = pricer.call_price(strike);
      csv.row({fmt17(strike), fmt17(price),
               fmt17(implied_vol(price, run.exp.params.S0, strike, run.exp.params.T))});
    }
  }
  write_manifest(run, dir / "price_manifest.json", {csv_path.string()}, timer.seconds());
  return csv_path;
}

inline std::filesystem::path do_smile(const CliRun& run) {
  const auto dir = detail::prepare_out_dir(run);
  detail::Timer timer;
  const ExperimentConfig& e = run.exp;
  const auto rows = smile(e.params, e.target.strikes, e.steps_list.front(), e.paths, e.seed,
                          e.threads, e.antithetic, e.riccati_m);
  const auto csv_path = dir / "smile.csv";
  {
    CsvWriter csv(csv_path);
    csv.row({"strike", "price_mc", "se_price", "price_ref", "iv_mc", "iv_ref", "se_iv"});
    for (const auto& r : rows)
      csv.row({fmt17(r.strike), fmt17(r.price_mc), fmt17(r.se_price), fmt17(r.price_ref),
               fmt17(r.iv_mc), fmt17(r.iv_ref), fmt17(r.se_iv)});
  }
  write_manifest(run, dir / "smile_manifest.json", {csv_path.string()}, timer.seconds());
  return csv_path;
}

inline std::filesystem::path do_char_check(const CliRun& run) {
  const auto dir = detail::prepare_out_dir(run);
  detail::Timer timer;
  const ExperimentConfig& e = run.exp;
  const int n = e.steps_list.front();
  const auto check = one_step_char_check(e.params, n, e.target.w, e.paths, e.seed);
  const auto csv_path = dir / "char_check.csv";
  {
    CsvWriter csv(csv_path);
    csv.row({"w", "steps", "paths", "mc", "exact", "std_error", "abs_diff", "psi_residual"});
    csv.row({fmt17(e.target.w), std::to_string(n), std::to_string(e.paths),
             fmt17(check.mc.real()), fmt17(check.exact.real()), fmt17(check.se),
             fmt17(std::abs(check.mc - check.exact)), fmt17(check.psi_residual)});
  }
  write_manifest(run, dir / "char_check_manifest.json", {csv_path.string()}, timer.seconds());
  return csv_path;
}

// Exit-code contract: 0 ok, 2 config, 3 numeric.
inline int run_command(Command command, const Options& opt) {
  try {
    CliRun run;
    try {
      run = build_run(command, opt);
      run.exp.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    std::filesystem::path written;
    switch (command) {
      case Command::Simulate: written = do_simulate(run); break;
      case Command::LaplaceError: written = do_laplace_error(run); break;
      case Command::Price: written = do_price(run); break;
      case Command::Smile: written = do_smile(run); break;
      case Command::CharCheck: written = do_char_check(run); break;
    }
    std::cout << "wrote " << written.string() << "\n";
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace ivi::cli
