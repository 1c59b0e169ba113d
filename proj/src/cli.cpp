#include "rmt/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <Eigen/Dense>
#include <json.hpp>

#include "rmt/errors.hpp"

#ifndef RMT_VERSION
#define RMT_VERSION "0.0.0"
#endif

namespace rmt::cli {

namespace {

using harness::Model;
using harness::ModelKind;
using ensembles::Kind;

const char* const kEnsembleNames = "quotient, wigner-wishart-sum, wigner-wishart-product, two-wishart-sum, "
                                   "wishart, gue, correlated-wishart";

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string format17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_plain_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  const char* begin = t.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (t.empty() || end != begin + t.size() || !std::isfinite(v)) {
    throw UsageError("--" + key + ": '" + text + "' is not a finite number");
  }
  return v;
}

// Accepts decimals and simple fractions such as 1/3.
double parse_real(const std::string& key, const std::string& text) {
  const auto slash = text.find('/');
  if (slash == std::string::npos) return parse_plain_double(key, text);
  const double num = parse_plain_double(key, text.substr(0, slash));
  const double den = parse_plain_double(key, text.substr(slash + 1));
  if (den == 0.0) throw UsageError("--" + key + ": zero denominator in '" + text + "'");
  return num / den;
}

template <class Int>
Int parse_integer(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  Int v{};
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw UsageError("--" + key + ": '" + text + "' is not a valid integer");
  }
  return v;
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_real(key, item));
  if (out.empty()) throw UsageError("--" + key + ": empty list");
  return out;
}

std::optional<Command> parse_command(const std::string& name) {
  if (name == "density") return Command::Density;
  if (name == "corr2") return Command::Corr2;
  if (name == "sample") return Command::Sample;
  if (name == "validate") return Command::Validate;
  if (name == "info") return Command::Info;
  return std::nullopt;
}

const char* command_name(Command c) {
  switch (c) {
    case Command::Density:
      return "density";
    case Command::Corr2:
      return "corr2";
    case Command::Sample:
      return "sample";
    case Command::Validate:
      return "validate";
    case Command::Info:
      return "info";
  }
  return "?";
}

Model build_model(const std::string& name, const std::map<std::string, std::string>& kv) {
  auto get = [&kv](const std::string& key) -> std::optional<std::string> {
    const auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    return it->second;
  };
  auto need_int = [&](const std::string& key) {
    const auto v = get(key);
    if (!v) throw UsageError("--" + key + " is required for ensemble '" + name + "'");
    return parse_integer<int>(key, *v);
  };
  auto real_or = [&](const std::string& key, double fallback) {
    const auto v = get(key);
    return v ? parse_real(key, *v) : fallback;
  };

  Model model;
  if (const auto kind = ensembles::parse_kind(name)) {
    ensembles::EnsembleSpec spec;
    spec.kind = *kind;
    spec.n = need_int("n");
    spec.n_B = need_int("nB");
    if (spec.uses_n_A()) spec.n_A = need_int("nA");
    if (*kind != Kind::WignerWishartProduct) {
      spec.a = real_or("a", 1.0);
      spec.b = real_or("b", 1.0);
    }
    if (*kind == Kind::TwoWishartSum) {
      const auto s = get("sigma");
      if (!s) throw UsageError("--sigma is required for ensemble '" + name + "'");
      spec.sigma = parse_list("sigma", *s);
    }
    model = Model::composite(spec);
  } else if (name == "wishart") {
    model = Model::wishart(need_int("n"), need_int("nB"));
  } else if (name == "gue") {
    model = Model::gaussian_wigner(need_int("n"));
  } else if (name == "correlated-wishart") {
    const auto s = get("sigma");
    if (!s) throw UsageError("--sigma is required for ensemble '" + name + "'");
    model = Model::correlated_wishart(need_int("n"), need_int("nB"), parse_list("sigma", *s));
  } else {
    throw UsageError("--ensemble: unknown ensemble '" + name + "' (expected one of " + kEnsembleNames + ")");
  }
  try {
    model.validate();
  } catch (const DomainError& e) {
    throw UsageError(std::string("invalid ensemble parameters: ") + e.what());
  }
  return model;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  // metric,value tables carry a name per row instead of a numeric first column
  std::vector<std::string> row_names;
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();
};

nlohmann::ordered_json meta_json(const RunConfig& cfg, const Table& table) {
  nlohmann::ordered_json meta;
  meta["version"] = RMT_VERSION;
  meta["command"] = command_name(cfg.command);
  meta["model"] = cfg.model.label();
  meta["seed"] = cfg.seed;
  meta["timestamp"] = utc_timestamp();
  meta["config"] = cfg.effective;
  for (const auto& [k, v] : table.extra.items()) meta[k] = v;
  return meta;
}

std::string json_number(double x) {
  if (std::isfinite(x)) return format17(x);
  if (std::isnan(x)) return "null";
  return x > 0 ? "\"inf\"" : "\"-inf\"";
}

void write_csv(std::ostream& os, const nlohmann::ordered_json& meta, const Table& table) {
  for (const auto& [k, v] : meta.items()) {
    if (k == "config") {
      for (const auto& [ck, cv] : v.items()) os << "# config." << ck << " = " << cv.get<std::string>() << '\n';
    } else {
      os << "# " << k << " = " << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
    }
  }
  for (std::size_t c = 0; c < table.columns.size(); ++c) os << (c ? "," : "") << table.columns[c];
  os << '\n';
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    bool first = true;
    if (!table.row_names.empty()) {
      os << table.row_names[r];
      first = false;
    }
    for (double v : table.rows[r]) {
      os << (first ? "" : ",") << format17(v);
      first = false;
    }
    os << '\n';
  }
}

void write_json(std::ostream& os, const nlohmann::ordered_json& meta, const Table& table) {
  os << "{\n  \"meta\": " << meta.dump() << ",\n  \"columns\": " << nlohmann::json(table.columns).dump()
     << ",\n  \"rows\": [";
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    os << (r ? ",\n    [" : "\n    [");
    bool first = true;
    if (!table.row_names.empty()) {
      os << nlohmann::json(table.row_names[r]).dump();
      first = false;
    }
    for (double v : table.rows[r]) {
      os << (first ? "" : ", ") << json_number(v);
      first = false;
    }
    os << ']';
  }
  os << (table.rows.empty() ? "]\n}\n" : "\n  ]\n}\n");
}

void emit(const RunConfig& cfg, const Table& table) {
  const auto meta = meta_json(cfg, table);
  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!cfg.output.empty()) {
    file.open(cfg.output);
    if (!file) throw UsageError("--output: cannot open '" + cfg.output + "' for writing");
    os = &file;
  }
  if (cfg.format == Format::Csv) {
    write_csv(*os, meta, table);
  } else {
    write_json(*os, meta, table);
  }
  os->flush();
  if (!*os) throw UsageError("--output: write failed");
}

std::pair<double, double> plot_range(const RunConfig& cfg, const harness::DensityModel& dm) {
  if (cfg.grid_min && cfg.grid_max) return {*cfg.grid_min, *cfg.grid_max};
  const auto [lo, hi] = harness::default_range(dm);
  return {cfg.grid_min.value_or(lo), cfg.grid_max.value_or(hi)};
}

std::vector<double> checked_grid(const RunConfig& cfg, const harness::DensityModel& dm, int points) {
  const auto [lo, hi] = plot_range(cfg, dm);
  if (points > 1 && !(lo < hi)) throw UsageError("--grid-min must be below --grid-max");
  auto grid = harness::linspace(lo, hi, points);
  const auto support = cfg.model.support();
  for (double x : grid) {
    if (!support.contains(x)) {
      throw UsageError("grid point " + format17(x) + " lies outside the support of " + cfg.model.label());
    }
  }
  return grid;
}

std::vector<double> bin_edges(const RunConfig& cfg, const harness::DensityModel& dm) {
  if (cfg.grid_min || cfg.grid_max) {
    const auto [lo, hi] = plot_range(cfg, dm);
    if (!(lo < hi)) throw UsageError("--grid-min must be below --grid-max");
    return harness::linspace(lo, hi, cfg.bins + 1);
  }
  return harness::default_bins(dm, cfg.bins);
}

std::uint64_t require_trials(const RunConfig& cfg) {
  if (!cfg.trials) throw UsageError(std::string("--trials is required for ") + command_name(cfg.command));
  return *cfg.trials;
}

// log10 of the 2-norm condition number of the moment matrix after scaling
// every row and then every column to unit maximum.
double equilibrated_condition(const biortho::LogMatrix& h) {
  const std::size_t n = h.size();
  std::vector<double> row(n, -INFINITY), col(n, -INFINITY);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!h(i, j).is_zero()) row[i] = std::max(row[i], h(i, j).log_magnitude());
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!h(i, j).is_zero()) col[j] = std::max(col[j], h(i, j).log_magnitude() - row[i]);
    }
  }
  Eigen::MatrixXd m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const auto& v = h(i, j);
      m(i, j) = v.is_zero() ? 0.0 : v.sign() * std::exp(v.log_magnitude() - row[i] - col[j]);
    }
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s[s.size() - 1] == 0.0) return INFINITY;
  return std::log10(s[0] / s[s.size() - 1]);
}

Table run_density(const RunConfig& cfg, const harness::DensityModel& dm) {
  const auto grid = checked_grid(cfg, dm, cfg.grid_points);
  const auto curve = harness::analytic_curve(dm, grid, cfg.threads);
  Table t;
  t.columns = {"lambda", "p"};
  for (std::size_t i = 0; i < grid.size(); ++i) t.rows.push_back({grid[i], curve.values[i]});
  return t;
}

Table run_corr2(const RunConfig& cfg, const harness::DensityModel& dm) {
  if (!dm.system()) throw UsageError("corr2 needs a composite ensemble, got " + cfg.model.label());
  const auto grid = checked_grid(cfg, dm, cfg.grid_points);
  const auto surface = harness::correlation_surface(*dm.system(), grid, grid, cfg.threads);
  Table t;
  t.columns = {"lambda1", "lambda2", "R2"};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = 0; j < grid.size(); ++j) t.rows.push_back({grid[i], grid[j], surface.at(i, j)});
  }
  return t;
}

Table run_sample(const RunConfig& cfg, const harness::DensityModel& dm) {
  const auto trials = require_trials(cfg);
  const auto edges = bin_edges(cfg, dm);
  const auto hist = harness::run_monte_carlo(cfg.model, trials, cfg.seed, edges, cfg.threads);
  Table t;
  t.columns = {"bin_lo", "bin_hi", "count"};
  for (std::size_t k = 0; k < hist.counts.size(); ++k) {
    t.rows.push_back({edges[k], edges[k + 1], static_cast<double>(hist.counts[k])});
  }
  t.extra["trials"] = hist.trials;
  t.extra["eigenvalues_per_trial"] = hist.eigenvalues_per_trial;
  t.extra["below"] = hist.below;
  t.extra["above"] = hist.above;
  return t;
}

Table run_validate(const RunConfig& cfg, const harness::DensityModel& dm, bool& passed) {
  const auto trials = require_trials(cfg);
  const auto edges = bin_edges(cfg, dm);
  const auto curve = harness::analytic_curve(dm, harness::refine_edges(edges, 8, dm.singular_points()), cfg.threads);
  const auto hist = harness::run_monte_carlo(cfg.model, trials, cfg.seed, edges, cfg.threads);
  const auto metrics = harness::compare(curve, hist);
  passed = metrics.l1 <= cfg.threshold;
  Table t;
  t.columns = {"metric", "value"};
  auto add = [&t](const char* name, double v) {
    t.row_names.push_back(name);
    t.rows.push_back({v});
  };
  add("l1", metrics.l1);
  add("sup", metrics.sup);
  add("threshold", cfg.threshold);
  add("pass", passed ? 1.0 : 0.0);
  add("trials", static_cast<double>(hist.trials));
  add("bins", static_cast<double>(hist.counts.size()));
  add("below", static_cast<double>(hist.below));
  add("above", static_cast<double>(hist.above));
  add("curve_coverage", curve.coverage);
  return t;
}

Table run_info(const RunConfig& cfg, const harness::DensityModel& dm) {
  Table t;
  t.columns = {"metric", "value"};
  auto add = [&t](const char* name, double v) {
    t.row_names.push_back(name);
    t.rows.push_back({v});
  };
  const auto support = cfg.model.support();
  add("n", cfg.model.eigenvalue_count());
  add("support_lo", support.lo);
  add("support_hi", support.hi);
  const auto [lo, hi] = harness::default_range(dm);
  add("range_lo", lo);
  add("range_hi", hi);
  if (const auto* sys = dm.system()) {
    const auto det = biortho::stable_log_det(sys->moment_matrix());
    add("det_h_sign", det.sign());
    add("log_abs_det_h", det.log_magnitude());
    add("log_norm_C", sys->norm().log_magnitude());
    add("log10_condition_h", equilibrated_condition(sys->moment_matrix()));
    add("total_mass", harness::total_mass(*sys));
  }
  return t;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "ensemble", "n",      "nA",     "nB",     "a",       "b",         "sigma", "grid-min", "grid-max",
      "grid-points", "bins", "trials", "seed", "output", "format", "threads", "threshold"};
  return keys;
}

std::map<std::string, std::string> parse_config_text(const std::string& text, const std::string& origin) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  const auto& keys = config_keys();
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = origin + ":" + std::to_string(number);
    if (eq == std::string::npos) throw UsageError(where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw UsageError(where + ": unknown key '" + key + "'");
    }
    if (value.empty()) throw UsageError(where + ": empty value for '" + key + "'");
    out[key] = value;
  }
  return out;
}

RunConfig parse_config(const std::vector<std::string>& args) {
  CLI::App app{"Eigenvalue densities of composite random matrix models", "rmt"};
  std::string command;
  std::string config_path;
  app.add_option("command", command, "density | corr2 | sample | validate | info")->required();
  app.add_option("--config", config_path, "File of 'key = value' lines; flags take precedence");
  std::map<std::string, std::string> flag_values;
  std::map<std::string, CLI::Option*> flag_options;
  const std::map<std::string, std::string> help = {
      {"ensemble", std::string("Model name: ") + kEnsembleNames},
      {"n", "Matrix size"},
      {"nA", "Degrees of freedom of A"},
      {"nB", "Degrees of freedom of B (also of the wishart references)"},
      {"a", "Scale a (number or p/q)"},
      {"b", "Scale b (number or p/q)"},
      {"sigma", "Comma-separated covariance eigenvalues"},
      {"grid-min", "Left end of the grid or bin range"},
      {"grid-max", "Right end of the grid or bin range"},
      {"grid-points", "Grid points per axis (density 400, corr2 60)"},
      {"bins", "Histogram bins (60)"},
      {"trials", "Monte Carlo trials (sample, validate)"},
      {"seed", "Random seed (42)"},
      {"output", "Output file (standard output when absent)"},
      {"format", "csv or json"},
      {"threads", "Worker threads; RMT_THREADS is the fallback"},
      {"threshold", "L1 pass threshold for validate (0.02)"},
  };
  for (const auto& key : config_keys()) {
    flag_options[key] = app.add_option("--" + key, flag_values[key], help.at(key));
  }
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(app.help());
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  RunConfig cfg;
  const auto cmd = parse_command(command);
  if (!cmd) throw UsageError("unknown command '" + command + "' (expected density, corr2, sample, validate, info)");
  cfg.command = *cmd;

  std::map<std::string, std::string> kv;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw UsageError("--config: cannot read '" + config_path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    kv = parse_config_text(buf.str(), config_path);
  }
  for (const auto& key : config_keys()) {
    if (flag_options[key]->count() > 0) kv[key] = flag_values[key];
  }
  if (!kv.count("threads")) {
    if (const char* env = std::getenv("RMT_THREADS"); env && *env) {
      try {
        kv["threads"] = std::to_string(parse_integer<int>("threads", env));
      } catch (const UsageError&) {
        throw UsageError(std::string("RMT_THREADS: '") + env + "' is not a valid integer");
      }
    }
  }

  if (!kv.count("ensemble")) throw UsageError("--ensemble is required");
  cfg.ensemble = kv["ensemble"];
  cfg.model = build_model(cfg.ensemble, kv);

  if (kv.count("grid-min")) cfg.grid_min = parse_real("grid-min", kv["grid-min"]);
  if (kv.count("grid-max")) cfg.grid_max = parse_real("grid-max", kv["grid-max"]);
  cfg.grid_points = cfg.command == Command::Corr2 ? 60 : 400;
  if (kv.count("grid-points")) cfg.grid_points = parse_integer<int>("grid-points", kv["grid-points"]);
  if (cfg.grid_points < 1) throw UsageError("--grid-points must be >= 1");
  if (kv.count("bins")) cfg.bins = parse_integer<int>("bins", kv["bins"]);
  if (cfg.bins < 1) throw UsageError("--bins must be >= 1");
  if (kv.count("trials")) {
    cfg.trials = parse_integer<std::uint64_t>("trials", kv["trials"]);
    if (*cfg.trials == 0) throw UsageError("--trials must be >= 1");
  }
  if (kv.count("seed")) cfg.seed = parse_integer<std::uint64_t>("seed", kv["seed"]);
  if (kv.count("output")) cfg.output = kv["output"];
  if (kv.count("format")) {
    if (kv["format"] == "csv") {
      cfg.format = Format::Csv;
    } else if (kv["format"] == "json") {
      cfg.format = Format::Json;
    } else {
      throw UsageError("--format: expected csv or json, got '" + kv["format"] + "'");
    }
  }
  if (kv.count("threads")) cfg.threads = parse_integer<int>("threads", kv["threads"]);
  if (cfg.threads < 0) throw UsageError("--threads must be >= 0");
  if (kv.count("threshold")) cfg.threshold = parse_real("threshold", kv["threshold"]);
  if (!(cfg.threshold > 0.0)) throw UsageError("--threshold must be positive");
  if ((cfg.command == Command::Sample || cfg.command == Command::Validate) && !cfg.trials) {
    throw UsageError(std::string("--trials is required for ") + command_name(cfg.command));
  }

  cfg.effective = kv;
  cfg.effective["grid-points"] = std::to_string(cfg.grid_points);
  cfg.effective["bins"] = std::to_string(cfg.bins);
  cfg.effective["seed"] = std::to_string(cfg.seed);
  cfg.effective["format"] = cfg.format == Format::Csv ? "csv" : "json";
  cfg.effective["threads"] = std::to_string(cfg.threads);
  cfg.effective["threshold"] = format17(cfg.threshold);
  if (!config_path.empty()) cfg.effective["config"] = config_path;
  return cfg;
}

int run(const RunConfig& cfg, std::ostream& diag) {
  try {
    const harness::DensityModel dm(cfg.model);
    bool passed = true;
    Table table;
    switch (cfg.command) {
      case Command::Density:
        table = run_density(cfg, dm);
        break;
      case Command::Corr2:
        table = run_corr2(cfg, dm);
        break;
      case Command::Sample:
        table = run_sample(cfg, dm);
        break;
      case Command::Validate:
        table = run_validate(cfg, dm, passed);
        break;
      case Command::Info:
        table = run_info(cfg, dm);
        break;
    }
    emit(cfg, table);
    if (!passed) {
      diag << "validate: l1 " << format17(table.rows[0][0]) << " exceeds threshold " << format17(cfg.threshold)
           << '\n';
      return kExitValidationFailed;
    }
    return kExitOk;
  } catch (const UsageError& e) {
    diag << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const SupportError& e) {
    diag << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    diag << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const CoverageError& e) {
    diag << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericalError& e) {
    diag << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    diag << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}

int main_entry(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  RunConfig cfg;
  try {
    cfg = parse_config(args);
  } catch (const HelpRequested& h) {
    std::cout << h.what();
    return kExitOk;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\nrun 'rmt --help' for the list of flags\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }
  return run(cfg, std::cerr);
}

}  // namespace rmt::cli
