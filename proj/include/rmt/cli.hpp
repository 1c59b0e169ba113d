#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rmt/harness.hpp"

namespace rmt::cli {

enum class Command { Density, Corr2, Sample, Validate, Info };
enum class Format { Csv, Json };

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidationFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

/// Bad flag, config key or value; maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown by parse_config for -h/--help; carries the help text.
class HelpRequested : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  Command command = Command::Info;
  std::string ensemble;  // name as given, e.g. "quotient" or "gue"
  harness::Model model;
  std::optional<double> grid_min;
  std::optional<double> grid_max;
  int grid_points = 400;
  int bins = 60;
  std::optional<std::uint64_t> trials;
  std::uint64_t seed = 42;
  std::string output;  // empty: standard output
  Format format = Format::Csv;
  int threads = 0;  // 0: available parallelism
  double threshold = harness::kDefaultL1Threshold;
  /// Every key with its effective value, echoed into output metadata.
  std::map<std::string, std::string> effective;
};

/// Keys accepted both as `--key value` flags and in the config file.
const std::vector<std::string>& config_keys();

/// Parses `key = value` lines; `#` starts a comment. Unknown keys and
/// malformed lines throw UsageError.
std::map<std::string, std::string> parse_config_text(const std::string& text, const std::string& origin);

/// `args` excludes the program name: `<command> [--key value]...`.
/// Values from `--config FILE` are read first and overridden by flags;
/// RMT_THREADS is used when neither sets `threads`.
RunConfig parse_config(const std::vector<std::string>& args);

/// Executes the command and writes its artifact. Returns the exit code;
/// diagnostics go to `diag`.
int run(const RunConfig& config, std::ostream& diag);

/// parse_config + run with the exit-code contract applied to every error.
int main_entry(int argc, char** argv);

}  // namespace rmt::cli
