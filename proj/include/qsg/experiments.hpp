#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qsg {

inline constexpr const char* kVersion = "0.1.0";

// Process exit codes shared by the CLI and the experiment driver.
enum ExitCode : int {
  kExitSuccess = 0,
  kExitUsage = 2,      // bad config / bad invocation
  kExitNumeric = 3,    // eigensolver or overflow trouble mid-run
  kExitAssertion = 4,  // an asserted inequality flag came back false
};

// Flat key=value config.  Raw strings are kept as given; typed accessors
// throw UsageError naming the offending field and record every resolution
// (including applied defaults) for the manifest.
struct ExperimentConfig {
  std::string experiment;
  std::map<std::string, std::string> values;
  std::string source = "-";  // file the config came from, for the manifest

  mutable std::map<std::string, std::string> resolved;

  bool has(const std::string& key) const { return values.count(key) != 0; }

  std::string get_string(const std::string& key) const;
  std::string get_string_or(const std::string& key, const std::string& fallback) const;
  double get_real(const std::string& key) const;
  double get_real_or(const std::string& key, double fallback) const;
  long get_int(const std::string& key) const;
  long get_int_or(const std::string& key, long fallback) const;
  std::uint64_t get_u64_or(const std::string& key, std::uint64_t fallback) const;
  std::vector<double> get_real_list(const std::string& key) const;
  std::vector<double> get_real_list_or(const std::string& key,
                                       const std::vector<double>& fallback) const;
  std::vector<long> get_int_list_or(const std::string& key,
                                    const std::vector<long>& fallback) const;
};

// Lines of `key = value`; '#' starts a comment; keys validated against the
// schema.  `experiment` names the experiment chosen on the command line; a
// conflicting `experiment` key in the file is a usage error.
ExperimentConfig parse_config_text(const std::string& text, const std::string& experiment);
ExperimentConfig parse_config_file(const std::filesystem::path& path,
                                   const std::string& experiment);

const std::vector<std::string>& experiment_names();

struct RunOptions {
  std::optional<std::filesystem::path> output_dir;  // --out
  std::optional<std::uint64_t> master_seed;         // --seed
  int workers = 1;
};

// Output directory precedence: --out, then $QSG_OUTPUT_DIR, then the config's
// output_dir, then ./qsg-out.  Seed precedence: --seed, then master_seed in
// the config, then 1.
std::filesystem::path resolve_output_dir(const ExperimentConfig& config, const RunOptions& opts);

// Runs one experiment: writes `manifest` (status running), then results.csv,
// then the manifest again with the completion status and the fully resolved
// config.  Throws UsageError for config problems detected before output
// exists; later failures are folded into the returned exit code.
int run_experiment(const ExperimentConfig& config, const RunOptions& opts);

// %.17g — the round-trippable real format used in results.csv.
std::string format_real(double x);

}  // namespace qsg
