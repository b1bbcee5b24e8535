#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "qsg/errors.hpp"
#include "qsg/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"qsg: exact-diagonalization and path-integral experiments on disordered "
               "spin-1/2 models"};
  app.get_formatter()->column_width(28);

  std::string experiment;
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int workers = 1;

  app.add_option("experiment", experiment, "experiment name")
      ->required()
      ->check(CLI::IsMember(qsg::experiment_names()));
  app.add_option("--config", config_path, "key = value config file")
      ->required()
      ->check(CLI::ExistingFile);
  auto* out_opt =
      app.add_option("--out", out_dir, "output directory (overrides QSG_OUTPUT_DIR and config)");
  auto* seed_opt = app.add_option("--seed", seed, "master seed (overrides config)");
  app.add_option("--workers", workers, "worker threads")->check(CLI::Range(1, 512));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : qsg::kExitUsage;
  }

  try {
    const qsg::ExperimentConfig config = qsg::parse_config_file(config_path, experiment);
    qsg::RunOptions opts;
    if (out_opt->count() > 0) opts.output_dir = out_dir;
    if (seed_opt->count() > 0) opts.master_seed = seed;
    opts.workers = workers;
    return qsg::run_experiment(config, opts);
  } catch (const qsg::UsageError& e) {
    std::cerr << "qsg: " << e.what() << "\n";
    return qsg::kExitUsage;
  } catch (const qsg::NumericError& e) {
    std::cerr << "qsg: " << e.what() << "\n";
    return qsg::kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "qsg: " << e.what() << "\n";
    return qsg::kExitUsage;
  }
}
