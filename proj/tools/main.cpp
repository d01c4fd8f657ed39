#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "pnnchm/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"PNN smoothing-parameter training with a constrained hybrid metaheuristic"};
  app.require_subcommand(1);

  std::string registry;
  std::string dir;
  bool force = false;
  std::vector<std::string> only;
  auto* fetch = app.add_subcommand("fetch", "Download and convert the benchmark datasets");
  fetch->add_option("--registry", registry, "Dataset registry JSON");
  fetch->add_option("--dir", dir, "Cache directory (default $PNN_CHM_DATA or the build default)");
  fetch->add_flag("--force", force, "Re-download datasets that are already cached");
  fetch->add_option("--only", only, "Restrict to these dataset names");

  std::string dataset;
  std::string method = "cHM";
  std::uint64_t seed = 0;
  int runs = 10;
  std::string out = "out";
  std::string config;
  bool zscore = false;
  auto* train = app.add_subcommand("train", "Train one method on one dataset");
  train->add_option("--dataset", dataset, "Registry name")->required();
  train->add_option("--method", method, "cHM, PSO, BAT, BFO, SA or FPA")->capture_default_str();
  train->add_option("--seed", seed, "Base seed; run r uses seed + r")->capture_default_str();
  train->add_option("--runs", runs, "Independent runs")->capture_default_str()->check(
      CLI::PositiveNumber);
  train->add_option("--out", out, "Output directory")->capture_default_str();
  train->add_option("--config", config, "JSON config with method parameter overrides");
  train->add_flag("--zscore", zscore, "Standardize features on the training split");

  std::string bench_config;
  std::string bench_out = "results";
  std::size_t threads = 0;
  auto* bench = app.add_subcommand("benchmark", "Run the dataset x method grid");
  bench->add_option("--config", bench_config, "JSON experiment config")->required();
  bench->add_option("--out", bench_out, "Output directory")->capture_default_str();
  bench->add_option("--threads", threads, "Worker threads (0 = hardware)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fetch) {
      return pnnchm::cmd_fetch(registry, dir, force, only, std::cerr);
    }
    if (*train) {
      pnnchm::ExperimentConfig cfg;
      if (!config.empty()) cfg = pnnchm::load_experiment_config(config);
      if (zscore) cfg.zscore = true;
      return pnnchm::cmd_train(dataset, method, seed, runs, out, cfg, std::cerr);
    }
    pnnchm::ExperimentConfig cfg = pnnchm::load_experiment_config(bench_config);
    if (threads > 0) cfg.threads = threads;
    return pnnchm::cmd_benchmark(cfg, bench_out, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
