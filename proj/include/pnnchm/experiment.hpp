#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pnnchm/chm.hpp"
#include "pnnchm/dataset_io.hpp"
#include "pnnchm/evaluation.hpp"

namespace pnnchm {

/// A column of the result tables: the hybrid or one single method.
struct Contender {
  bool hybrid = true;
  Method single = Method::PSO;

  std::string name() const;
  bool operator==(const Contender&) const = default;
};

/// Accepts "cHM" (any case) or a method name.
Contender contender_from_string(std::string_view name);

/// Table column order: cHM, BAT, BFO, PSO, FPA, SA.
std::vector<Contender> default_contenders();

struct ExperimentConfig {
  std::vector<std::string> datasets;  // registry names, or {"all"}
  std::vector<Contender> methods = default_contenders();
  int runs = 10;
  std::uint64_t seed = 0;
  double test_fraction = 0.2;
  bool zscore = false;
  bool svg = true;
  std::size_t threads = 0;  // 0 picks the hardware concurrency
  ChmConfig chm;
  std::filesystem::path data_dir;  // empty means data_directory()
  std::filesystem::path registry;  // empty means default_registry_path()

  void validate() const;
};

/// JSON config with nested sections "chm", "pso", "bat", "bfo", "sa" and
/// "fpa". Unknown keys are rejected. Throws std::invalid_argument.
ExperimentConfig parse_experiment_config(std::string_view json_text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct RunRecord {
  int run = 0;
  std::uint64_t seed = 0;
  RunMetrics metrics;
  double train_fitness = 0.0;  // leave-one-out error of the returned bandwidths
  std::vector<double> smoothing;
  std::int64_t fe_used = 0;
  std::optional<ChmTrace> trace;
};

struct CellResult {
  std::string dataset;  // registry name
  std::string display_name;
  Contender method;
  std::vector<RunRecord> runs;
  std::optional<MethodSummary> summary;
  std::string error;  // empty on success

  bool ok() const { return error.empty(); }
};

struct BenchmarkReport {
  std::vector<std::string> datasets;  // registry names, table row order
  std::vector<std::string> display_names;
  std::vector<Contender> methods;
  std::vector<CellResult> cells;  // dataset-major, then method
  std::vector<Method> portfolio;
  int iterations = 0;

  const CellResult& cell(std::size_t dataset, std::size_t method) const {
    return cells.at(dataset * methods.size() + method);
  }
  bool all_ok() const;
};

/// Seeded train/test split of `ds` plus one training run of `method`.
RunRecord run_once(const Dataset& ds, const Contender& method,
                   const ExperimentConfig& cfg, int run);

/// Runs every dataset x method x run cell. Cells that throw are recorded
/// with their error and do not stop the others.
BenchmarkReport run_benchmark(const ExperimentConfig& cfg,
                              std::ostream* log = nullptr);

/// Writes the metric tables, selection frequencies, traces, run records and
/// failure list into `out`. Output depends only on the report.
void write_benchmark(const BenchmarkReport& report,
                     const std::filesystem::path& out, bool svg = true);

/// Per-iteration selection counts: result[dataset][method][iteration].
std::vector<std::vector<std::vector<std::size_t>>> selection_frequency(
    const BenchmarkReport& report);

std::string trace_to_jsonl(const ChmTrace& trace, std::string_view dataset,
                           int run);

int cmd_fetch(const std::filesystem::path& registry, const std::filesystem::path& dir,
              bool force, const std::vector<std::string>& only, std::ostream& log);

int cmd_train(const std::string& dataset, const std::string& method,
              std::uint64_t seed, int runs, const std::filesystem::path& out,
              ExperimentConfig cfg, std::ostream& log);

int cmd_benchmark(const ExperimentConfig& cfg, const std::filesystem::path& out,
                  std::ostream& log);

}  // namespace pnnchm
