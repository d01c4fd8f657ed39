#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "pnnchm/dataset.hpp"
#include "pnnchm/metaheuristics.hpp"
#include "pnnchm/pnn.hpp"

namespace pnnchm {

struct MethodParamSet {
  PsoParams pso;
  BatParams bat;
  BfoParams bfo;
  SaParams sa;
  FpaParams fpa;

  MethodParams get(Method m) const;
  bool operator==(const MethodParamSet&) const = default;
};

struct ChmConfig {
  int n = 5;
  std::size_t n_p = 20;
  std::vector<Method> methods = {Method::PSO, Method::FPA, Method::BAT,
                                 Method::BFO, Method::SA};
  MethodParamSet params;
  double fitness_threshold = 1e-8;
  std::int64_t probing_multiplier = 30;
  std::int64_t fit_multiplier = 100;
  Bounds init_range{0.0, 10.0};
  Bounds bounds{0.0, 10000.0};
  std::uint64_t seed = 0;
  SmoothingKind kind = SmoothingKind::PerFeature;

  /// Throws std::invalid_argument if any field is out of range.
  void validate() const;
  std::int64_t max_fe_probing(std::int64_t n_t) const;
  std::int64_t max_fe_fit(std::int64_t n_t) const;
};

enum class Phase { Probe, Fit };

struct ProbeRecord {
  Method method = Method::PSO;
  double best_fitness = 1.0;
  std::int64_t fe_used = 0;
  bool converged = false;
  /// Fingerprint of the method's population when probing ended.
  std::uint64_t end_fingerprint = 0;
};

struct IterationRecord {
  int iteration = 0;
  std::uint64_t start_fingerprint = 0;
  std::vector<ProbeRecord> probes;
  Method selected = Method::PSO;
  bool tie = false;
  /// Fingerprint of the population the fit phase started from.
  std::uint64_t fit_start_fingerprint = 0;
  bool fit_ran = false;
  double fit_best_fitness = 1.0;
  std::int64_t fit_fe_used = 0;
  bool converged = false;
};

struct ChmTrace {
  std::int64_t n_t = 0;
  std::int64_t max_fe_probing = 0;
  std::int64_t max_fe_fit = 0;
  std::vector<IterationRecord> iterations;
  bool converged = false;

  std::int64_t total_fe() const;
  /// Selection count per method, indexed like `methods`.
  std::vector<std::size_t> selection_counts(
      const std::vector<Method>& methods) const;
};

/// Observers for the FE-accounting checks. `phase_end` sees the phase's
/// budget after the last evaluation.
struct ChmHooks {
  std::function<void(int iteration, Phase, Method)> phase_begin;
  std::function<void(int iteration, Phase, Method, const FeBudget&)> phase_end;
};

struct ProbeOutcome {
  std::size_t winner = 0;  // index into the method list
  bool tie = false;
  Population population;
  OptimizerState state;
  std::vector<ProbeRecord> records;
  /// Lowest-fitness individual seen by any probed method.
  std::optional<Individual> best;
  bool converged = false;
};

/// Runs every method on its own copy of `start` under `budget_cap` and picks
/// the one with the lowest best fitness. Ties are drawn uniformly with
/// `tie_rng`. A method that triggers the stop rule wins outright and the
/// remaining methods are skipped.
ProbeOutcome probe_phase(const Population& start, const ChmConfig& cfg,
                         const Objective& objective, std::int64_t n_t,
                         std::int64_t budget_cap, std::uint64_t phase_seed,
                         std::mt19937_64& tie_rng, const StopRule& stop = {},
                         const ChmHooks& hooks = {}, int iteration = 0);

struct ChmResult {
  Individual best;
  ChmTrace trace;
  std::int64_t fe_used = 0;
};

/// The probe-then-fit loop over an arbitrary objective. Each evaluation is
/// charged n_t.
ChmResult chm_optimize(const Objective& objective, std::size_t dimension,
                       std::int64_t n_t, const ChmConfig& cfg,
                       const StopRule& stop = {}, const ChmHooks& hooks = {});

/// Total FE one cHM run may spend, used to give single methods equal budget.
std::int64_t chm_total_budget(const ChmConfig& cfg, std::int64_t n_t);

/// One uninterrupted run of `method` for chm_total_budget FE from the same
/// kind of initial population.
ChmResult single_optimize(Method method, const Objective& objective,
                          std::size_t dimension, std::int64_t n_t,
                          const ChmConfig& cfg, const StopRule& stop = {},
                          const ChmHooks& hooks = {});

/// Objective and stop rule used to train on a split: leave-one-out error on
/// `train`, stopping once the fitness threshold is met or a new best
/// classifies `test` perfectly.
struct TrainingProblem {
  std::shared_ptr<const Dataset> train;
  std::shared_ptr<const Dataset> test;
  Objective objective;
  StopRule stop;
  std::int64_t n_t = 0;
  std::size_t dimension = 0;
};

TrainingProblem make_training_problem(const Dataset& train, const Dataset& test,
                                      const ChmConfig& cfg);

struct TrainResult {
  SmoothingSpec smoothing;
  Individual best;
  ChmTrace trace;
  std::int64_t fe_used = 0;
};

TrainResult chm_train(const Dataset& train, const Dataset& test,
                      const ChmConfig& cfg, const ChmHooks& hooks = {});

TrainResult single_train(Method method, const Dataset& train,
                         const Dataset& test, const ChmConfig& cfg,
                         const ChmHooks& hooks = {});

}  // namespace pnnchm
