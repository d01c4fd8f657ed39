#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace pnnchm {

enum class Method { PSO, BAT, BFO, SA, FPA };

std::string_view to_string(Method m);
/// Case-insensitive; throws std::invalid_argument for unknown names.
Method method_from_string(std::string_view name);

struct Bounds {
  double lower = 0.0;
  double upper = 10000.0;
  bool operator==(const Bounds&) const = default;
};

struct Individual {
  std::vector<double> position;
  std::optional<double> fitness;
  bool operator==(const Individual&) const = default;
};

struct Population {
  std::vector<Individual> members;
  std::size_t best = 0;

  /// Recomputes `best` over members with a cached fitness.
  void refresh_best();
  const Individual& best_member() const { return members.at(best); }
  /// Drops cached fitness so the next owner re-evaluates every member.
  void clear_fitness();
  bool operator==(const Population&) const = default;
};

/// Function-evaluation accountant. One individual evaluation is charged
/// `per_evaluation` units (the number of samples it classifies).
class FeBudget {
 public:
  FeBudget(std::int64_t cap, std::int64_t per_evaluation);

  std::int64_t cap() const { return cap_; }
  std::int64_t per_evaluation() const { return per_evaluation_; }
  std::int64_t used() const { return used_; }
  std::int64_t evaluations() const { return used_ / per_evaluation_; }
  bool halted() const { return halted_; }
  bool exhausted() const { return halted_ || used_ >= cap_; }

  void charge() { used_ += per_evaluation_; }
  /// Convergence reached; no further evaluations should be started.
  void halt() { halted_ = true; }

 private:
  std::int64_t cap_;
  std::int64_t per_evaluation_;
  std::int64_t used_ = 0;
  bool halted_ = false;
};

using Objective = std::function<double(std::span<const double>)>;

/// Stops a run once the best fitness reaches `fitness_threshold`, or when
/// `converged` accepts a newly found best individual.
struct StopRule {
  double fitness_threshold = 0.0;
  std::function<bool(const Individual&)> converged;
};

struct PsoParams {
  double omega = 1.0;
  double c1 = 0.5;
  double c2 = 1.0;
  bool adjust_omega = true;
  double omega_min = 0.4;
  bool operator==(const PsoParams&) const = default;
};

struct BatParams {
  double loudness = 10.0;
  double alpha = 0.9;
  double gamma = 0.9;
  double min_f = 0.0;
  double max_f = 1.0;
  double pulse_rate = 0.5;
  bool operator==(const BatParams&) const = default;
};

struct BfoParams {
  int ed_s = 2;         // elimination-dispersal events
  double c_i = 0.2;     // chemotactic step
  double p_ed = 0.25;   // dispersal probability
  int n_c = 4;          // chemotactic steps per reproduction
  int n_s = 4;          // swim length
  double d_a = 0.1;     // attractant depth
  double w_a = 0.2;     // attractant width
  double h_r = 0.1;     // repellant height
  double w_r = 10.0;    // repellant width
  int n_re = 2;         // reproductions per dispersal event
  bool operator==(const BfoParams&) const = default;
};

struct SaParams {
  double temperature = 100.0;
  double alpha = 0.9;
  double s_t = 1e-8;  // restart temperature
  double d = 0.01;    // proposal std as a fraction of the bound width
  bool operator==(const SaParams&) const = default;
};

struct FpaParams {
  double switch_probability = 0.8;
  double levy_beta = 1.5;
  double levy_scale = 0.01;
  bool operator==(const FpaParams&) const = default;
};

using MethodParams =
    std::variant<PsoParams, BatParams, BfoParams, SaParams, FpaParams>;

MethodParams default_params(Method m);
Method method_of(const MethodParams& p);
/// Throws std::invalid_argument for out-of-range parameters.
void validate(const MethodParams& p);

struct PsoState {
  PsoParams params;
  std::vector<std::vector<double>> velocities;
  std::vector<Individual> personal_best;
  double omega = 1.0;
  bool operator==(const PsoState&) const = default;
};

struct BatState {
  BatParams params;
  std::vector<std::vector<double>> velocities;
  std::vector<double> frequencies;
  std::vector<double> loudness;
  std::vector<double> pulse_rate;
  bool operator==(const BatState&) const = default;
};

struct BfoState {
  BfoParams params;
  std::vector<double> health;
  int chemotaxis = 0;
  int reproduction = 0;
  int dispersal = 0;
  bool operator==(const BfoState&) const = default;
};

struct SaState {
  SaParams params;
  double temperature = 100.0;
  bool operator==(const SaState&) const = default;
};

struct FpaState {
  FpaParams params;
  bool operator==(const FpaState&) const = default;
};

struct OptimizerState {
  std::variant<PsoState, BatState, BfoState, SaState, FpaState> detail;
  Bounds bounds;
  Bounds init_range{0.0, 10.0};
  std::mt19937_64 rng;
  std::optional<Individual> best_so_far;
  std::size_t generation = 0;
  bool initialized = false;

  Method method() const;
  bool operator==(const OptimizerState&) const = default;
};

/// Fresh optimizer. `init_range` is where re-randomised members (BFO
/// dispersal) are drawn. Throws std::invalid_argument on bad input.
OptimizerState make_optimizer(Method method, const MethodParams& params,
                              Bounds bounds, std::uint64_t seed,
                              Bounds init_range = {0.0, 10.0});
OptimizerState make_optimizer(Method method, Bounds bounds, std::uint64_t seed,
                              Bounds init_range = {0.0, 10.0});

enum class StepStatus { Advanced, Exhausted };

/// One generation of the method's update. The first call on a fresh state
/// evaluates the population and builds the method's memory. Returns
/// Exhausted without evaluating anything if the budget is already spent.
StepStatus step(OptimizerState& state, Population& pop,
                const Objective& objective, FeBudget& budget,
                const StopRule& stop = {});

/// Steps until the budget is spent or the stop rule fires.
void run_until(OptimizerState& state, Population& pop,
               const Objective& objective, FeBudget& budget,
               const StopRule& stop = {});

/// Folds x into [lower, upper] by mirroring at the violated bound until it
/// lands inside. Non-finite input maps to the nearest bound (NaN to lower).
double reflect(double x, double lower, double upper);
std::vector<double> reflect(std::span<const double> position, double lower,
                            double upper);

Population random_population(std::size_t size, std::size_t dimension,
                             Bounds range, std::mt19937_64& rng);

/// FNV-1a over the member positions; fitness is ignored.
std::uint64_t fingerprint(const Population& pop);

/// Deterministic seed derivation (splitmix64 of the combined inputs).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                          std::uint64_t b = 0);

}  // namespace pnnchm
