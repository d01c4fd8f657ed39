#include "pnnchm/chm.hpp"

#include <algorithm>
#include <stdexcept>

#include "pnnchm/fitness.hpp"

namespace pnnchm {

namespace {

constexpr std::uint64_t kInitStream = 0x1417;
constexpr std::uint64_t kTieStream = 0x7133;

void keep_best(std::optional<Individual>& best, const OptimizerState& s) {
  if (!s.best_so_far) return;
  if (!best || *s.best_so_far->fitness < *best->fitness) best = s.best_so_far;
}

Population positions_only(Population pop) {
  pop.clear_fitness();
  return pop;
}

}  // namespace

MethodParams MethodParamSet::get(Method m) const {
  switch (m) {
    case Method::PSO: return pso;
    case Method::BAT: return bat;
    case Method::BFO: return bfo;
    case Method::SA: return sa;
    case Method::FPA: return fpa;
  }
  throw std::invalid_argument("unknown method");
}

void ChmConfig::validate() const {
  if (n < 1) throw std::invalid_argument("chm: n must be >= 1");
  if (n_p < 1) throw std::invalid_argument("chm: n_p must be >= 1");
  if (methods.empty()) throw std::invalid_argument("chm: no methods");
  if (probing_multiplier < 1 || fit_multiplier < 1) {
    throw std::invalid_argument("chm: budget multipliers must be >= 1");
  }
  if (!(fitness_threshold >= 0.0)) {
    throw std::invalid_argument("chm: fitness threshold must be >= 0");
  }
  if (!(bounds.lower < bounds.upper)) {
    throw std::invalid_argument("chm: bounds must satisfy lower < upper");
  }
  if (init_range.lower > init_range.upper || init_range.lower < bounds.lower ||
      init_range.upper > bounds.upper) {
    throw std::invalid_argument("chm: init range must lie within bounds");
  }
  for (Method m : methods) pnnchm::validate(params.get(m));
}

std::int64_t ChmConfig::max_fe_probing(std::int64_t n_t) const {
  return static_cast<std::int64_t>(n_p) * n_t * probing_multiplier;
}

std::int64_t ChmConfig::max_fe_fit(std::int64_t n_t) const {
  return static_cast<std::int64_t>(n_p) * n_t * fit_multiplier;
}

std::int64_t ChmTrace::total_fe() const {
  std::int64_t total = 0;
  for (const auto& it : iterations) {
    for (const auto& p : it.probes) total += p.fe_used;
    total += it.fit_fe_used;
  }
  return total;
}

std::vector<std::size_t> ChmTrace::selection_counts(
    const std::vector<Method>& methods) const {
  std::vector<std::size_t> counts(methods.size(), 0);
  for (const auto& it : iterations) {
    const auto pos = std::find(methods.begin(), methods.end(), it.selected);
    if (pos != methods.end()) ++counts[static_cast<std::size_t>(pos - methods.begin())];
  }
  return counts;
}

ProbeOutcome probe_phase(const Population& start, const ChmConfig& cfg,
                         const Objective& objective, std::int64_t n_t,
                         std::int64_t budget_cap, std::uint64_t phase_seed,
                         std::mt19937_64& tie_rng, const StopRule& stop,
                         const ChmHooks& hooks, int iteration) {
  if (cfg.methods.empty()) throw std::invalid_argument("probe: no methods");
  std::vector<Population> pops;
  std::vector<OptimizerState> states;
  ProbeOutcome out;
  for (std::size_t k = 0; k < cfg.methods.size(); ++k) {
    const Method m = cfg.methods[k];
    if (hooks.phase_begin) hooks.phase_begin(iteration, Phase::Probe, m);
    OptimizerState state =
        make_optimizer(m, cfg.params.get(m), cfg.bounds,
                       derive_seed(phase_seed, k + 1), cfg.init_range);
    Population pop = start;
    FeBudget budget(budget_cap, n_t);
    run_until(state, pop, objective, budget, stop);
    if (hooks.phase_end) hooks.phase_end(iteration, Phase::Probe, m, budget);

    ProbeRecord rec;
    rec.method = m;
    rec.best_fitness = state.best_so_far ? *state.best_so_far->fitness : 1.0;
    rec.fe_used = budget.used();
    rec.converged = budget.halted();
    rec.end_fingerprint = fingerprint(pop);
    keep_best(out.best, state);
    out.records.push_back(rec);
    pops.push_back(std::move(pop));
    states.push_back(std::move(state));
    if (rec.converged) {
      out.converged = true;
      break;
    }
  }

  if (out.converged) {
    out.winner = out.records.size() - 1;
  } else {
    double best = out.records.front().best_fitness;
    for (const auto& r : out.records) best = std::min(best, r.best_fitness);
    std::vector<std::size_t> tied;
    for (std::size_t k = 0; k < out.records.size(); ++k) {
      if (out.records[k].best_fitness == best) tied.push_back(k);
    }
    out.tie = tied.size() > 1;
    out.winner = tied.front();
    if (out.tie) {
      std::uniform_int_distribution<std::size_t> pick(0, tied.size() - 1);
      out.winner = tied[pick(tie_rng)];
    }
  }
  out.population = std::move(pops[out.winner]);
  out.state = std::move(states[out.winner]);
  return out;
}

ChmResult chm_optimize(const Objective& objective, std::size_t dimension,
                       std::int64_t n_t, const ChmConfig& cfg,
                       const StopRule& stop, const ChmHooks& hooks) {
  cfg.validate();
  if (dimension < 1) throw std::invalid_argument("chm: dimension must be >= 1");
  if (n_t < 1) throw std::invalid_argument("chm: n_t must be >= 1");

  ChmResult result;
  ChmTrace& trace = result.trace;
  trace.n_t = n_t;
  trace.max_fe_probing = cfg.max_fe_probing(n_t);
  trace.max_fe_fit = cfg.max_fe_fit(n_t);

  std::mt19937_64 init_rng(derive_seed(cfg.seed, kInitStream));
  std::mt19937_64 tie_rng(derive_seed(cfg.seed, kTieStream));
  Population pop = random_population(cfg.n_p, dimension, cfg.init_range, init_rng);
  std::optional<Individual> best;

  for (int it = 0; it < cfg.n; ++it) {
    IterationRecord rec;
    rec.iteration = it;
    // only positions carry over; every method starts with fresh state
    pop = positions_only(std::move(pop));
    rec.start_fingerprint = fingerprint(pop);

    ProbeOutcome probe =
        probe_phase(pop, cfg, objective, n_t, trace.max_fe_probing,
                    derive_seed(cfg.seed, static_cast<std::uint64_t>(it) + 1),
                    tie_rng, stop, hooks, it);
    rec.probes = probe.records;
    rec.selected = cfg.methods[probe.winner];
    rec.tie = probe.tie;
    if (probe.best && (!best || *probe.best->fitness < *best->fitness)) {
      best = probe.best;
    }

    if (probe.converged) {
      rec.converged = true;
      trace.converged = true;
      trace.iterations.push_back(std::move(rec));
      break;
    }

    rec.fit_start_fingerprint = fingerprint(probe.population);
    rec.fit_ran = true;
    if (hooks.phase_begin) hooks.phase_begin(it, Phase::Fit, rec.selected);
    FeBudget fit_budget(trace.max_fe_fit, n_t);
    run_until(probe.state, probe.population, objective, fit_budget, stop);
    if (hooks.phase_end) hooks.phase_end(it, Phase::Fit, rec.selected, fit_budget);
    rec.fit_fe_used = fit_budget.used();
    rec.fit_best_fitness = *probe.state.best_so_far->fitness;
    keep_best(best, probe.state);

    pop = std::move(probe.population);
    if (fit_budget.halted()) {
      rec.converged = true;
      trace.converged = true;
      trace.iterations.push_back(std::move(rec));
      break;
    }
    trace.iterations.push_back(std::move(rec));
  }

  result.best = *best;
  result.fe_used = trace.total_fe();
  return result;
}

std::int64_t chm_total_budget(const ChmConfig& cfg, std::int64_t n_t) {
  const auto k = static_cast<std::int64_t>(cfg.methods.size());
  return static_cast<std::int64_t>(cfg.n) *
         (k * cfg.max_fe_probing(n_t) + cfg.max_fe_fit(n_t));
}

ChmResult single_optimize(Method method, const Objective& objective,
                          std::size_t dimension, std::int64_t n_t,
                          const ChmConfig& cfg, const StopRule& stop,
                          const ChmHooks& hooks) {
  cfg.validate();
  if (dimension < 1) throw std::invalid_argument("dimension must be >= 1");
  ChmResult result;
  result.trace.n_t = n_t;

  std::mt19937_64 init_rng(derive_seed(cfg.seed, kInitStream));
  Population pop = random_population(cfg.n_p, dimension, cfg.init_range, init_rng);
  OptimizerState state =
      make_optimizer(method, cfg.params.get(method), cfg.bounds,
                     derive_seed(cfg.seed, 1, 1), cfg.init_range);
  FeBudget budget(chm_total_budget(cfg, n_t), n_t);
  if (hooks.phase_begin) hooks.phase_begin(0, Phase::Fit, method);
  run_until(state, pop, objective, budget, stop);
  if (hooks.phase_end) hooks.phase_end(0, Phase::Fit, method, budget);
  result.trace.converged = budget.halted();
  result.best = *state.best_so_far;
  result.fe_used = budget.used();
  return result;
}

TrainingProblem make_training_problem(const Dataset& train, const Dataset& test,
                                      const ChmConfig& cfg) {
  validate(train);
  if (test.size() == 0) throw std::invalid_argument("empty test split");
  TrainingProblem prob;
  prob.train = std::make_shared<const Dataset>(train);
  prob.test = std::make_shared<const Dataset>(test);
  auto loo = std::make_shared<const ErrorRateObjective>(
      ErrorRateObjective::leave_one_out(prob.train, cfg.kind));
  auto held_out =
      std::make_shared<const ErrorRateObjective>(prob.train, prob.test, cfg.kind);
  prob.objective = [loo](std::span<const double> x) { return (*loo)(x); };
  prob.stop.fitness_threshold = cfg.fitness_threshold;
  prob.stop.converged = [held_out](const Individual& ind) {
    return (*held_out)(ind.position) == 0.0;
  };
  prob.n_t = static_cast<std::int64_t>(train.size());
  prob.dimension = loo->dimension();
  return prob;
}

namespace {

TrainResult finish(const TrainingProblem& prob, const ChmConfig& cfg,
                   ChmResult r) {
  TrainResult out;
  out.smoothing =
      smoothing_from_position(r.best.position, cfg.kind, prob.train->num_classes(),
                              prob.train->num_features(), cfg.bounds.upper);
  out.best = std::move(r.best);
  out.trace = std::move(r.trace);
  out.fe_used = r.fe_used;
  return out;
}

}  // namespace

TrainResult chm_train(const Dataset& train, const Dataset& test,
                      const ChmConfig& cfg, const ChmHooks& hooks) {
  const TrainingProblem prob = make_training_problem(train, test, cfg);
  return finish(prob, cfg,
                chm_optimize(prob.objective, prob.dimension, prob.n_t, cfg,
                             prob.stop, hooks));
}

TrainResult single_train(Method method, const Dataset& train,
                         const Dataset& test, const ChmConfig& cfg,
                         const ChmHooks& hooks) {
  const TrainingProblem prob = make_training_problem(train, test, cfg);
  return finish(prob, cfg,
                single_optimize(method, prob.objective, prob.dimension,
                                prob.n_t, cfg, prob.stop, hooks));
}

}  // namespace pnnchm
