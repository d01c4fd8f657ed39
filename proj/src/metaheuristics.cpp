#include "pnnchm/metaheuristics.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace pnnchm {

namespace {

constexpr std::array<std::string_view, 5> kMethodNames = {"PSO", "BAT", "BFO",
                                                          "SA", "FPA"};

double uniform01(std::mt19937_64& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

double uniform(std::mt19937_64& rng, double a, double b) {
  return std::uniform_real_distribution<double>(a, b)(rng);
}

double gaussian(std::mt19937_64& rng, double sigma) {
  return std::normal_distribution<double>(0.0, sigma)(rng);
}

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

// Charges the budget, caches the fitness and updates the best archive. A new
// best that satisfies the stop rule halts the budget; the caller decides
// whether the rest of its batch still runs.
double evaluate(OptimizerState& s, Individual& ind, const Objective& objective,
                FeBudget& budget, const StopRule& stop) {
  const double f = objective(ind.position);
  budget.charge();
  ind.fitness = f;
  if (!s.best_so_far || f < *s.best_so_far->fitness) {
    s.best_so_far = ind;
    if (f <= stop.fitness_threshold || (stop.converged && stop.converged(ind))) {
      budget.halt();
    }
  }
  return f;
}

void evaluate_missing(OptimizerState& s, Population& pop,
                      const Objective& objective, FeBudget& budget,
                      const StopRule& stop, bool check_each) {
  for (auto& ind : pop.members) {
    if (ind.fitness) {
      if (!s.best_so_far || *ind.fitness < *s.best_so_far->fitness) {
        s.best_so_far = ind;
      }
      continue;
    }
    if (check_each && budget.exhausted()) return;
    evaluate(s, ind, objective, budget, stop);
  }
}

void check_population(const Population& pop) {
  require(!pop.members.empty(), "population is empty");
  const std::size_t dim = pop.members.front().position.size();
  require(dim > 0, "individual has no coordinates");
  for (const auto& ind : pop.members) {
    require(ind.position.size() == dim, "population dimensions differ");
  }
}

double levy_sigma(double beta) {
  const double num = std::tgamma(1.0 + beta) * std::sin(std::numbers::pi * beta / 2.0);
  const double den =
      std::tgamma((1.0 + beta) / 2.0) * beta * std::pow(2.0, (beta - 1.0) / 2.0);
  return std::pow(num / den, 1.0 / beta);
}

// Mantegna's algorithm for a symmetric Levy-stable step.
double levy_step(std::mt19937_64& rng, double beta, double sigma_u) {
  const double u = gaussian(rng, sigma_u);
  const double v = gaussian(rng, 1.0);
  return u / std::pow(std::abs(v), 1.0 / beta);
}

// ---- PSO ----

void init_pso(PsoState& st, const Population& pop) {
  const std::size_t dim = pop.members.front().position.size();
  st.velocities.assign(pop.members.size(), std::vector<double>(dim, 0.0));
  st.personal_best = pop.members;
  st.omega = st.params.omega;
}

void step_pso(OptimizerState& s, PsoState& st, Population& pop,
              const Objective& objective, FeBudget& budget,
              const StopRule& stop) {
  const auto& p = st.params;
  if (p.adjust_omega && budget.cap() > 0) {
    const double t = std::min(
        1.0, static_cast<double>(budget.used()) / static_cast<double>(budget.cap()));
    st.omega = p.omega - (p.omega - p.omega_min) * t;
  }
  const double vmax = s.bounds.upper - s.bounds.lower;
  const std::vector<double> g = s.best_so_far->position;
  for (std::size_t i = 0; i < pop.members.size(); ++i) {
    auto& x = pop.members[i].position;
    auto& v = st.velocities[i];
    const auto& pb = st.personal_best[i].position;
    for (std::size_t d = 0; d < x.size(); ++d) {
      const double r1 = uniform01(s.rng);
      const double r2 = uniform01(s.rng);
      v[d] = st.omega * v[d] + p.c1 * r1 * (pb[d] - x[d]) + p.c2 * r2 * (g[d] - x[d]);
      v[d] = std::clamp(v[d], -vmax, vmax);
      x[d] = reflect(x[d] + v[d], s.bounds.lower, s.bounds.upper);
    }
    pop.members[i].fitness.reset();
  }
  for (std::size_t i = 0; i < pop.members.size(); ++i) {
    const double f = evaluate(s, pop.members[i], objective, budget, stop);
    if (f <= *st.personal_best[i].fitness) st.personal_best[i] = pop.members[i];
  }
}

// ---- BAT ----

void init_bat(BatState& st, const Population& pop) {
  const std::size_t n = pop.members.size();
  const std::size_t dim = pop.members.front().position.size();
  st.velocities.assign(n, std::vector<double>(dim, 0.0));
  st.frequencies.assign(n, 0.0);
  st.loudness.assign(n, st.params.loudness);
  st.pulse_rate.assign(n, st.params.pulse_rate);
}

void step_bat(OptimizerState& s, BatState& st, Population& pop,
              const Objective& objective, FeBudget& budget,
              const StopRule& stop) {
  const auto& p = st.params;
  const double t = static_cast<double>(s.generation);
  const double mean_loudness =
      std::accumulate(st.loudness.begin(), st.loudness.end(), 0.0) /
      static_cast<double>(st.loudness.size());
  const std::vector<double> g = s.best_so_far->position;
  for (std::size_t i = 0; i < pop.members.size(); ++i) {
    auto& bat = pop.members[i];
    auto& v = st.velocities[i];
    st.frequencies[i] = p.min_f + (p.max_f - p.min_f) * uniform01(s.rng);
    Individual cand;
    cand.position.resize(bat.position.size());
    for (std::size_t d = 0; d < v.size(); ++d) {
      v[d] += (bat.position[d] - g[d]) * st.frequencies[i];
      cand.position[d] =
          reflect(bat.position[d] + v[d], s.bounds.lower, s.bounds.upper);
    }
    if (uniform01(s.rng) > st.pulse_rate[i]) {
      for (std::size_t d = 0; d < v.size(); ++d) {
        cand.position[d] = reflect(g[d] + uniform(s.rng, -1.0, 1.0) * mean_loudness,
                                   s.bounds.lower, s.bounds.upper);
      }
    }
    const double f = evaluate(s, cand, objective, budget, stop);
    if (f <= *bat.fitness && uniform01(s.rng) < st.loudness[i]) {
      bat = std::move(cand);
      st.loudness[i] *= p.alpha;
      st.pulse_rate[i] = p.pulse_rate * (1.0 - std::exp(-p.gamma * t));
    }
  }
}

// ---- BFO ----

double swarming(const BfoParams& p, std::span<const double> x,
                const Population& pop) {
  double j = 0.0;
  for (const auto& other : pop.members) {
    double dist2 = 0.0;
    for (std::size_t d = 0; d < x.size(); ++d) {
      const double diff = x[d] - other.position[d];
      dist2 += diff * diff;
    }
    j += -p.d_a * std::exp(-p.w_a * dist2) + p.h_r * std::exp(-p.w_r * dist2);
  }
  return j;
}

void init_bfo(BfoState& st, const Population& pop) {
  st.health.assign(pop.members.size(), 0.0);
  st.chemotaxis = 0;
  st.reproduction = 0;
  st.dispersal = 0;
}

void bfo_reproduce(BfoState& st, Population& pop) {
  const std::size_t n = pop.members.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return st.health[a] < st.health[b];
  });
  std::vector<Individual> next(n);
  const std::size_t half = n / 2;
  for (std::size_t k = 0; k < n; ++k) {
    // the weaker half is replaced by copies of the healthier half
    const std::size_t src = (half > 0 && k >= n - half) ? order[k - (n - half)] : order[k];
    next[k] = pop.members[src];
  }
  pop.members = std::move(next);
  std::fill(st.health.begin(), st.health.end(), 0.0);
}

void bfo_disperse(OptimizerState& s, BfoState& st, Population& pop) {
  for (auto& ind : pop.members) {
    if (uniform01(s.rng) < st.params.p_ed) {
      for (double& x : ind.position) {
        x = uniform(s.rng, s.init_range.lower, s.init_range.upper);
      }
      ind.fitness.reset();
    }
  }
}

void step_bfo(OptimizerState& s, BfoState& st, Population& pop,
              const Objective& objective, FeBudget& budget,
              const StopRule& stop) {
  const auto& p = st.params;
  const std::size_t dim = pop.members.front().position.size();
  std::vector<double> dir(dim);
  for (std::size_t i = 0; i < pop.members.size(); ++i) {
    auto& bac = pop.members[i];
    if (!bac.fitness) {
      if (budget.exhausted()) return;
      evaluate(s, bac, objective, budget, stop);
    }
    double j_last = *bac.fitness + swarming(p, bac.position, pop);

    double norm = 0.0;
    do {
      norm = 0.0;
      for (double& d : dir) {
        d = uniform(s.rng, -1.0, 1.0);
        norm += d * d;
      }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (double& d : dir) d /= norm;

    auto move = [&](const Individual& from) {
      Individual next;
      next.position.resize(dim);
      for (std::size_t d = 0; d < dim; ++d) {
        next.position[d] = reflect(from.position[d] + p.c_i * dir[d],
                                   s.bounds.lower, s.bounds.upper);
      }
      return next;
    };

    // tumble
    if (budget.exhausted()) return;
    bac = move(bac);
    evaluate(s, bac, objective, budget, stop);
    double j = *bac.fitness + swarming(p, bac.position, pop);

    // swim along the same direction while the cost keeps falling
    for (int m = 0; m < p.n_s && j < j_last; ++m) {
      if (budget.exhausted()) break;
      j_last = j;
      bac = move(bac);
      evaluate(s, bac, objective, budget, stop);
      j = *bac.fitness + swarming(p, bac.position, pop);
    }
    st.health[i] += j;
  }

  if (++st.chemotaxis < p.n_c) return;
  st.chemotaxis = 0;
  bfo_reproduce(st, pop);
  if (++st.reproduction < p.n_re) return;
  st.reproduction = 0;
  bfo_disperse(s, st, pop);
  // the nested loop restarts once all events are spent and budget remains
  if (++st.dispersal >= p.ed_s) st.dispersal = 0;
}

// ---- SA ----

void step_sa(OptimizerState& s, SaState& st, Population& pop,
             const Objective& objective, FeBudget& budget,
             const StopRule& stop) {
  const auto& p = st.params;
  const double sigma = p.d * (s.bounds.upper - s.bounds.lower);
  for (auto& cur : pop.members) {
    Individual cand;
    cand.position.resize(cur.position.size());
    for (std::size_t d = 0; d < cur.position.size(); ++d) {
      const double x = sigma > 0.0 ? cur.position[d] + gaussian(s.rng, sigma)
                                   : cur.position[d];
      cand.position[d] = reflect(x, s.bounds.lower, s.bounds.upper);
    }
    const double f = evaluate(s, cand, objective, budget, stop);
    const double delta = f - *cur.fitness;
    if (delta <= 0.0 || uniform01(s.rng) < std::exp(-delta / st.temperature)) {
      cur = std::move(cand);
    }
  }
  st.temperature *= p.alpha;
  if (st.temperature < p.s_t) st.temperature = p.temperature;
}

// ---- FPA ----

void step_fpa(OptimizerState& s, FpaState& st, Population& pop,
              const Objective& objective, FeBudget& budget,
              const StopRule& stop) {
  const auto& p = st.params;
  const double sigma_u = levy_sigma(p.levy_beta);
  const std::vector<double> g = s.best_so_far->position;
  const std::size_t n = pop.members.size();
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    auto& flower = pop.members[i];
    Individual cand;
    cand.position.resize(flower.position.size());
    if (uniform01(s.rng) < p.switch_probability) {
      for (std::size_t d = 0; d < g.size(); ++d) {
        const double l = p.levy_scale * levy_step(s.rng, p.levy_beta, sigma_u);
        cand.position[d] = flower.position[d] + l * (g[d] - flower.position[d]);
      }
    } else {
      const std::size_t a = pick(s.rng);
      const std::size_t b = pick(s.rng);
      const double eps = uniform01(s.rng);
      for (std::size_t d = 0; d < g.size(); ++d) {
        cand.position[d] = flower.position[d] +
                           eps * (pop.members[a].position[d] - pop.members[b].position[d]);
      }
    }
    for (double& x : cand.position) x = reflect(x, s.bounds.lower, s.bounds.upper);
    const double f = evaluate(s, cand, objective, budget, stop);
    if (f <= *flower.fitness) flower = std::move(cand);
  }
}

}  // namespace

std::string_view to_string(Method m) {
  return kMethodNames.at(static_cast<std::size_t>(m));
}

Method method_from_string(std::string_view name) {
  std::string upper(name);
  for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (std::size_t i = 0; i < kMethodNames.size(); ++i) {
    if (upper == kMethodNames[i]) return static_cast<Method>(i);
  }
  throw std::invalid_argument("unknown method: " + std::string(name));
}

void Population::refresh_best() {
  std::optional<double> best_f;
  for (std::size_t i = 0; i < members.size(); ++i) {
    const auto& f = members[i].fitness;
    if (f && (!best_f || *f < *best_f)) {
      best_f = f;
      best = i;
    }
  }
}

void Population::clear_fitness() {
  for (auto& m : members) m.fitness.reset();
  best = 0;
}

FeBudget::FeBudget(std::int64_t cap, std::int64_t per_evaluation)
    : cap_(cap), per_evaluation_(per_evaluation) {
  if (cap < 0) throw std::invalid_argument("budget cap must be nonnegative");
  if (per_evaluation < 1) throw std::invalid_argument("n_t must be positive");
}

MethodParams default_params(Method m) {
  switch (m) {
    case Method::PSO: return PsoParams{};
    case Method::BAT: return BatParams{};
    case Method::BFO: return BfoParams{};
    case Method::SA: return SaParams{};
    case Method::FPA: return FpaParams{};
  }
  throw std::invalid_argument("unknown method");
}

Method method_of(const MethodParams& p) { return static_cast<Method>(p.index()); }

Method OptimizerState::method() const {
  return static_cast<Method>(detail.index());
}

void validate(const MethodParams& params) {
  std::visit(
      [](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, PsoParams>) {
          require(p.omega >= 0.0 && p.c1 >= 0.0 && p.c2 >= 0.0,
                  "pso: omega, c1 and c2 must be nonnegative");
          require(!p.adjust_omega || (p.omega_min >= 0.0 && p.omega_min <= p.omega),
                  "pso: omega_min must lie in [0, omega]");
        } else if constexpr (std::is_same_v<T, BatParams>) {
          require(p.loudness >= 0.0, "bat: loudness must be nonnegative");
          require(p.alpha > 0.0 && p.alpha <= 1.0, "bat: alpha must lie in (0, 1]");
          require(p.gamma >= 0.0, "bat: gamma must be nonnegative");
          require(p.min_f <= p.max_f, "bat: min_f exceeds max_f");
          require(p.pulse_rate >= 0.0 && p.pulse_rate <= 1.0,
                  "bat: pulse_rate must lie in [0, 1]");
        } else if constexpr (std::is_same_v<T, BfoParams>) {
          require(p.ed_s >= 1 && p.n_re >= 1 && p.n_c >= 1 && p.n_s >= 0,
                  "bfo: loop counts must be positive");
          require(p.c_i >= 0.0, "bfo: c_i must be nonnegative");
          require(p.p_ed >= 0.0 && p.p_ed <= 1.0, "bfo: p_ed must lie in [0, 1]");
          require(p.d_a >= 0.0 && p.w_a >= 0.0 && p.h_r >= 0.0 && p.w_r >= 0.0,
                  "bfo: swarming coefficients must be nonnegative");
        } else if constexpr (std::is_same_v<T, SaParams>) {
          require(p.temperature > 0.0, "sa: temperature must be positive");
          require(p.alpha > 0.0 && p.alpha < 1.0, "sa: alpha must lie in (0, 1)");
          require(p.s_t > 0.0 && p.s_t < p.temperature,
                  "sa: s_t must lie in (0, temperature)");
          require(p.d >= 0.0, "sa: d must be nonnegative");
        } else {
          require(p.switch_probability >= 0.0 && p.switch_probability <= 1.0,
                  "fpa: switch probability must lie in [0, 1]");
          require(p.levy_beta > 0.0 && p.levy_beta <= 2.0,
                  "fpa: beta must lie in (0, 2]");
          require(p.levy_scale >= 0.0, "fpa: levy scale must be nonnegative");
        }
      },
      params);
}

OptimizerState make_optimizer(Method method, const MethodParams& params,
                              Bounds bounds, std::uint64_t seed,
                              Bounds init_range) {
  require(std::isfinite(bounds.lower) && std::isfinite(bounds.upper) &&
              bounds.lower < bounds.upper,
          "bounds must satisfy lower < upper");
  require(init_range.lower <= init_range.upper &&
              init_range.lower >= bounds.lower && init_range.upper <= bounds.upper,
          "init range must lie within bounds");
  if (method_of(params) != method) {
    throw std::invalid_argument("parameters do not belong to method " +
                                std::string(to_string(method)));
  }
  validate(params);

  OptimizerState s;
  s.bounds = bounds;
  s.init_range = init_range;
  s.rng.seed(seed);
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, PsoParams>) {
          s.detail = PsoState{p, {}, {}, p.omega};
        } else if constexpr (std::is_same_v<T, BatParams>) {
          s.detail = BatState{p, {}, {}, {}, {}};
        } else if constexpr (std::is_same_v<T, BfoParams>) {
          s.detail = BfoState{p, {}, 0, 0, 0};
        } else if constexpr (std::is_same_v<T, SaParams>) {
          s.detail = SaState{p, p.temperature};
        } else {
          s.detail = FpaState{p};
        }
      },
      params);
  return s;
}

OptimizerState make_optimizer(Method method, Bounds bounds, std::uint64_t seed,
                              Bounds init_range) {
  return make_optimizer(method, default_params(method), bounds, seed, init_range);
}

StepStatus step(OptimizerState& state, Population& pop,
                const Objective& objective, FeBudget& budget,
                const StopRule& stop) {
  if (budget.exhausted()) return StepStatus::Exhausted;
  check_population(pop);
  const bool per_eval_check = state.method() == Method::BFO;

  if (!state.initialized) {
    evaluate_missing(state, pop, objective, budget, stop, per_eval_check);
    if (std::any_of(pop.members.begin(), pop.members.end(),
                    [](const Individual& m) { return !m.fitness; })) {
      // budget ran out part-way through the first evaluation pass
      pop.refresh_best();
      return StepStatus::Advanced;
    }
    std::visit(
        [&](auto& st) {
          using T = std::decay_t<decltype(st)>;
          if constexpr (std::is_same_v<T, PsoState>) init_pso(st, pop);
          else if constexpr (std::is_same_v<T, BatState>) init_bat(st, pop);
          else if constexpr (std::is_same_v<T, BfoState>) init_bfo(st, pop);
        },
        state.detail);
    state.initialized = true;
    pop.refresh_best();
    return StepStatus::Advanced;
  }

  ++state.generation;
  std::visit(
      [&](auto& st) {
        using T = std::decay_t<decltype(st)>;
        if constexpr (std::is_same_v<T, PsoState>) {
          step_pso(state, st, pop, objective, budget, stop);
        } else if constexpr (std::is_same_v<T, BatState>) {
          step_bat(state, st, pop, objective, budget, stop);
        } else if constexpr (std::is_same_v<T, BfoState>) {
          step_bfo(state, st, pop, objective, budget, stop);
        } else if constexpr (std::is_same_v<T, SaState>) {
          step_sa(state, st, pop, objective, budget, stop);
        } else {
          step_fpa(state, st, pop, objective, budget, stop);
        }
      },
      state.detail);
  pop.refresh_best();
  return StepStatus::Advanced;
}

void run_until(OptimizerState& state, Population& pop,
               const Objective& objective, FeBudget& budget,
               const StopRule& stop) {
  while (step(state, pop, objective, budget, stop) == StepStatus::Advanced) {
  }
}

double reflect(double x, double lower, double upper) {
  if (std::isnan(x)) return lower;
  if (std::isinf(x)) return x > 0 ? upper : lower;
  if (x >= lower && x <= upper) return x;
  const double range = upper - lower;
  double m = std::fmod(x - lower, 2.0 * range);
  if (m < 0.0) m += 2.0 * range;
  if (m > range) m = 2.0 * range - m;
  return std::clamp(lower + m, lower, upper);
}

std::vector<double> reflect(std::span<const double> position, double lower,
                            double upper) {
  std::vector<double> out(position.size());
  std::transform(position.begin(), position.end(), out.begin(),
                 [&](double x) { return reflect(x, lower, upper); });
  return out;
}

Population random_population(std::size_t size, std::size_t dimension,
                             Bounds range, std::mt19937_64& rng) {
  require(size >= 1 && dimension >= 1, "population size and dimension must be positive");
  require(range.lower <= range.upper, "empty init range");
  Population pop;
  pop.members.resize(size);
  for (auto& ind : pop.members) {
    ind.position.resize(dimension);
    for (double& x : ind.position) x = uniform(rng, range.lower, range.upper);
  }
  return pop;
}

std::uint64_t fingerprint(const Population& pop) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t word) {
    for (int b = 0; b < 8; ++b) {
      h ^= (word >> (8 * b)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  };
  mix(pop.members.size());
  for (const auto& ind : pop.members) {
    for (double x : ind.position) mix(std::bit_cast<std::uint64_t>(x));
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  auto splitmix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return splitmix(splitmix(splitmix(base) ^ a) ^ (b * 0xd1b54a32d192ed03ULL));
}

}  // namespace pnnchm
