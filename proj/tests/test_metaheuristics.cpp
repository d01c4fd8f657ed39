#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "pnnchm/metaheuristics.hpp"

using namespace pnnchm;

namespace {

constexpr Method kAll[] = {Method::PSO, Method::BAT, Method::BFO, Method::SA, Method::FPA};

double sphere(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += (v - 3.0) * (v - 3.0);
  return s;
}

Population start(std::size_t size, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return random_population(size, dim, {0.0, 10.0}, rng);
}

struct Outcome {
  OptimizerState state;
  Population pop;
  FeBudget budget;
  std::size_t calls = 0;
};

Outcome run(Method m, std::uint64_t seed, std::int64_t cap, Bounds bounds = {0.0, 10.0},
        const StopRule& stop = {}) {
  Outcome r{make_optimizer(m, bounds, seed), start(10, 3, 99), FeBudget(cap, 1), 0};
  std::size_t* calls = &r.calls;
  const Objective obj = [calls, bounds](std::span<const double> x) {
    ++*calls;
    for (double v : x) {
      EXPECT_GE(v, bounds.lower);
      EXPECT_LE(v, bounds.upper);
    }
    return sphere(x);
  };
  run_until(r.state, r.pop, obj, r.budget, stop);
  return r;
}

}  // namespace

TEST(Method, NamesRoundTrip) {
  for (Method m : kAll) EXPECT_EQ(method_from_string(to_string(m)), m);
  EXPECT_EQ(method_from_string("pso"), Method::PSO);
  EXPECT_EQ(method_from_string("Fpa"), Method::FPA);
  EXPECT_THROW(method_from_string("GA"), std::invalid_argument);
}

TEST(Reflect, MirrorsAtTheViolatedBound) {
  EXPECT_DOUBLE_EQ(reflect(4.0, 0.0, 10.0), 4.0);
  EXPECT_DOUBLE_EQ(reflect(-3.0, 0.0, 10.0), 3.0);
  EXPECT_DOUBLE_EQ(reflect(12.0, 0.0, 10.0), 8.0);
  EXPECT_DOUBLE_EQ(reflect(25.0, 0.0, 10.0), 5.0);
  EXPECT_DOUBLE_EQ(reflect(-13.0, 0.0, 10.0), 7.0);
  EXPECT_DOUBLE_EQ(reflect(std::nan(""), 0.0, 10.0), 0.0);
  EXPECT_DOUBLE_EQ(reflect(std::numeric_limits<double>::infinity(), 0.0, 10.0), 10.0);
  EXPECT_DOUBLE_EQ(reflect(-std::numeric_limits<double>::infinity(), 0.0, 10.0), 0.0);
}

TEST(Reflect, AlwaysLandsInside) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e7, 1e7);
  for (int i = 0; i < 10000; ++i) {
    const double r = reflect(u(rng), 0.0, 10000.0);
    ASSERT_GE(r, 0.0);
    ASSERT_LE(r, 10000.0);
  }
  const std::vector<double> v{-1.0, 11.0, 5.0};
  EXPECT_EQ(reflect(v, 0.0, 10.0), (std::vector<double>{1.0, 9.0, 5.0}));
}

TEST(FeBudget, ChargesPerEvaluation) {
  FeBudget b(100, 30);
  EXPECT_FALSE(b.exhausted());
  for (int i = 0; i < 3; ++i) b.charge();
  EXPECT_EQ(b.used(), 90);
  EXPECT_EQ(b.evaluations(), 3);
  EXPECT_FALSE(b.exhausted());
  b.charge();
  EXPECT_TRUE(b.exhausted());
  FeBudget h(100, 1);
  h.halt();
  EXPECT_TRUE(h.exhausted());
  EXPECT_TRUE(h.halted());
  EXPECT_THROW(FeBudget(10, 0), std::invalid_argument);
  EXPECT_THROW(FeBudget(-1, 1), std::invalid_argument);
}

TEST(Params, DefaultsAreValidAndMatchTheirMethod) {
  for (Method m : kAll) {
    EXPECT_EQ(method_of(default_params(m)), m);
    EXPECT_NO_THROW(validate(default_params(m)));
  }
  EXPECT_THROW(validate(BatParams{.loudness = -1.0}), std::invalid_argument);
  EXPECT_THROW(validate(SaParams{.alpha = 1.0}), std::invalid_argument);
  EXPECT_THROW(validate(BfoParams{.p_ed = 1.5}), std::invalid_argument);
  EXPECT_THROW(validate(FpaParams{.switch_probability = 2.0}), std::invalid_argument);
  EXPECT_THROW(validate(PsoParams{.omega = 1.0, .omega_min = 2.0}), std::invalid_argument);
  EXPECT_THROW(make_optimizer(Method::PSO, SaParams{}, {0, 1}, 0), std::invalid_argument);
  EXPECT_THROW(make_optimizer(Method::PSO, {1, 0}, 0), std::invalid_argument);
}

TEST(Optimizers, ImproveOnSphereWithinBounds) {
  const Population p0 = start(10, 3, 99);
  double initial = std::numeric_limits<double>::infinity();
  for (const auto& m : p0.members) initial = std::min(initial, sphere(m.position));
  for (Method m : kAll) {
    SCOPED_TRACE(std::string(to_string(m)));
    const Outcome r = run(m, 7, 3000);
    ASSERT_TRUE(r.state.best_so_far);
    EXPECT_LT(*r.state.best_so_far->fitness, initial);
    EXPECT_LT(*r.state.best_so_far->fitness, 1.0);
    EXPECT_DOUBLE_EQ(sphere(r.state.best_so_far->position), *r.state.best_so_far->fitness);
  }
}

TEST(Optimizers, StayWithinWideBounds) {
  for (Method m : kAll) {
    SCOPED_TRACE(std::string(to_string(m)));
    run(m, 3, 2000, {0.0, 10000.0});
  }
}

TEST(Optimizers, ChargeEveryCallAndOvershootByLessThanABatch) {
  for (Method m : kAll) {
    SCOPED_TRACE(std::string(to_string(m)));
    const Outcome r = run(m, 5, 1003);
    EXPECT_EQ(static_cast<std::int64_t>(r.calls), r.budget.evaluations());
    EXPECT_GE(r.budget.used(), 1003);
    EXPECT_LT(r.budget.used(), 1003 + 10);
  }
}

TEST(Optimizers, BfoChecksTheBudgetBeforeEveryEvaluation) {
  const Outcome r = run(Method::BFO, 5, 1003);
  EXPECT_EQ(r.budget.used(), 1003);
}

TEST(Optimizers, DeterministicForASeed) {
  for (Method m : kAll) {
    SCOPED_TRACE(std::string(to_string(m)));
    const Outcome a = run(m, 11, 1500);
    const Outcome b = run(m, 11, 1500);
    const Outcome c = run(m, 12, 1500);
    EXPECT_EQ(a.pop, b.pop);
    EXPECT_EQ(a.state, b.state);
    EXPECT_NE(fingerprint(a.pop), fingerprint(c.pop));
  }
}

TEST(Optimizers, BestSoFarNeverWorsens) {
  for (Method m : kAll) {
    SCOPED_TRACE(std::string(to_string(m)));
    OptimizerState s = make_optimizer(m, {0.0, 10.0}, 21);
    Population pop = start(8, 2, 4);
    FeBudget budget(2000, 1);
    double last = std::numeric_limits<double>::infinity();
    while (step(s, pop, sphere, budget) == StepStatus::Advanced) {
      ASSERT_TRUE(s.best_so_far);
      EXPECT_LE(*s.best_so_far->fitness, last);
      last = *s.best_so_far->fitness;
      for (const auto& ind : pop.members) {
        if (ind.fitness) {
          EXPECT_GE(*ind.fitness, last);
        }
      }
    }
  }
}

TEST(Optimizers, StopRuleHaltsAfterTheCurrentBatch) {
  for (Method m : kAll) {
    SCOPED_TRACE(std::string(to_string(m)));
    StopRule stop;
    stop.fitness_threshold = 0.5;
    const Outcome r = run(m, 13, 100000, {0.0, 10.0}, stop);
    EXPECT_TRUE(r.budget.halted());
    EXPECT_LE(*r.state.best_so_far->fitness, 0.5);
    EXPECT_LT(r.budget.used(), 100000);
  }
}

TEST(Optimizers, ConvergedCallbackHalts) {
  StopRule stop;
  stop.converged = [](const Individual& ind) { return *ind.fitness < 2.0; };
  const Outcome r = run(Method::PSO, 2, 100000, {0.0, 10.0}, stop);
  EXPECT_TRUE(r.budget.halted());
  EXPECT_LT(*r.state.best_so_far->fitness, 2.0);
}

TEST(Optimizers, ExhaustedBudgetEvaluatesNothing) {
  OptimizerState s = make_optimizer(Method::SA, {0.0, 10.0}, 1);
  Population pop = start(5, 2, 1);
  FeBudget budget(0, 1);
  std::size_t calls = 0;
  const Objective obj = [&](std::span<const double> x) {
    ++calls;
    return sphere(x);
  };
  EXPECT_EQ(step(s, pop, obj, budget), StepStatus::Exhausted);
  EXPECT_EQ(calls, 0u);
}

TEST(Optimizers, CachedFitnessIsNotReevaluated) {
  Population pop = start(6, 2, 8);
  for (auto& m : pop.members) m.fitness = sphere(m.position);
  OptimizerState s = make_optimizer(Method::FPA, {0.0, 10.0}, 1);
  FeBudget budget(100, 1);
  step(s, pop, sphere, budget);
  EXPECT_EQ(budget.used(), 0);
  EXPECT_TRUE(s.initialized);
}

TEST(Population, BestAndFingerprint) {
  Population pop = start(4, 2, 3);
  pop.members[2].fitness = 0.1;
  pop.members[0].fitness = 0.5;
  pop.refresh_best();
  EXPECT_EQ(pop.best, 2u);
  const auto f = fingerprint(pop);
  pop.clear_fitness();
  EXPECT_FALSE(pop.members[2].fitness);
  EXPECT_EQ(fingerprint(pop), f);
  pop.members[1].position[0] += 1e-9;
  EXPECT_NE(fingerprint(pop), f);
}

TEST(DeriveSeed, SpreadsNeighbouringInputs) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t base = 0; base < 20; ++base) {
    for (std::uint64_t a = 0; a < 20; ++a) seen.insert(derive_seed(base, a));
  }
  EXPECT_EQ(seen.size(), 400u);
  EXPECT_EQ(derive_seed(5, 1, 2), derive_seed(5, 1, 2));
  EXPECT_NE(derive_seed(5, 1, 2), derive_seed(5, 2, 1));
}

TEST(RandomPopulation, DrawsInsideRange) {
  std::mt19937_64 rng(0);
  const Population p = random_population(50, 4, {0.0, 10.0}, rng);
  ASSERT_EQ(p.members.size(), 50u);
  for (const auto& m : p.members) {
    ASSERT_EQ(m.position.size(), 4u);
    EXPECT_FALSE(m.fitness);
    for (double v : m.position) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 10.0);
    }
  }
}
