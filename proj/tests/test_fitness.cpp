#include <gtest/gtest.h>

#include <memory>
#include <random>

#include "oracle.hpp"
#include "pnnchm/fitness.hpp"
#include "support.hpp"

using namespace pnnchm;
using testing_support::random_samples;
using testing_support::to_dataset;

namespace {

std::vector<std::vector<double>> per_class(const std::vector<double>& h, std::size_t g) {
  return std::vector<std::vector<double>>(g, h);
}

}  // namespace

TEST(ErrorRateObjective, HeldOutMatchesOracleAndReference) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> bw(0.05, 3.0);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t g = 2 + trial % 2;
    const std::size_t n = 1 + trial % 4;
    const auto train = random_samples(rng, 25, n, g);
    const auto test = random_samples(rng, 15, n, g, 1.0, 0);
    auto tr = std::make_shared<const Dataset>(to_dataset(train, g));
    auto te = std::make_shared<const Dataset>(to_dataset(test, g));
    const ErrorRateObjective obj(tr, te);
    EXPECT_EQ(obj.eval_size(), 15u);
    EXPECT_EQ(obj.dimension(), n);
    std::vector<double> h(n);
    for (auto& v : h) v = bw(rng);
    const double expected = oracle::error_rate(train, test, g, per_class(h, g));
    EXPECT_DOUBLE_EQ(obj(h), expected);
    EXPECT_DOUBLE_EQ(fitness_of(h, *tr, *te), expected);
  }
}

TEST(ErrorRateObjective, LeaveOneOutMatchesOracle) {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> bw(0.05, 3.0);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t g = 2 + trial % 2;
    const std::size_t n = 1 + trial % 3;
    const auto train = random_samples(rng, 20, n, g, 1.2);
    auto tr = std::make_shared<const Dataset>(to_dataset(train, g));
    const auto obj = ErrorRateObjective::leave_one_out(tr);
    EXPECT_TRUE(obj.is_leave_one_out());
    EXPECT_EQ(obj.eval_size(), 20u);
    std::vector<double> h(n);
    for (auto& v : h) v = bw(rng);
    EXPECT_DOUBLE_EQ(obj(h), oracle::leave_one_out_error(train, g, per_class(h, g)));
  }
}

TEST(ErrorRateObjective, SingletonClassIsMissedUnderLeaveOneOut) {
  // the lone class-1 pattern has no same-class neighbour once held out
  const auto train = std::vector<oracle::Sample>{
      {{0.0}, 0}, {{0.1}, 0}, {{0.2}, 0}, {{5.0}, 1}};
  auto tr = std::make_shared<const Dataset>(to_dataset(train, 2));
  const auto obj = ErrorRateObjective::leave_one_out(tr);
  EXPECT_DOUBLE_EQ(obj(std::vector<double>{0.5}), 0.25);
}

TEST(ErrorRateObjective, TinyBandwidthsStayWellDefined) {
  std::mt19937_64 rng(23);
  const auto train = random_samples(rng, 20, 2, 2);
  const auto test = random_samples(rng, 10, 2, 2);
  auto tr = std::make_shared<const Dataset>(to_dataset(train, 2));
  auto te = std::make_shared<const Dataset>(to_dataset(test, 2));
  const ErrorRateObjective obj(tr, te);
  const std::vector<double> zero{0.0, 0.0};
  const double e = obj(zero);
  EXPECT_GE(e, 0.0);
  EXPECT_LE(e, 1.0);
  // nearest-neighbour limit: the floor makes the closest pattern decide
  const std::vector<double> floor{kBandwidthFloor, kBandwidthFloor};
  EXPECT_DOUBLE_EQ(e, obj(floor));
  EXPECT_DOUBLE_EQ(e, fitness_of(floor, *tr, *te));
}

TEST(ErrorRateObjective, PredictAgreesWithErrorRate) {
  std::mt19937_64 rng(24);
  const auto train = random_samples(rng, 30, 3, 3);
  const auto test = random_samples(rng, 30, 3, 3);
  auto tr = std::make_shared<const Dataset>(to_dataset(train, 3));
  auto te = std::make_shared<const Dataset>(to_dataset(test, 3));
  const ErrorRateObjective obj(tr, te);
  const std::vector<double> h{0.3, 0.6, 0.9};
  const auto pred = obj.predict(h);
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    wrong += pred[i] != test[i].label;
    EXPECT_EQ(pred[i], oracle::classify(train, test[i].x, 3, per_class(h, 3)));
  }
  EXPECT_DOUBLE_EQ(obj(h), static_cast<double>(wrong) / 30.0);
}

TEST(ErrorRateObjective, MatrixBandwidthMatchesOracle) {
  std::mt19937_64 rng(25);
  const auto train = random_samples(rng, 24, 2, 2);
  const auto test = random_samples(rng, 12, 2, 2);
  auto tr = std::make_shared<const Dataset>(to_dataset(train, 2));
  auto te = std::make_shared<const Dataset>(to_dataset(test, 2));
  const ErrorRateObjective obj(tr, te, SmoothingKind::Matrix);
  EXPECT_EQ(obj.dimension(), 4u);
  const std::vector<double> v{0.2, 1.5, 0.8, 0.4};
  EXPECT_DOUBLE_EQ(obj(v), oracle::error_rate(train, test, 2, {{0.2, 1.5}, {0.8, 0.4}}));
}

TEST(ErrorRateObjective, RejectsWrongCandidateLength) {
  std::mt19937_64 rng(26);
  auto tr = std::make_shared<const Dataset>(to_dataset(random_samples(rng, 10, 2, 2), 2));
  const auto obj = ErrorRateObjective::leave_one_out(tr);
  EXPECT_THROW(obj(std::vector<double>{1.0}), std::invalid_argument);
}

TEST(SmoothingFromPosition, ClampsIntoValidRange) {
  const std::vector<double> pos{0.0, 5.0, 20000.0};
  const auto spec = smoothing_from_position(pos, SmoothingKind::PerFeature, 2, 3);
  EXPECT_EQ(spec.to_vector(), (std::vector<double>{kBandwidthFloor, 5.0, 10000.0}));
  EXPECT_NO_THROW(spec.validate(2, 3));
}
