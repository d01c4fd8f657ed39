#include "pnnchm/fitness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace pnnchm {

namespace {

constexpr double kTiny = 1e-290;

}  // namespace

SmoothingSpec smoothing_from_position(std::span<const double> position,
                                      SmoothingKind kind, std::size_t classes,
                                      std::size_t features, double upper) {
  std::vector<double> h(position.begin(), position.end());
  for (double& v : h) {
    v = std::isnan(v) ? kBandwidthFloor : std::clamp(v, kBandwidthFloor, upper);
  }
  return SmoothingSpec::from_vector(kind, h, classes, features);
}

ErrorRateObjective::ErrorRateObjective(std::shared_ptr<const Dataset> patterns,
                                       std::shared_ptr<const Dataset> eval,
                                       SmoothingKind kind)
    : ErrorRateObjective(std::move(patterns), std::move(eval), kind, false) {}

ErrorRateObjective ErrorRateObjective::leave_one_out(
    std::shared_ptr<const Dataset> patterns, SmoothingKind kind) {
  auto eval = patterns;
  return ErrorRateObjective(std::move(patterns), std::move(eval), kind, true);
}

ErrorRateObjective::ErrorRateObjective(std::shared_ptr<const Dataset> patterns,
                                       std::shared_ptr<const Dataset> eval,
                                       SmoothingKind kind, bool loo)
    : patterns_(std::move(patterns)),
      eval_(std::move(eval)),
      kind_(kind),
      loo_(loo) {
  if (!patterns_ || !eval_) throw std::invalid_argument("null dataset");
  if (patterns_->size() == 0) throw std::invalid_argument("empty pattern set");
  if (eval_->size() == 0) throw std::invalid_argument("empty evaluation set");
  if (patterns_->num_features() != eval_->num_features()) {
    throw std::invalid_argument("pattern and evaluation feature counts differ");
  }
  if (patterns_->num_classes() != eval_->num_classes()) {
    throw std::invalid_argument("pattern and evaluation class counts differ");
  }
  const std::size_t P = patterns_->size();
  const std::size_t N = patterns_->num_features();
  xt_.resize(N * P);
  for (std::size_t p = 0; p < P; ++p) {
    const auto row = patterns_->row(p);
    for (std::size_t d = 0; d < N; ++d) xt_[d * P + p] = row[d];
  }
}

std::size_t ErrorRateObjective::dimension() const {
  return SmoothingSpec::dimension(kind_, patterns_->num_classes(),
                                  patterns_->num_features());
}

std::size_t ErrorRateObjective::eval_size() const { return eval_->size(); }

std::vector<std::size_t> ErrorRateObjective::predict(
    std::span<const double> candidate) const {
  const Dataset& pat = *patterns_;
  const Dataset& ev = *eval_;
  const std::size_t P = pat.size();
  const std::size_t N = pat.num_features();
  const std::size_t G = pat.num_classes();
  const SmoothingSpec h = smoothing_from_position(candidate, kind_, G, N);

  // per-class constant sum_d log((2/pi) / h_gd)
  std::vector<double> log_norm(G, 0.0);
  for (std::size_t g = 0; g < G; ++g) {
    for (std::size_t d = 0; d < N; ++d) {
      log_norm[g] += std::log(2.0 / std::numbers::pi / h.bandwidth(g, d));
    }
  }
  // squared inverse bandwidth of each pattern's own class, N x P
  std::vector<double> ih2(N * P);
  for (std::size_t d = 0; d < N; ++d) {
    for (std::size_t p = 0; p < P; ++p) {
      const double inv = 1.0 / h.bandwidth(pat.labels[p], d);
      ih2[d * P + p] = inv * inv;
    }
  }

  std::vector<double> prod(P);
  std::vector<double> sums(G);
  std::vector<double> scores(G);
  std::vector<double> logs;
  std::vector<std::size_t> out(ev.size());
  for (std::size_t i = 0; i < ev.size(); ++i) {
    const auto x = ev.row(i);
    std::fill(prod.begin(), prod.end(), 1.0);
    for (std::size_t d = 0; d < N; ++d) {
      const double* col = xt_.data() + d * P;
      const double* w = ih2.data() + d * P;
      const double xd = x[d];
      for (std::size_t p = 0; p < P; ++p) {
        const double diff = col[p] - xd;
        prod[p] *= 1.0 + diff * diff * w[p];
      }
    }
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t p = 0; p < P; ++p) {
      if (loo_ && p == i) continue;
      sums[pat.labels[p]] += 1.0 / (prod[p] * prod[p]);
    }
    for (std::size_t g = 0; g < G; ++g) {
      std::size_t count = pat.class_counts[g];
      if (loo_ && pat.labels[i] == g) --count;
      if (count == 0) {
        scores[g] = -std::numeric_limits<double>::infinity();
        continue;
      }
      double log_sum;
      if (sums[g] > kTiny) {
        log_sum = std::log(sums[g]);
      } else {
        // every kernel underflowed; redo this class in the log domain
        logs.clear();
        for (std::size_t p = 0; p < P; ++p) {
          if (pat.labels[p] != g || (loo_ && p == i)) continue;
          double t = 0.0;
          for (std::size_t d = 0; d < N; ++d) {
            const double diff = xt_[d * P + p] - x[d];
            t -= 2.0 * std::log1p(diff * diff * ih2[d * P + p]);
          }
          logs.push_back(t);
        }
        const double peak = *std::max_element(logs.begin(), logs.end());
        double acc = 0.0;
        for (double t : logs) acc += std::exp(t - peak);
        log_sum = peak + std::log(acc);
      }
      scores[g] = log_norm[g] - std::log(static_cast<double>(count)) + log_sum;
    }
    out[i] = argmax_lowest(scores);
  }
  return out;
}

double ErrorRateObjective::operator()(std::span<const double> candidate) const {
  if (candidate.size() != dimension()) {
    throw std::invalid_argument("candidate has " + std::to_string(candidate.size()) +
                                " entries, expected " + std::to_string(dimension()));
  }
  const auto pred = predict(candidate);
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] != eval_->labels[i]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(pred.size());
}

double fitness_of(std::span<const double> candidate, const Dataset& train,
                  const Dataset& eval, SmoothingKind kind) {
  if (eval.size() == 0) throw std::invalid_argument("empty evaluation set");
  if (eval.num_features() != train.num_features()) {
    throw std::invalid_argument("feature counts differ");
  }
  const PnnModel model(train, SmoothingSpec::from_vector(kind, candidate,
                                                         train.num_classes(),
                                                         train.num_features()));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < eval.size(); ++i) {
    if (classify(model, eval.row(i)) == eval.labels[i]) ++correct;
  }
  return 1.0 - static_cast<double>(correct) / static_cast<double>(eval.size());
}

}  // namespace pnnchm
