#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "pnnchm/dataset.hpp"
#include "pnnchm/pnn.hpp"

namespace pnnchm {

/// Optimizer positions may touch the lower bound 0; bandwidths are floored
/// here before they reach a model.
inline constexpr double kBandwidthFloor = 1e-12;

/// Clamps every coordinate to [kBandwidthFloor, upper] and builds a SmoothingSpec.
SmoothingSpec smoothing_from_position(std::span<const double> position,
                                      SmoothingKind kind, std::size_t classes,
                                      std::size_t features,
                                      double upper = kDefaultBandwidthUpper);

/// Error rate 1 - correct/total of a PNN whose bandwidths are the candidate.
///
/// Held-out mode classifies a separate evaluation set against the pattern
/// set. Leave-one-out mode classifies every pattern against the others.
/// Calls are const and allocate their own scratch, so one instance may be
/// shared across threads.
class ErrorRateObjective {
 public:
  ErrorRateObjective(std::shared_ptr<const Dataset> patterns,
                     std::shared_ptr<const Dataset> eval,
                     SmoothingKind kind = SmoothingKind::PerFeature);

  static ErrorRateObjective leave_one_out(
      std::shared_ptr<const Dataset> patterns,
      SmoothingKind kind = SmoothingKind::PerFeature);

  double operator()(std::span<const double> candidate) const;
  std::vector<std::size_t> predict(std::span<const double> candidate) const;

  std::size_t dimension() const;
  /// Samples classified per call, i.e. the FE charge of one evaluation.
  std::size_t eval_size() const;
  bool is_leave_one_out() const { return loo_; }
  SmoothingKind kind() const { return kind_; }

 private:
  ErrorRateObjective(std::shared_ptr<const Dataset> patterns,
                     std::shared_ptr<const Dataset> eval, SmoothingKind kind,
                     bool loo);

  std::shared_ptr<const Dataset> patterns_;
  std::shared_ptr<const Dataset> eval_;
  SmoothingKind kind_;
  bool loo_;
  std::vector<double> xt_;  // patterns transposed, N x P
};

/// Reference error rate through PnnModel and classify.
double fitness_of(std::span<const double> candidate, const Dataset& train,
                  const Dataset& eval,
                  SmoothingKind kind = SmoothingKind::PerFeature);

}  // namespace pnnchm
