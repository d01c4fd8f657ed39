#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "pnnchm/dataset.hpp"

namespace pnnchm {

/// Bandwidths are dimensionless and positive. Every variant is read as a
/// diagonal bandwidth matrix per class: bandwidth(g, d).
struct ScalarBandwidth {
  double h = 1.0;
  bool operator==(const ScalarBandwidth&) const = default;
};
struct PerClassBandwidth {
  std::vector<double> h;  // length G
  bool operator==(const PerClassBandwidth&) const = default;
};
struct PerFeatureBandwidth {
  std::vector<double> h;  // length N
  bool operator==(const PerFeatureBandwidth&) const = default;
};
struct MatrixBandwidth {
  std::size_t classes = 0;
  std::size_t features = 0;
  std::vector<double> h;  // G x N, row-major
  bool operator==(const MatrixBandwidth&) const = default;
};

enum class SmoothingKind { Scalar, PerClass, PerFeature, Matrix };

std::string_view to_string(SmoothingKind kind);
SmoothingKind smoothing_kind_from_string(std::string_view name);

inline constexpr double kDefaultBandwidthUpper = 10000.0;

class SmoothingSpec {
 public:
  using Variant = std::variant<ScalarBandwidth, PerClassBandwidth,
                               PerFeatureBandwidth, MatrixBandwidth>;

  SmoothingSpec() = default;
  explicit SmoothingSpec(Variant v) : value_(std::move(v)) {}

  static SmoothingSpec scalar(double h) { return SmoothingSpec{ScalarBandwidth{h}}; }
  static SmoothingSpec per_class(std::vector<double> h) {
    return SmoothingSpec{PerClassBandwidth{std::move(h)}};
  }
  static SmoothingSpec per_feature(std::vector<double> h) {
    return SmoothingSpec{PerFeatureBandwidth{std::move(h)}};
  }
  static SmoothingSpec matrix(std::size_t classes, std::size_t features,
                              std::vector<double> h);

  /// Interprets a flat optimizer vector as `kind` for G classes, N features.
  static SmoothingSpec from_vector(SmoothingKind kind,
                                   std::span<const double> values,
                                   std::size_t classes, std::size_t features);

  /// Number of free parameters `kind` needs for G classes and N features.
  static std::size_t dimension(SmoothingKind kind, std::size_t classes,
                               std::size_t features);

  SmoothingKind kind() const;
  const Variant& value() const { return value_; }
  std::vector<double> to_vector() const;

  double bandwidth(std::size_t cls, std::size_t feature) const;

  /// Product of the diagonal bandwidths of class `cls` over N features.
  double determinant(std::size_t cls, std::size_t features) const;

  /// Throws std::invalid_argument unless dimensions match and every entry
  /// lies in (0, upper].
  void validate(std::size_t classes, std::size_t features,
                double upper = kDefaultBandwidthUpper) const;

  bool operator==(const SmoothingSpec&) const = default;

 private:
  Variant value_{ScalarBandwidth{}};
};

struct ModificationConfig {
  double intensity = 0.0;         // c >= 0
  double density_floor = 1e-300;  // clamp for zero densities
};

/// Pattern layer, smoothing and per-pattern modification coefficients.
/// Immutable; the pattern set is shared between copies.
class PnnModel {
 public:
  PnnModel(std::shared_ptr<const Dataset> patterns, SmoothingSpec smoothing,
           std::vector<double> modification = {});
  PnnModel(Dataset patterns, SmoothingSpec smoothing,
           std::vector<double> modification = {});

  const Dataset& patterns() const { return *patterns_; }
  const std::shared_ptr<const Dataset>& shared_patterns() const {
    return patterns_;
  }
  const SmoothingSpec& smoothing() const { return smoothing_; }
  std::span<const double> modification() const { return s_; }

 private:
  std::shared_ptr<const Dataset> patterns_;
  SmoothingSpec smoothing_;
  std::vector<double> s_;
};

/// One-dimensional Cauchy kernel 2 / (pi (u^2 + 1)^2).
double cauchy_kernel(double u);

/// Product of one-dimensional Cauchy kernels over the coordinates of x.
double product_kernel(std::span<const double> x);

/// Scalar-bandwidth kernel density estimate over the rows of `patterns`.
double kde(std::span<const double> x, const FeatureMatrix& patterns, double h);

/// Summation-layer output for class `cls` at x. Throws if the class is empty.
double class_density(const PnnModel& model, std::span<const double> x,
                     std::size_t cls);

/// Natural log of class_density, computed without underflow.
double log_class_density(const PnnModel& model, std::span<const double> x,
                         std::size_t cls);

/// All class densities at x (index = class).
std::vector<double> class_densities(const PnnModel& model,
                                    std::span<const double> x);

/// Bayes decision: argmax over classes, ties to the lowest class index.
std::size_t classify(const PnnModel& model, std::span<const double> x);

/// Picks the index of the maximum, ties to the lowest index.
std::size_t argmax_lowest(std::span<const double> scores);

/// Sets per-pattern coefficients s_p = (f(x_p) / geometric_mean)^(-c) from
/// the unmodified densities of each pattern's own class.
PnnModel apply_modification(const PnnModel& model,
                            const ModificationConfig& cfg);

}  // namespace pnnchm
