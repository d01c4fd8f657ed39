#include "pnnchm/pnn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace pnnchm {

namespace {

constexpr double kTwoOverPi = 2.0 / std::numbers::pi;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double log_sum_exp(std::span<const double> v) {
  double peak = -std::numeric_limits<double>::infinity();
  for (double x : v) peak = std::max(peak, x);
  if (!std::isfinite(peak)) return peak;
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - peak);
  return peak + std::log(acc);
}

void check_query(const PnnModel& model, std::span<const double> x,
                 std::size_t cls) {
  if (x.size() != model.patterns().num_features()) {
    throw std::invalid_argument("query dimension does not match patterns");
  }
  if (cls >= model.patterns().num_classes()) {
    throw std::invalid_argument("class index out of range");
  }
  if (model.patterns().class_counts[cls] == 0) {
    throw std::invalid_argument("class " + std::to_string(cls) +
                                " has no patterns");
  }
}

}  // namespace

std::string_view to_string(SmoothingKind kind) {
  switch (kind) {
    case SmoothingKind::Scalar: return "scalar";
    case SmoothingKind::PerClass: return "per-class";
    case SmoothingKind::PerFeature: return "per-feature";
    case SmoothingKind::Matrix: return "matrix";
  }
  return "per-feature";
}

SmoothingKind smoothing_kind_from_string(std::string_view name) {
  if (name == "scalar" || name == "I") return SmoothingKind::Scalar;
  if (name == "per-class" || name == "II") return SmoothingKind::PerClass;
  if (name == "per-feature" || name == "III") return SmoothingKind::PerFeature;
  if (name == "matrix" || name == "IV") return SmoothingKind::Matrix;
  throw std::invalid_argument("unknown smoothing kind: " + std::string(name));
}

SmoothingSpec SmoothingSpec::matrix(std::size_t classes, std::size_t features,
                                    std::vector<double> h) {
  if (h.size() != classes * features) {
    throw std::invalid_argument("bandwidth matrix has wrong size");
  }
  return SmoothingSpec{MatrixBandwidth{classes, features, std::move(h)}};
}

std::size_t SmoothingSpec::dimension(SmoothingKind kind, std::size_t classes,
                                     std::size_t features) {
  switch (kind) {
    case SmoothingKind::Scalar: return 1;
    case SmoothingKind::PerClass: return classes;
    case SmoothingKind::PerFeature: return features;
    case SmoothingKind::Matrix: return classes * features;
  }
  return features;
}

SmoothingSpec SmoothingSpec::from_vector(SmoothingKind kind,
                                         std::span<const double> values,
                                         std::size_t classes,
                                         std::size_t features) {
  if (values.size() != dimension(kind, classes, features)) {
    throw std::invalid_argument(
        "candidate has " + std::to_string(values.size()) +
        " entries, smoothing kind " + std::string(to_string(kind)) + " needs " +
        std::to_string(dimension(kind, classes, features)));
  }
  std::vector<double> v(values.begin(), values.end());
  switch (kind) {
    case SmoothingKind::Scalar: return scalar(v[0]);
    case SmoothingKind::PerClass: return per_class(std::move(v));
    case SmoothingKind::PerFeature: return per_feature(std::move(v));
    case SmoothingKind::Matrix: return matrix(classes, features, std::move(v));
  }
  return per_feature(std::move(v));
}

SmoothingKind SmoothingSpec::kind() const {
  return std::visit(
      overloaded{
          [](const ScalarBandwidth&) { return SmoothingKind::Scalar; },
          [](const PerClassBandwidth&) { return SmoothingKind::PerClass; },
          [](const PerFeatureBandwidth&) { return SmoothingKind::PerFeature; },
          [](const MatrixBandwidth&) { return SmoothingKind::Matrix; }},
      value_);
}

std::vector<double> SmoothingSpec::to_vector() const {
  return std::visit(
      overloaded{
          [](const ScalarBandwidth& s) { return std::vector<double>{s.h}; },
          [](const PerClassBandwidth& s) { return s.h; },
          [](const PerFeatureBandwidth& s) { return s.h; },
          [](const MatrixBandwidth& s) { return s.h; }},
      value_);
}

double SmoothingSpec::bandwidth(std::size_t cls, std::size_t feature) const {
  return std::visit(
      overloaded{
          [](const ScalarBandwidth& s) { return s.h; },
          [&](const PerClassBandwidth& s) { return s.h.at(cls); },
          [&](const PerFeatureBandwidth& s) { return s.h.at(feature); },
          [&](const MatrixBandwidth& s) {
            if (cls >= s.classes || feature >= s.features) {
              throw std::out_of_range("bandwidth matrix index");
            }
            return s.h[cls * s.features + feature];
          }},
      value_);
}

double SmoothingSpec::determinant(std::size_t cls, std::size_t features) const {
  double det = 1.0;
  for (std::size_t d = 0; d < features; ++d) det *= bandwidth(cls, d);
  return det;
}

void SmoothingSpec::validate(std::size_t classes, std::size_t features,
                             double upper) const {
  const std::size_t expected = dimension(kind(), classes, features);
  const std::vector<double> v = to_vector();
  if (v.size() != expected) {
    throw std::invalid_argument("smoothing dimensions do not match dataset");
  }
  if (const auto* m = std::get_if<MatrixBandwidth>(&value_)) {
    if (m->classes != classes || m->features != features) {
      throw std::invalid_argument("bandwidth matrix shape does not match dataset");
    }
  }
  for (double h : v) {
    if (!(h > 0.0) || !(h <= upper)) {
      throw std::invalid_argument("bandwidth " + std::to_string(h) +
                                  " outside (0, " + std::to_string(upper) + "]");
    }
  }
}

PnnModel::PnnModel(std::shared_ptr<const Dataset> patterns,
                   SmoothingSpec smoothing, std::vector<double> modification)
    : patterns_(std::move(patterns)),
      smoothing_(std::move(smoothing)),
      s_(std::move(modification)) {
  if (!patterns_) throw std::invalid_argument("null pattern set");
  if (patterns_->size() == 0) throw std::invalid_argument("empty pattern set");
  smoothing_.validate(patterns_->num_classes(), patterns_->num_features());
  if (s_.empty()) s_.assign(patterns_->size(), 1.0);
  if (s_.size() != patterns_->size()) {
    throw std::invalid_argument("modification vector length differs from P");
  }
  for (double s : s_) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw std::invalid_argument("modification coefficients must be positive");
    }
  }
}

PnnModel::PnnModel(Dataset patterns, SmoothingSpec smoothing,
                   std::vector<double> modification)
    : PnnModel(std::make_shared<const Dataset>(std::move(patterns)),
               std::move(smoothing), std::move(modification)) {}

double cauchy_kernel(double u) {
  const double q = u * u + 1.0;
  return kTwoOverPi / (q * q);
}

double product_kernel(std::span<const double> x) {
  double k = 1.0;
  for (double xi : x) k *= cauchy_kernel(xi);
  return k;
}

double kde(std::span<const double> x, const FeatureMatrix& patterns, double h) {
  if (patterns.rows() == 0) throw std::invalid_argument("kde: no patterns");
  if (!(h > 0.0)) throw std::invalid_argument("kde: bandwidth must be positive");
  const auto n = static_cast<std::size_t>(patterns.cols());
  if (x.size() != n) throw std::invalid_argument("kde: dimension mismatch");

  std::vector<double> u(n);
  double sum = 0.0;
  for (Eigen::Index p = 0; p < patterns.rows(); ++p) {
    for (std::size_t d = 0; d < n; ++d) {
      u[d] = (x[d] - patterns(p, static_cast<Eigen::Index>(d))) / h;
    }
    sum += product_kernel(u);
  }
  return sum / (static_cast<double>(patterns.rows()) *
                std::pow(h, static_cast<double>(n)));
}

double class_density(const PnnModel& model, std::span<const double> x,
                     std::size_t cls) {
  check_query(model, x, cls);
  const Dataset& ds = model.patterns();
  const std::size_t n = ds.num_features();
  const auto s = model.modification();

  std::vector<double> inv_h(n);
  for (std::size_t d = 0; d < n; ++d) {
    inv_h[d] = 1.0 / model.smoothing().bandwidth(cls, d);
  }

  double sum = 0.0;
  std::vector<double> u(n);
  for (std::size_t p = 0; p < ds.size(); ++p) {
    if (ds.labels[p] != cls) continue;
    const auto xp = ds.row(p);
    for (std::size_t d = 0; d < n; ++d) {
      u[d] = (x[d] - xp[d]) * inv_h[d] / s[p];
    }
    sum += product_kernel(u) / std::pow(s[p], static_cast<double>(n));
  }
  return sum / (static_cast<double>(ds.class_counts[cls]) *
                model.smoothing().determinant(cls, n));
}

double log_class_density(const PnnModel& model, std::span<const double> x,
                         std::size_t cls) {
  check_query(model, x, cls);
  const Dataset& ds = model.patterns();
  const std::size_t n = ds.num_features();
  const auto s = model.modification();
  const double log_two_over_pi = std::log(kTwoOverPi);

  double log_det = 0.0;
  std::vector<double> inv_h(n);
  for (std::size_t d = 0; d < n; ++d) {
    const double h = model.smoothing().bandwidth(cls, d);
    inv_h[d] = 1.0 / h;
    log_det += std::log(h);
  }

  std::vector<double> terms;
  terms.reserve(ds.class_counts[cls]);
  for (std::size_t p = 0; p < ds.size(); ++p) {
    if (ds.labels[p] != cls) continue;
    const auto xp = ds.row(p);
    const double log_s = std::log(s[p]);
    double t = -static_cast<double>(n) * log_s;
    for (std::size_t d = 0; d < n; ++d) {
      const double u = (x[d] - xp[d]) * inv_h[d] / s[p];
      t += log_two_over_pi - 2.0 * std::log1p(u * u);
    }
    terms.push_back(t);
  }
  return log_sum_exp(terms) -
         std::log(static_cast<double>(ds.class_counts[cls])) - log_det;
}

std::vector<double> class_densities(const PnnModel& model,
                                    std::span<const double> x) {
  std::vector<double> out(model.patterns().num_classes());
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = class_density(model, x, j);
  }
  return out;
}

std::size_t argmax_lowest(std::span<const double> scores) {
  if (scores.empty()) throw std::invalid_argument("argmax of empty range");
  std::size_t best = 0;
  for (std::size_t j = 1; j < scores.size(); ++j) {
    if (scores[j] > scores[best]) best = j;
  }
  return best;
}

std::size_t classify(const PnnModel& model, std::span<const double> x) {
  const Dataset& ds = model.patterns();
  std::vector<double> scores(ds.num_classes(),
                             -std::numeric_limits<double>::infinity());
  for (std::size_t j = 0; j < scores.size(); ++j) {
    if (ds.class_counts[j] > 0) scores[j] = log_class_density(model, x, j);
  }
  return argmax_lowest(scores);
}

PnnModel apply_modification(const PnnModel& model,
                            const ModificationConfig& cfg) {
  if (!(cfg.intensity >= 0.0)) {
    throw std::invalid_argument("modification intensity must be >= 0");
  }
  if (!(cfg.density_floor > 0.0)) {
    throw std::invalid_argument("density floor must be > 0");
  }
  const Dataset& ds = model.patterns();
  if (cfg.intensity == 0.0) {
    return PnnModel(model.shared_patterns(), model.smoothing(),
                    std::vector<double>(ds.size(), 1.0));
  }

  const PnnModel base(model.shared_patterns(), model.smoothing());
  std::vector<double> log_f(ds.size());
  double mean_log = 0.0;
  for (std::size_t p = 0; p < ds.size(); ++p) {
    const double f = class_density(base, ds.row(p), ds.labels[p]);
    log_f[p] = std::log(std::max(f, cfg.density_floor));
    mean_log += log_f[p];
  }
  mean_log /= static_cast<double>(ds.size());

  std::vector<double> s(ds.size());
  for (std::size_t p = 0; p < ds.size(); ++p) {
    s[p] = std::exp(-cfg.intensity * (log_f[p] - mean_log));
  }
  return PnnModel(model.shared_patterns(), model.smoothing(), std::move(s));
}

}  // namespace pnnchm
