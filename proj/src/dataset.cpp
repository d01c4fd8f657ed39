#include "pnnchm/dataset.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pnnchm {

Dataset make_dataset(FeatureMatrix features, std::vector<std::size_t> labels,
                     std::size_t num_classes,
                     std::vector<std::string> feature_names,
                     std::vector<std::string> class_names) {
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw std::invalid_argument("feature rows and label count differ");
  }
  Dataset ds;
  ds.class_counts.assign(num_classes, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= num_classes) {
      throw std::invalid_argument("label " + std::to_string(labels[i]) +
                                  " at row " + std::to_string(i) +
                                  " exceeds class count");
    }
    ++ds.class_counts[labels[i]];
  }
  ds.features = std::move(features);
  ds.labels = std::move(labels);
  ds.feature_names = std::move(feature_names);
  ds.class_names = std::move(class_names);
  if (!ds.features.allFinite()) {
    throw std::invalid_argument("feature matrix contains non-finite values");
  }
  return ds;
}

void validate(const Dataset& ds, bool require_every_class) {
  if (static_cast<std::size_t>(ds.features.rows()) != ds.labels.size()) {
    throw std::invalid_argument("feature rows and label count differ");
  }
  std::vector<std::size_t> counts(ds.num_classes(), 0);
  for (std::size_t label : ds.labels) {
    if (label >= ds.num_classes()) {
      throw std::invalid_argument("label out of range");
    }
    ++counts[label];
  }
  if (counts != ds.class_counts) {
    throw std::invalid_argument("class_counts do not match labels");
  }
  if (require_every_class) {
    for (std::size_t j = 0; j < counts.size(); ++j) {
      if (counts[j] == 0) {
        throw std::invalid_argument("class " + std::to_string(j) +
                                    " has no samples");
      }
    }
  }
  if (!ds.features.allFinite()) {
    throw std::invalid_argument("feature matrix contains non-finite values");
  }
}

Dataset subset(const Dataset& ds, std::span<const std::size_t> indices) {
  FeatureMatrix features(static_cast<Eigen::Index>(indices.size()),
                         ds.features.cols());
  std::vector<std::size_t> labels;
  labels.reserve(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const std::size_t i = indices[k];
    if (i >= ds.size()) throw std::out_of_range("subset index out of range");
    features.row(static_cast<Eigen::Index>(k)) =
        ds.features.row(static_cast<Eigen::Index>(i));
    labels.push_back(ds.labels[i]);
  }
  return make_dataset(std::move(features), std::move(labels), ds.num_classes(),
                      ds.feature_names, ds.class_names);
}

ZScore fit_zscore(const Dataset& ds) {
  if (ds.size() == 0) throw std::invalid_argument("empty dataset");
  ZScore z;
  z.mean = ds.features.colwise().mean();
  const FeatureMatrix centered = ds.features.rowwise() - z.mean;
  z.stddev = (centered.array().square().colwise().sum() /
              static_cast<double>(ds.size()))
                 .sqrt();
  // constant columns are left unscaled
  for (Eigen::Index d = 0; d < z.stddev.size(); ++d) {
    if (z.stddev[d] == 0.0) z.stddev[d] = 1.0;
  }
  return z;
}

Dataset apply_zscore(const Dataset& ds, const ZScore& z) {
  Dataset out = ds;
  out.features =
      ((ds.features.rowwise() - z.mean).array().rowwise() / z.stddev.array())
          .matrix();
  return out;
}

}  // namespace pnnchm
