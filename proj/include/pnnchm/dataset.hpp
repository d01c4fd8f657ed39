#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pnnchm {

using FeatureMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Labeled numeric samples. For a PNN the training Dataset is the pattern
/// layer itself, so nothing is fitted beyond what is stored here.
struct Dataset {
  FeatureMatrix features;                 // P x N
  std::vector<std::size_t> labels;        // length P, values in [0, G)
  std::vector<std::size_t> class_counts;  // length G
  std::vector<std::string> feature_names;
  std::vector<std::string> class_names;

  std::size_t size() const { return labels.size(); }
  std::size_t num_features() const {
    return static_cast<std::size_t>(features.cols());
  }
  std::size_t num_classes() const { return class_counts.size(); }

  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * num_features(), num_features()};
  }
};

/// Builds a Dataset, counting classes and checking labels and finiteness.
/// Throws std::invalid_argument on malformed input.
Dataset make_dataset(FeatureMatrix features, std::vector<std::size_t> labels,
                     std::size_t num_classes,
                     std::vector<std::string> feature_names = {},
                     std::vector<std::string> class_names = {});

/// Throws std::invalid_argument if an invariant does not hold. Pattern sets
/// need every class populated; evaluation sets may leave a class empty.
void validate(const Dataset& ds, bool require_every_class = true);

/// Rows `indices` of `ds` in the given order; class metadata is kept.
Dataset subset(const Dataset& ds, std::span<const std::size_t> indices);

/// Per-feature mean and standard deviation estimated on a reference set.
struct ZScore {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd stddev;
};

ZScore fit_zscore(const Dataset& ds);
Dataset apply_zscore(const Dataset& ds, const ZScore& z);

}  // namespace pnnchm
