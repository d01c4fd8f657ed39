#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "oracle.hpp"
#include "pnnchm/dataset.hpp"

namespace testing_support {

inline pnnchm::Dataset to_dataset(const std::vector<oracle::Sample>& samples,
                                  std::size_t classes) {
  const std::size_t n = samples.front().x.size();
  pnnchm::FeatureMatrix m(static_cast<Eigen::Index>(samples.size()),
                          static_cast<Eigen::Index>(n));
  std::vector<std::size_t> labels;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (std::size_t d = 0; d < n; ++d) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = samples[i].x[d];
    }
    labels.push_back(samples[i].label);
  }
  return pnnchm::make_dataset(std::move(m), std::move(labels), classes);
}

/// Every class gets at least `min_per_class` samples; features drawn around
/// a class-dependent centre.
inline std::vector<oracle::Sample> random_samples(std::mt19937_64& rng, std::size_t p,
                                                  std::size_t n, std::size_t g,
                                                  double spread = 1.0,
                                                  std::size_t min_per_class = 1) {
  std::normal_distribution<double> noise(0.0, spread);
  std::uniform_int_distribution<std::size_t> cls(0, g - 1);
  std::vector<oracle::Sample> out;
  for (std::size_t i = 0; i < p; ++i) {
    oracle::Sample s;
    s.label = i < g * min_per_class ? i % g : cls(rng);
    for (std::size_t d = 0; d < n; ++d) {
      s.x.push_back(static_cast<double>(s.label) * 1.5 + noise(rng));
    }
    out.push_back(std::move(s));
  }
  return out;
}

/// Two well separated blobs, balanced, labels alternating.
inline pnnchm::Dataset separable(std::size_t per_class, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<oracle::Sample> s;
  for (std::size_t i = 0; i < 2 * per_class; ++i) {
    const std::size_t label = i % 2;
    const double offset = label == 0 ? -5.0 : 5.0;
    s.push_back({{offset + u(rng), u(rng)}, label});
  }
  return to_dataset(s, 2);
}

}  // namespace testing_support
