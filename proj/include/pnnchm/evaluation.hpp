#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace pnnchm {

struct RunMetrics {
  double accuracy = 0.0;
  double precision = 0.0;  // macro average
  double recall = 0.0;     // macro average
  /// confusion[true][predicted]
  std::vector<std::vector<std::size_t>> confusion;
  std::uint64_t seed = 0;
};

/// Throws std::invalid_argument on length mismatch, empty input or a label
/// outside [0, G). Classes with an empty denominator contribute 0.
RunMetrics compute_metrics(std::span<const std::size_t> predictions,
                           std::span<const std::size_t> labels,
                           std::size_t num_classes);

struct MetricStats {
  double avg = 0.0;
  double max = 0.0;
  double min = 0.0;
};

struct MethodSummary {
  std::size_t runs = 0;
  MetricStats accuracy;
  MetricStats precision;
  MetricStats recall;
};

/// Mean, maximum and minimum over runs; throws on an empty list.
MethodSummary aggregate_runs(std::span<const RunMetrics> runs);

/// Rounds half away from zero to three decimals.
double round3(double x);

/// scores[method][dataset]. On every dataset each method whose score,
/// rounded to three decimals, equals the best gets one point. NaN marks a
/// missing cell and never scores.
std::vector<int> rank(const std::vector<std::vector<double>>& scores);

}  // namespace pnnchm
