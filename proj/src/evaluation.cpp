#include "pnnchm/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pnnchm {

RunMetrics compute_metrics(std::span<const std::size_t> predictions,
                           std::span<const std::size_t> labels,
                           std::size_t num_classes) {
  if (predictions.size() != labels.size()) {
    throw std::invalid_argument("predictions and labels differ in length");
  }
  if (labels.empty()) throw std::invalid_argument("no samples");
  if (num_classes == 0) throw std::invalid_argument("no classes");

  RunMetrics m;
  m.confusion.assign(num_classes, std::vector<std::size_t>(num_classes, 0));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= num_classes || predictions[i] >= num_classes) {
      throw std::invalid_argument("class index out of range");
    }
    ++m.confusion[labels[i]][predictions[i]];
    if (labels[i] == predictions[i]) ++correct;
  }
  m.accuracy = static_cast<double>(correct) / static_cast<double>(labels.size());

  double precision = 0.0;
  double recall = 0.0;
  for (std::size_t j = 0; j < num_classes; ++j) {
    const std::size_t tp = m.confusion[j][j];
    std::size_t predicted = 0;
    std::size_t actual = 0;
    for (std::size_t k = 0; k < num_classes; ++k) {
      predicted += m.confusion[k][j];
      actual += m.confusion[j][k];
    }
    if (predicted > 0) precision += static_cast<double>(tp) / static_cast<double>(predicted);
    if (actual > 0) recall += static_cast<double>(tp) / static_cast<double>(actual);
  }
  m.precision = precision / static_cast<double>(num_classes);
  m.recall = recall / static_cast<double>(num_classes);
  return m;
}

namespace {

template <class Get>
MetricStats stats(std::span<const RunMetrics> runs, Get get) {
  MetricStats s;
  s.max = -std::numeric_limits<double>::infinity();
  s.min = std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (const auto& r : runs) {
    const double v = get(r);
    sum += v;
    s.max = std::max(s.max, v);
    s.min = std::min(s.min, v);
  }
  s.avg = sum / static_cast<double>(runs.size());
  // keep avg inside [min, max] despite rounding in the sum
  s.avg = std::clamp(s.avg, s.min, s.max);
  return s;
}

}  // namespace

MethodSummary aggregate_runs(std::span<const RunMetrics> runs) {
  if (runs.empty()) throw std::invalid_argument("no runs to aggregate");
  MethodSummary out;
  out.runs = runs.size();
  out.accuracy = stats(runs, [](const RunMetrics& r) { return r.accuracy; });
  out.precision = stats(runs, [](const RunMetrics& r) { return r.precision; });
  out.recall = stats(runs, [](const RunMetrics& r) { return r.recall; });
  return out;
}

double round3(double x) { return static_cast<double>(std::llround(x * 1000.0)) / 1000.0; }

std::vector<int> rank(const std::vector<std::vector<double>>& scores) {
  std::vector<int> points(scores.size(), 0);
  if (scores.empty()) return points;
  const std::size_t datasets = scores.front().size();
  for (const auto& row : scores) {
    if (row.size() != datasets) {
      throw std::invalid_argument("every method needs the same datasets");
    }
  }
  for (std::size_t d = 0; d < datasets; ++d) {
    long long best = std::numeric_limits<long long>::min();
    bool any = false;
    for (const auto& row : scores) {
      if (std::isnan(row[d])) continue;
      best = std::max(best, std::llround(row[d] * 1000.0));
      any = true;
    }
    if (!any) continue;
    for (std::size_t m = 0; m < scores.size(); ++m) {
      if (!std::isnan(scores[m][d]) && std::llround(scores[m][d] * 1000.0) == best) {
        ++points[m];
      }
    }
  }
  return points;
}

}  // namespace pnnchm
