#include "mgtd/metrics.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace mgtd {

Metrics compute_metrics(std::span<const int> gold, std::span<const int> pred) {
  if (gold.size() != pred.size()) {
    throw std::runtime_error("compute_metrics: length mismatch (" +
                             std::to_string(gold.size()) + " vs " +
                             std::to_string(pred.size()) + ")");
  }
  if (gold.empty()) {
    throw std::runtime_error("compute_metrics: empty input");
  }

  // confusion[g][p]
  std::array<std::array<std::size_t, 2>, 2> confusion{{{0, 0}, {0, 0}}};
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if ((gold[i] != 0 && gold[i] != 1) || (pred[i] != 0 && pred[i] != 1)) {
      throw std::runtime_error("compute_metrics: labels must be 0 or 1");
    }
    ++confusion[gold[i]][pred[i]];
  }

  const std::size_t n = gold.size();
  const std::size_t matches = confusion[0][0] + confusion[1][1];

  double macro_sum = 0.0;
  std::size_t pooled_tp = 0, pooled_fp = 0, pooled_fn = 0;
  for (int cls = 0; cls < 2; ++cls) {
    const std::size_t tp = confusion[cls][cls];
    const std::size_t fp = confusion[1 - cls][cls];
    const std::size_t fn = confusion[cls][1 - cls];
    pooled_tp += tp;
    pooled_fp += fp;
    pooled_fn += fn;
    // F1 = 2TP / (2TP + FP + FN); a class absent from both gold and pred
    // scores 0 and still counts in the macro mean.
    const std::size_t denom = 2 * tp + fp + fn;
    macro_sum += denom == 0 ? 0.0
                            : (2.0 * static_cast<double>(tp)) /
                                  static_cast<double>(denom);
  }

  Metrics m;
  m.n = n;
  m.accuracy = static_cast<double>(matches) / static_cast<double>(n);
  m.macro_f1 = macro_sum / 2.0;
  const std::size_t micro_denom = 2 * pooled_tp + pooled_fp + pooled_fn;
  m.micro_f1 = micro_denom == 0 ? 0.0
                                : (2.0 * static_cast<double>(pooled_tp)) /
                                      static_cast<double>(micro_denom);
  return m;
}

MetricsAggregate aggregate_seeds(std::span<const Metrics> runs) {
  if (runs.empty()) {
    throw std::runtime_error("aggregate_seeds: need at least one run");
  }
  auto agg = [&](auto field) {
    double sum = 0.0;
    for (const auto& r : runs) sum += r.*field;
    const double mean = sum / static_cast<double>(runs.size());
    double var = 0.0;
    for (const auto& r : runs) {
      const double d = r.*field - mean;
      var += d * d;
    }
    var /= static_cast<double>(runs.size());  // population variance
    return MeanStd{mean, std::sqrt(var)};
  };

  MetricsAggregate out;
  out.runs = runs.size();
  out.accuracy = agg(&Metrics::accuracy);
  out.macro_f1 = agg(&Metrics::macro_f1);
  out.micro_f1 = agg(&Metrics::micro_f1);
  return out;
}

}  // namespace mgtd
