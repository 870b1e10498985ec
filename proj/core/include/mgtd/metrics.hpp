#pragma once

#include <cstddef>
#include <span>

namespace mgtd {

struct Metrics {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double micro_f1 = 0.0;  // equals accuracy exactly in single-label binary evaluation
  std::size_t n = 0;
};

// Binary confusion-matrix metrics over gold/pred vectors of {0, 1}.
// Per-class F1 uses the 0/0 -> 0 convention and both classes always count in
// the macro mean. Micro-F1 comes from pooled TP/FP/FN over both classes,
// which for single-label binary data collapses to matches/n == accuracy.
// Throws on length mismatch, empty input, or values outside {0, 1}.
Metrics compute_metrics(std::span<const int> gold, std::span<const int> pred);

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
};

struct MetricsAggregate {
  MeanStd accuracy;
  MeanStd macro_f1;
  MeanStd micro_f1;
  std::size_t runs = 0;
};

// Mean and population stddev per metric over >= 1 runs.
MetricsAggregate aggregate_seeds(std::span<const Metrics> runs);

}  // namespace mgtd
