#pragma once

#include <string>
#include <vector>

#include "mgtd/metrics.hpp"
#include "mgtd/trainer.hpp"

namespace mgtd {

// The three ablation axes. effective_batch values are realized as
// accumulation_steps = value / micro_batch with micro_batch fixed at 2.
enum class SweepAxis { max_tokens, dropout_p, effective_batch };

std::string to_string(SweepAxis axis);
SweepAxis sweep_axis_from_string(const std::string& s);

// Shipped sweep grids:
//   max_tokens      {128, 256, 512, 1024, 2048, 4096}
//   dropout_p       {0, 0.2, 0.4, 0.6, 0.9}
//   effective_batch {2, 4, 8, 16, 32, 64, 128}
std::vector<double> default_axis_values(SweepAxis axis);

struct SweepSpec {
  SweepAxis axis = SweepAxis::dropout_p;
  std::vector<double> values;
  TrainConfig base;
  std::vector<std::uint64_t> seeds = {1, 2, 3};
};

struct SweepRow {
  double value = 0.0;
  std::vector<Metrics> per_seed;  // test-set metrics, one per seed
  MetricsAggregate aggregate;
  bool best = false;
  std::string error;  // non-empty when every run of this value failed
};

struct SweepResult {
  SweepAxis axis = SweepAxis::dropout_p;
  std::vector<SweepRow> rows;
};

// Trains value x seed cells via fit() on the (already augmented) instances
// and evaluates each best checkpoint on the test documents. A failed cell is
// recorded on its row and the sweep continues. Cells are independent and
// fully seeded, so results do not depend on execution order or worker count.
SweepResult run_sweep(const SweepSpec& spec,
                      const std::vector<ContrastiveInstance>& train_instances,
                      const std::vector<Document>& val_docs,
                      const std::vector<Document>& test_docs, int workers = 1);

// Aligned plain-text table: one row per axis value with Macro-f1, Micro-f1
// and Accuracy columns, best row flagged with '*'.
std::string render_table_text(const SweepResult& result);

// One JSON object per row with per-seed metrics and mean/stddev aggregates.
std::string render_table_jsonl(const SweepResult& result);

}  // namespace mgtd
