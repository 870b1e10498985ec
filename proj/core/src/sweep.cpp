#include "mgtd/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace mgtd {

namespace {

using nlohmann::json;

TrainConfig apply_axis(const TrainConfig& base, SweepAxis axis, double value) {
  TrainConfig cfg = base;
  switch (axis) {
    case SweepAxis::max_tokens:
      cfg.max_tokens = static_cast<int>(value);
      break;
    case SweepAxis::dropout_p:
      cfg.dropout_p = value;
      break;
    case SweepAxis::effective_batch: {
      const int effective = static_cast<int>(value);
      cfg.micro_batch = 2;
      if (effective < 2 || effective % 2 != 0) {
        throw std::runtime_error(
            "effective_batch value " + std::to_string(effective) +
            " is not realizable with micro_batch fixed at 2");
      }
      cfg.accumulation_steps = effective / 2;
      break;
    }
  }
  validate(cfg);
  return cfg;
}

std::string format_axis_value(SweepAxis axis, double value) {
  char buf[32];
  if (axis == SweepAxis::dropout_p) {
    std::snprintf(buf, sizeof(buf), "%.2f", value);
  } else {
    std::snprintf(buf, sizeof(buf), "%d", static_cast<int>(value));
  }
  return buf;
}

}  // namespace

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::max_tokens:
      return "max_tokens";
    case SweepAxis::dropout_p:
      return "dropout_p";
    case SweepAxis::effective_batch:
      return "effective_batch";
  }
  throw std::runtime_error("unknown sweep axis");
}

SweepAxis sweep_axis_from_string(const std::string& s) {
  if (s == "max_tokens") return SweepAxis::max_tokens;
  if (s == "dropout_p") return SweepAxis::dropout_p;
  if (s == "effective_batch") return SweepAxis::effective_batch;
  throw std::runtime_error(
      "unknown sweep axis \"" + s +
      "\" (expected max_tokens, dropout_p, or effective_batch)");
}

std::vector<double> default_axis_values(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::max_tokens:
      return {128, 256, 512, 1024, 2048, 4096};
    case SweepAxis::dropout_p:
      return {0.0, 0.2, 0.4, 0.6, 0.9};
    case SweepAxis::effective_batch:
      return {2, 4, 8, 16, 32, 64, 128};
  }
  throw std::runtime_error("unknown sweep axis");
}

SweepResult run_sweep(const SweepSpec& spec,
                      const std::vector<ContrastiveInstance>& train_instances,
                      const std::vector<Document>& val_docs,
                      const std::vector<Document>& test_docs, int workers) {
  if (spec.values.empty()) {
    throw std::runtime_error("run_sweep: no axis values");
  }
  if (spec.seeds.empty()) {
    throw std::runtime_error("run_sweep: no seeds");
  }

  struct Cell {
    std::size_t row;
    std::uint64_t seed;
    Metrics metrics;
    std::string error;
  };
  std::vector<Cell> cells;
  for (std::size_t r = 0; r < spec.values.size(); ++r) {
    for (std::uint64_t seed : spec.seeds) {
      cells.push_back({r, seed, {}, {}});
    }
  }

  auto run_cell = [&](Cell& cell) {
    try {
      TrainConfig cfg = apply_axis(spec.base, spec.axis, spec.values[cell.row]);
      cfg.seed = cell.seed;
      const FitResult result = fit(train_instances, val_docs, cfg);
      cell.metrics = evaluate_checkpoint(result.checkpoint, test_docs);
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
  };

  const int thread_count =
      std::max(1, std::min<int>(workers, static_cast<int>(cells.size())));
  if (thread_count == 1) {
    for (auto& cell : cells) run_cell(cell);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(thread_count));
    for (int t = 0; t < thread_count; ++t) {
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= cells.size()) return;
          run_cell(cells[i]);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  SweepResult result;
  result.axis = spec.axis;
  result.rows.resize(spec.values.size());
  for (std::size_t r = 0; r < spec.values.size(); ++r) {
    result.rows[r].value = spec.values[r];
  }
  for (const auto& cell : cells) {
    SweepRow& row = result.rows[cell.row];
    if (!cell.error.empty()) {
      if (!row.error.empty()) row.error += "; ";
      row.error += "seed " + std::to_string(cell.seed) + ": " + cell.error;
    } else {
      row.per_seed.push_back(cell.metrics);
    }
  }

  double best_acc = -1.0;
  std::size_t best_row = result.rows.size();
  for (std::size_t r = 0; r < result.rows.size(); ++r) {
    SweepRow& row = result.rows[r];
    if (row.per_seed.empty()) continue;
    row.aggregate = aggregate_seeds(row.per_seed);
    if (row.aggregate.accuracy.mean > best_acc) {
      best_acc = row.aggregate.accuracy.mean;
      best_row = r;
    }
  }
  if (best_row < result.rows.size()) result.rows[best_row].best = true;
  return result;
}

std::string render_table_text(const SweepResult& result) {
  const std::string axis_name = to_string(result.axis);
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%2s %-16s %10s %10s %10s\n", "",
                axis_name.c_str(), "Macro-f1", "Micro-f1", "Accuracy");
  out << line;
  for (const auto& row : result.rows) {
    const std::string value = format_axis_value(result.axis, row.value);
    if (!row.error.empty()) {
      std::snprintf(line, sizeof(line), "%2s %-16s %s\n", "", value.c_str(),
                    ("ERROR: " + row.error).c_str());
    } else {
      std::snprintf(line, sizeof(line), "%2s %-16s %10.4f %10.4f %10.4f\n",
                    row.best ? "*" : "", value.c_str(),
                    row.aggregate.macro_f1.mean, row.aggregate.micro_f1.mean,
                    row.aggregate.accuracy.mean);
    }
    out << line;
  }
  return out.str();
}

std::string render_table_jsonl(const SweepResult& result) {
  std::ostringstream out;
  for (const auto& row : result.rows) {
    json rec;
    rec["axis"] = to_string(result.axis);
    rec["value"] = row.value;
    if (!row.error.empty()) {
      rec["error"] = row.error;
    }
    if (!row.per_seed.empty()) {
      rec["macro_f1"] = {{"mean", row.aggregate.macro_f1.mean},
                         {"stddev", row.aggregate.macro_f1.stddev}};
      rec["micro_f1"] = {{"mean", row.aggregate.micro_f1.mean},
                         {"stddev", row.aggregate.micro_f1.stddev}};
      rec["accuracy"] = {{"mean", row.aggregate.accuracy.mean},
                         {"stddev", row.aggregate.accuracy.stddev}};
      rec["runs"] = row.per_seed.size();
      rec["best"] = row.best;
      json per_seed = json::array();
      for (const auto& m : row.per_seed) {
        per_seed.push_back({{"accuracy", m.accuracy},
                            {"macro_f1", m.macro_f1},
                            {"micro_f1", m.micro_f1},
                            {"n", m.n}});
      }
      rec["per_seed"] = per_seed;
    }
    out << rec.dump() << '\n';
  }
  return out.str();
}

}  // namespace mgtd
