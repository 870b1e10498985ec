#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "mgtd/model.hpp"
#include "mgtd/objective.hpp"

namespace mgtd {

enum class Monitor { val_accuracy, val_loss };

std::string to_string(Monitor m);
Monitor monitor_from_string(const std::string& s);

// Every knob of one training run. Defaults are the shipped recipe:
// AdamW at 1e-5, micro-batches of 2 accumulated for 8 steps (effective batch
// 16), early stopping with patience 10, 4096-token truncation, 60% head
// dropout and loss weights (0.7, 0.8, 0.1).
struct TrainConfig {
  double learning_rate = 1e-5;
  double weight_decay = 0.01;
  int micro_batch = 2;
  int accumulation_steps = 8;
  int patience = 10;
  int max_epochs = 100;
  int max_tokens = 4096;
  double dropout_p = 0.6;
  LossWeights weights;
  ContrastiveMode mode;
  bool swap_cls_targets = false;
  std::uint64_t seed = 1;
  Monitor monitor = Monitor::val_accuracy;
  ModelConfig model;

  int effective_batch() const { return micro_batch * accumulation_steps; }

  // Model config with max_tokens and dropout_p applied; the two live in
  // TrainConfig because they are sweep axes.
  ModelConfig resolved_model() const;
};

// Throws with a field-by-field message on any invalid value.
void validate(const TrainConfig& cfg);

// Flat `key = value` text, # comments and blank lines allowed. Unknown or
// duplicate keys raise. Missing keys keep their defaults.
TrainConfig parse_config_file(const std::filesystem::path& path);
TrainConfig parse_config_text(const std::string& text);

// Canonical JSON for checkpoint headers and config hashing; parse is its
// inverse.
std::string config_to_json(const TrainConfig& cfg);
TrainConfig config_from_json(const std::string& json_text);

// FNV-1a of the canonical JSON, in hex.
std::string config_hash(const TrainConfig& cfg);

// Per-epoch record written to the metrics log and kept in checkpoints.
struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double l_con = 0.0;
  double l_cls_pos = 0.0;
  double l_cls_neg = 0.0;
  double val_accuracy = 0.0;
  double val_macro_f1 = 0.0;
  double val_micro_f1 = 0.0;
  double val_loss = 0.0;
};

// Per-optimizer-step loss components.
struct StepRecord {
  std::size_t step = 0;
  double l_con = 0.0;
  double l_cls_pos = 0.0;
  double l_cls_neg = 0.0;
  double l_total = 0.0;
};

// Observer for training progress; the CLI writes these as line-delimited
// JSON. All hooks are optional.
class MetricsSink {
 public:
  virtual ~MetricsSink() = default;
  virtual void on_step(const StepRecord&) {}
  virtual void on_epoch(const EpochRecord&) {}
};

}  // namespace mgtd
