#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mgtd/checkpoint.hpp"
#include "mgtd/config.hpp"
#include "mgtd/metrics.hpp"
#include "mgtd/model.hpp"

namespace mgtd {

// Adam with decoupled weight decay. beta1/beta2/eps are the canonical
// constants; decay multiplies the parameter directly, scaled by the learning
// rate, independent of the gradient moments.
class AdamW {
 public:
  struct Options {
    double learning_rate = 1e-5;
    double weight_decay = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
  };

  AdamW(Options options, const ParamSet& shape);

  void step(ParamSet& params, const ParamSet& grads);
  std::int64_t steps_taken() const { return step_count_; }
  const Options& options() const { return options_; }

 private:
  Options options_;
  ParamSet m_;
  ParamSet v_;
  std::int64_t step_count_ = 0;
};

struct EarlyStopState {
  double best_metric = 0.0;
  int best_epoch = 0;
  int epochs_since_improvement = 0;
};

// Tracks the monitored validation metric and keeps a float32-quantized
// snapshot of the best-epoch parameters. Improvement is strict, with
// validation loss as tie-breaker when accuracy is monitored.
class EarlyStopping {
 public:
  EarlyStopping(int patience, Monitor monitor);

  // Returns true if this epoch improved the monitored metric.
  bool update(int epoch, double val_accuracy, double val_loss,
              const ParamSet& params);
  bool should_stop() const;

  const EarlyStopState& state() const { return state_; }
  int best_epoch() const { return state_.best_epoch; }
  const ParamSet& best_params() const { return best_params_; }

 private:
  int patience_;
  Monitor monitor_;
  EarlyStopState state_;
  double best_loss_ = 0.0;
  bool has_best_ = false;
  ParamSet best_params_;
};

struct EpochStats {
  double train_loss = 0.0;  // mean total loss per instance
  double l_con = 0.0;
  double l_cls_pos = 0.0;
  double l_cls_neg = 0.0;
  std::size_t optimizer_steps = 0;
};

// One pass over the instances: seeded shuffle, micro-batches of
// cfg.micro_batch, gradients accumulated over cfg.accumulation_steps
// micro-batches per optimizer step. A trailing partial group still steps,
// scaled by its actual size. Aborts with step and instance ids if the loss
// goes non-finite.
EpochStats train_epoch(DetectorModel& model, AdamW& optimizer,
                       std::span<const ContrastiveInstance> instances,
                       const TrainConfig& cfg, int epoch, MetricsSink* sink,
                       std::size_t* global_step, bool shuffle = true);

struct RunRecord {
  std::string config_hash;
  std::vector<EpochRecord> epochs;
  Metrics best_val;
  std::optional<Metrics> final_test;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
  int best_epoch = 0;
  int stopped_epoch = 0;
};

struct FitResult {
  Checkpoint checkpoint;  // best-epoch snapshot, not the last epoch
  RunRecord record;
};

// Trains until the monitored validation metric stops improving for
// cfg.patience epochs or cfg.max_epochs is reached. All randomness
// (init, shuffling, dropout) derives from cfg.seed; identical
// (seed, config, data) yields an identical metric history.
FitResult fit(const std::vector<ContrastiveInstance>& train_instances,
              const std::vector<Document>& val_docs, const TrainConfig& cfg,
              MetricsSink* sink = nullptr);

// Eval-mode scoring; label = machine iff score >= threshold.
std::vector<Prediction> predict(const Checkpoint& ckpt,
                                const std::vector<Document>& docs,
                                double threshold = 0.5);

// predict + compute_metrics against the documents' gold labels.
Metrics evaluate_checkpoint(const Checkpoint& ckpt,
                            const std::vector<Document>& docs,
                            double threshold = 0.5);

// Mean BCE of the machine-probability against gold over labeled documents.
double validation_loss(const DetectorModel& model,
                       const std::vector<Document>& docs);

DetectorModel model_from_checkpoint(const Checkpoint& ckpt);

}  // namespace mgtd
