#include "mgtd/trainer.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "mgtd/objective.hpp"
#include "mgtd/rng.hpp"

namespace mgtd {

AdamW::AdamW(Options options, const ParamSet& shape)
    : options_(options), m_(shape.zeros_like()), v_(shape.zeros_like()) {}

void AdamW::step(ParamSet& params, const ParamSet& grads) {
  if (params.tensor_count() != m_.tensor_count() ||
      grads.tensor_count() != m_.tensor_count()) {
    throw std::runtime_error("AdamW: parameter/gradient layout mismatch");
  }
  ++step_count_;
  const double t = static_cast<double>(step_count_);
  const double bias1 = 1.0 - std::pow(options_.beta1, t);
  const double bias2 = 1.0 - std::pow(options_.beta2, t);
  const double lr = options_.learning_rate;
  const double decay = lr * options_.weight_decay;

  for (std::size_t e = 0; e < params.entries().size(); ++e) {
    auto& [p_name, p] = params.entries()[e];
    const auto& [g_name, g] = grads.entries()[e];
    auto& [m_name, m] = m_.entries()[e];
    auto& [v_name, v] = v_.entries()[e];
    if (p_name != g_name || p_name != m_name) {
      throw std::runtime_error("AdamW: tensor order mismatch at " + p_name);
    }
    for (std::size_t i = 0; i < p.data.size(); ++i) {
      const double grad = g.data[i];
      m.data[i] = options_.beta1 * m.data[i] + (1.0 - options_.beta1) * grad;
      v.data[i] = options_.beta2 * v.data[i] + (1.0 - options_.beta2) * grad * grad;
      const double m_hat = m.data[i] / bias1;
      const double v_hat = v.data[i] / bias2;
      // Decoupled decay: applied directly to the parameter, then the Adam
      // update from the decayed value.
      p.data[i] -= decay * p.data[i];
      p.data[i] -= lr * m_hat / (std::sqrt(v_hat) + options_.eps);
    }
  }
}

EarlyStopping::EarlyStopping(int patience, Monitor monitor)
    : patience_(patience), monitor_(monitor) {
  if (patience < 1) {
    throw std::runtime_error("EarlyStopping: patience must be >= 1");
  }
}

bool EarlyStopping::update(int epoch, double val_accuracy, double val_loss,
                           const ParamSet& params) {
  const double metric =
      monitor_ == Monitor::val_accuracy ? val_accuracy : val_loss;

  bool improved = false;
  if (!has_best_) {
    improved = true;
  } else if (monitor_ == Monitor::val_accuracy) {
    improved = metric > state_.best_metric ||
               (metric == state_.best_metric && val_loss < best_loss_);
  } else {
    improved = metric < state_.best_metric;
  }

  if (improved) {
    has_best_ = true;
    state_.best_metric = metric;
    state_.best_epoch = epoch;
    state_.epochs_since_improvement = 0;
    best_loss_ = val_loss;
    best_params_ = params.quantized_f32();
  } else {
    ++state_.epochs_since_improvement;
  }
  return improved;
}

bool EarlyStopping::should_stop() const {
  return state_.epochs_since_improvement >= patience_;
}

EpochStats train_epoch(DetectorModel& model, AdamW& optimizer,
                       std::span<const ContrastiveInstance> instances,
                       const TrainConfig& cfg, int epoch, MetricsSink* sink,
                       std::size_t* global_step, bool shuffle) {
  if (instances.empty()) {
    throw std::runtime_error("train_epoch: no instances");
  }

  std::vector<std::size_t> order(instances.size());
  std::iota(order.begin(), order.end(), 0);
  if (shuffle) {
    Rng shuffle_rng(derive_seed(cfg.seed, "shuffle",
                                static_cast<std::uint64_t>(epoch)));
    deterministic_shuffle(order, shuffle_rng);
  }
  Rng dropout_rng(derive_seed(cfg.seed, "dropout",
                              static_cast<std::uint64_t>(epoch)));

  const std::size_t micro = static_cast<std::size_t>(cfg.micro_batch);
  const std::size_t accum = static_cast<std::size_t>(cfg.accumulation_steps);
  const std::size_t n_micro = (instances.size() + micro - 1) / micro;

  ParamSet grads = model.params().zeros_like();
  EpochStats stats;
  double sum_total = 0.0, sum_con = 0.0, sum_pos = 0.0, sum_neg = 0.0;

  std::size_t mb = 0;
  while (mb < n_micro) {
    // One accumulation group; the trailing group may be short and is scaled
    // by its actual size so no instance is silently dropped.
    const std::size_t group_count = std::min(accum, n_micro - mb);
    const double group_scale = 1.0 / static_cast<double>(group_count);
    grads.zero();

    double step_total = 0.0, step_con = 0.0, step_pos = 0.0, step_neg = 0.0;
    std::size_t step_instances = 0;

    for (std::size_t g = 0; g < group_count; ++g, ++mb) {
      const std::size_t begin = mb * micro;
      const std::size_t end = std::min(begin + micro, instances.size());
      const double batch_scale =
          group_scale / static_cast<double>(end - begin);

      double batch_loss = 0.0;
      std::ostringstream batch_ids;
      for (std::size_t i = begin; i < end; ++i) {
        const ContrastiveInstance& inst = instances[order[i]];
        if (i != begin) batch_ids << ", ";
        batch_ids << inst.anchor.id;

        PairTrace trace;
        const PairOutput out =
            model.forward_pair(inst, RunMode::train, &dropout_rng, &trace);
        PairGrads pair_grads;
        const TotalLoss loss = total_loss_with_grads(
            out, inst, cfg.weights, cfg.mode, cfg.swap_cls_targets, pair_grads);

        batch_loss += loss.total;
        sum_total += loss.total;
        sum_con += loss.l_con;
        sum_pos += loss.l_cls_pos;
        sum_neg += loss.l_cls_neg;
        step_total += loss.total;
        step_con += loss.l_con;
        step_pos += loss.l_cls_pos;
        step_neg += loss.l_cls_neg;
        ++step_instances;

        for (double& dv : pair_grads.d_emb_anchor) dv *= batch_scale;
        for (double& dv : pair_grads.d_emb_para) dv *= batch_scale;
        pair_grads.d_prob_anchor *= batch_scale;
        pair_grads.d_prob_para *= batch_scale;
        model.backward_pair(trace, pair_grads, grads);
      }

      if (!std::isfinite(batch_loss)) {
        throw std::runtime_error(
            "train_epoch: non-finite loss at optimizer step " +
            std::to_string(optimizer.steps_taken() + 1) + " (instances " +
            batch_ids.str() + ")");
      }
    }

    optimizer.step(model.params(), grads);
    ++stats.optimizer_steps;

    if (sink || global_step) {
      const double inv = 1.0 / static_cast<double>(step_instances);
      StepRecord rec;
      rec.step = global_step ? ++*global_step : stats.optimizer_steps;
      rec.l_con = step_con * inv;
      rec.l_cls_pos = step_pos * inv;
      rec.l_cls_neg = step_neg * inv;
      rec.l_total = step_total * inv;
      if (sink) sink->on_step(rec);
    }
  }

  const double inv_n = 1.0 / static_cast<double>(instances.size());
  stats.train_loss = sum_total * inv_n;
  stats.l_con = sum_con * inv_n;
  stats.l_cls_pos = sum_pos * inv_n;
  stats.l_cls_neg = sum_neg * inv_n;
  return stats;
}

double validation_loss(const DetectorModel& model,
                       const std::vector<Document>& docs) {
  if (docs.empty()) {
    throw std::runtime_error("validation_loss: no documents");
  }
  double sum = 0.0;
  std::size_t counted = 0;
  for (const auto& doc : docs) {
    if (!doc.label) continue;
    const double p = model.score_text(doc.text);
    sum += classification_loss(p, label_code(*doc.label));
    ++counted;
  }
  if (counted == 0) {
    throw std::runtime_error("validation_loss: no labeled documents");
  }
  return sum / static_cast<double>(counted);
}

namespace {

Metrics metrics_against_gold(const DetectorModel& model,
                             const std::vector<Document>& docs,
                             double threshold) {
  std::vector<int> gold, pred;
  gold.reserve(docs.size());
  pred.reserve(docs.size());
  for (const auto& doc : docs) {
    if (!doc.label) continue;
    gold.push_back(label_code(*doc.label));
    pred.push_back(model.score_text(doc.text) >= threshold ? kMachineLabelCode
                                                           : kHumanLabelCode);
  }
  return compute_metrics(gold, pred);
}

}  // namespace

FitResult fit(const std::vector<ContrastiveInstance>& train_instances,
              const std::vector<Document>& val_docs, const TrainConfig& cfg,
              MetricsSink* sink) {
  validate(cfg);
  if (train_instances.empty()) {
    throw std::runtime_error("fit: training set is empty");
  }
  if (val_docs.empty()) {
    throw std::runtime_error("fit: validation set is empty");
  }

  const auto t_start = std::chrono::steady_clock::now();

  DetectorModel model(cfg.resolved_model());
  model.init_params(derive_seed(cfg.seed, "init"));

  AdamW optimizer({cfg.learning_rate, cfg.weight_decay}, model.params());
  EarlyStopping stopper(cfg.patience, cfg.monitor);

  RunRecord record;
  record.config_hash = config_hash(cfg);
  record.seed = cfg.seed;

  std::size_t global_step = 0;
  int last_epoch = 0;
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    last_epoch = epoch;
    const EpochStats stats = train_epoch(model, optimizer, train_instances,
                                         cfg, epoch, sink, &global_step);

    const Metrics val = metrics_against_gold(model, val_docs, 0.5);
    const double val_loss = validation_loss(model, val_docs);

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = stats.train_loss;
    rec.l_con = stats.l_con;
    rec.l_cls_pos = stats.l_cls_pos;
    rec.l_cls_neg = stats.l_cls_neg;
    rec.val_accuracy = val.accuracy;
    rec.val_macro_f1 = val.macro_f1;
    rec.val_micro_f1 = val.micro_f1;
    rec.val_loss = val_loss;
    record.epochs.push_back(rec);
    if (sink) sink->on_epoch(rec);

    stopper.update(epoch, val.accuracy, val_loss, model.params());
    if (stopper.should_stop()) break;
  }

  record.best_epoch = stopper.best_epoch();
  record.stopped_epoch = last_epoch;

  FitResult result;
  result.checkpoint.config = cfg;
  result.checkpoint.best_epoch = stopper.best_epoch();
  result.checkpoint.history = record.epochs;
  result.checkpoint.params = stopper.best_params();

  // Best-epoch validation metrics, recomputed from the snapshot that the
  // checkpoint actually carries (f32-quantized), so a save/load round trip
  // reproduces them bit-exactly.
  DetectorModel best_model = model_from_checkpoint(result.checkpoint);
  record.best_val = metrics_against_gold(best_model, val_docs, 0.5);

  const auto t_end = std::chrono::steady_clock::now();
  record.wall_seconds =
      std::chrono::duration<double>(t_end - t_start).count();
  result.record = record;
  return result;
}

DetectorModel model_from_checkpoint(const Checkpoint& ckpt) {
  DetectorModel model(ckpt.config.resolved_model());
  model.set_params(ckpt.params);
  return model;
}

std::vector<Prediction> predict(const Checkpoint& ckpt,
                                const std::vector<Document>& docs,
                                double threshold) {
  DetectorModel model = model_from_checkpoint(ckpt);
  std::vector<Prediction> preds;
  preds.reserve(docs.size());
  for (const auto& doc : docs) {
    preds.push_back(make_prediction(doc.id, model.score_text(doc.text), threshold));
  }
  return preds;
}

Metrics evaluate_checkpoint(const Checkpoint& ckpt,
                            const std::vector<Document>& docs,
                            double threshold) {
  DetectorModel model = model_from_checkpoint(ckpt);
  return metrics_against_gold(model, docs, threshold);
}

}  // namespace mgtd
