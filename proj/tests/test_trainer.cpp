#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <limits>

#include "mgtd/augment.hpp"
#include "mgtd/checkpoint.hpp"
#include "mgtd/paraphrase.hpp"
#include "mgtd/trainer.hpp"
#include "synthetic.hpp"

using namespace mgtd;
namespace fs = std::filesystem;

namespace {

TrainConfig tiny_config() {
  TrainConfig cfg;
  cfg.model.encoder.dim = 12;
  cfg.model.head.hidden_dim = 8;
  cfg.model.encoder.vocab_buckets = 512;
  cfg.max_tokens = 128;
  cfg.dropout_p = 0.0;
  cfg.learning_rate = 1e-3;
  cfg.max_epochs = 4;
  cfg.seed = 5;
  return cfg;
}

std::vector<ContrastiveInstance> tiny_instances(std::size_t n, std::uint64_t seed) {
  const auto docs = testsupport::make_synthetic_corpus(n, seed);
  NoiseParaphraser noise(seed + 1);
  return augment_corpus(docs, noise);
}

bool params_close(const ParamSet& a, const ParamSet& b, double tol) {
  REQUIRE(a.tensor_count() == b.tensor_count());
  for (std::size_t e = 0; e < a.entries().size(); ++e) {
    const auto& ta = a.entries()[e].second;
    const auto& tb = b.entries()[e].second;
    REQUIRE(ta.data.size() == tb.data.size());
    for (std::size_t i = 0; i < ta.data.size(); ++i) {
      if (std::abs(ta.data[i] - tb.data[i]) > tol) return false;
    }
  }
  return true;
}

ParamSet snapshot_tagged(double tag) {
  ParamSet p;
  Tensor t({1});
  t.at(0) = tag;
  p.add("tag", std::move(t));
  return p;
}

}  // namespace

TEST_CASE("zero learning rate leaves parameters untouched") {
  auto cfg = tiny_config();
  cfg.learning_rate = 0.0;
  const auto instances = tiny_instances(8, 11);

  DetectorModel model(cfg.resolved_model());
  model.init_params(derive_seed(cfg.seed, "init"));
  const ParamSet before = model.params();

  AdamW opt({cfg.learning_rate, cfg.weight_decay}, model.params());
  std::size_t step = 0;
  train_epoch(model, opt, instances, cfg, 1, nullptr, &step);
  CHECK(params_close(before, model.params(), 0.0));
  CHECK(opt.steps_taken() > 0);
}

TEST_CASE("one instance for one epoch is exactly one optimizer step") {
  auto cfg = tiny_config();
  const auto instances = tiny_instances(1, 3);
  DetectorModel model(cfg.resolved_model());
  model.init_params(1);
  AdamW opt({cfg.learning_rate, cfg.weight_decay}, model.params());
  const auto stats = train_epoch(model, opt, instances, cfg, 1, nullptr, nullptr);
  CHECK(stats.optimizer_steps == 1);
  CHECK(opt.steps_taken() == 1);
}

TEST_CASE("optimizer steps per epoch follow the accumulation arithmetic") {
  for (const auto [n, micro, accum] :
       {std::tuple{16, 2, 8}, std::tuple{17, 2, 8}, std::tuple{5, 2, 2},
        std::tuple{7, 3, 2}, std::tuple{1, 2, 8}, std::tuple{33, 4, 3}}) {
    auto cfg = tiny_config();
    cfg.micro_batch = micro;
    cfg.accumulation_steps = accum;
    const auto instances = tiny_instances(static_cast<std::size_t>(n), 17);
    DetectorModel model(cfg.resolved_model());
    model.init_params(2);
    AdamW opt({cfg.learning_rate, cfg.weight_decay}, model.params());
    const auto stats = train_epoch(model, opt, instances, cfg, 1, nullptr, nullptr);
    const std::size_t micro_batches = (n + micro - 1) / micro;
    const std::size_t expected = (micro_batches + accum - 1) / accum;
    CHECK(stats.optimizer_steps == expected);
  }
}

TEST_CASE("gradient accumulation reproduces the big-batch update") {
  const auto instances = tiny_instances(16, 29);

  auto run_one_epoch = [&](int micro, int accum) {
    auto cfg = tiny_config();
    cfg.micro_batch = micro;
    cfg.accumulation_steps = accum;
    cfg.dropout_p = 0.0;
    DetectorModel model(cfg.resolved_model());
    model.init_params(derive_seed(7, "init"));
    AdamW opt({cfg.learning_rate, cfg.weight_decay}, model.params());
    train_epoch(model, opt, instances, cfg, 1, nullptr, nullptr,
                /*shuffle=*/false);
    return model.params();
  };

  const ParamSet accumulated = run_one_epoch(2, 8);
  const ParamSet big_batch = run_one_epoch(16, 1);
  CHECK(params_close(accumulated, big_batch, 1e-6));
}

TEST_CASE("a trailing partial group still steps") {
  auto cfg = tiny_config();
  cfg.micro_batch = 2;
  cfg.accumulation_steps = 8;
  const auto instances = tiny_instances(18, 41);  // 9 micro-batches: 8 + 1
  DetectorModel model(cfg.resolved_model());
  model.init_params(3);
  const ParamSet before = model.params();
  AdamW opt({cfg.learning_rate, cfg.weight_decay}, model.params());
  const auto stats = train_epoch(model, opt, instances, cfg, 1, nullptr, nullptr);
  CHECK(stats.optimizer_steps == 2);
  CHECK_FALSE(params_close(before, model.params(), 0.0));
}

TEST_CASE("training aborts on a non-finite loss with diagnostics") {
  auto cfg = tiny_config();
  const auto instances = tiny_instances(4, 43);
  DetectorModel model(cfg.resolved_model());
  model.init_params(4);
  model.params().get("head.b2").at(0) = std::numeric_limits<double>::quiet_NaN();
  AdamW opt({cfg.learning_rate, cfg.weight_decay}, model.params());
  CHECK_THROWS_WITH_AS(
      train_epoch(model, opt, instances, cfg, 1, nullptr, nullptr),
      doctest::Contains("non-finite"), std::runtime_error);
}

TEST_CASE("identical seeds give identical runs, different seeds differ") {
  const auto docs = testsupport::make_synthetic_corpus(40, 51);
  const std::vector<Document> train_docs(docs.begin(), docs.begin() + 32);
  const std::vector<Document> val_docs(docs.begin() + 32, docs.end());
  NoiseParaphraser noise(2);
  const auto instances = augment_corpus(train_docs, noise);

  auto cfg = tiny_config();
  cfg.max_epochs = 3;

  const FitResult a = fit(instances, val_docs, cfg);
  const FitResult b = fit(instances, val_docs, cfg);
  REQUIRE(a.record.epochs.size() == b.record.epochs.size());
  for (std::size_t i = 0; i < a.record.epochs.size(); ++i) {
    CHECK(a.record.epochs[i].train_loss == b.record.epochs[i].train_loss);
    CHECK(a.record.epochs[i].val_accuracy == b.record.epochs[i].val_accuracy);
    CHECK(a.record.epochs[i].val_loss == b.record.epochs[i].val_loss);
  }
  CHECK(a.record.config_hash == b.record.config_hash);

  auto cfg2 = cfg;
  cfg2.seed = cfg.seed + 1;
  const FitResult c = fit(instances, val_docs, cfg2);
  CHECK(a.record.epochs[0].train_loss != c.record.epochs[0].train_loss);

  // The seed rides along in the checkpoint.
  CHECK(a.checkpoint.config.seed == cfg.seed);
  CHECK(c.checkpoint.config.seed == cfg2.seed);
}

TEST_CASE("early stopping follows the scripted metric sequence") {
  EarlyStopping stopper(10, Monitor::val_accuracy);

  // Peaks at epoch 3, then a 10-epoch plateau.
  int epoch = 0;
  auto feed = [&](double acc) {
    ++epoch;
    stopper.update(epoch, acc, 1.0, snapshot_tagged(epoch));
    return stopper.should_stop();
  };

  CHECK_FALSE(feed(0.50));
  CHECK_FALSE(feed(0.70));
  CHECK_FALSE(feed(0.90));  // best
  for (int i = 0; i < 9; ++i) {
    CHECK_FALSE(feed(0.90));  // ties do not improve (same loss)
    CHECK(stopper.state().epochs_since_improvement <= 10);
  }
  CHECK(feed(0.90));  // tenth epoch without improvement: stop after epoch 13
  CHECK(epoch == 13);
  CHECK(stopper.best_epoch() == 3);
  CHECK(stopper.best_params().get("tag").at(0) == 3.0);
}

TEST_CASE("patience one with immediate degradation stops at epoch two") {
  EarlyStopping stopper(1, Monitor::val_accuracy);
  stopper.update(1, 0.9, 1.0, snapshot_tagged(1));
  stopper.update(2, 0.5, 1.0, snapshot_tagged(2));
  CHECK(stopper.should_stop());
  CHECK(stopper.best_epoch() == 1);
  CHECK(stopper.best_params().get("tag").at(0) == 1.0);
}

TEST_CASE("a strictly improving metric never stops early") {
  EarlyStopping stopper(3, Monitor::val_accuracy);
  for (int epoch = 1; epoch <= 50; ++epoch) {
    stopper.update(epoch, epoch / 100.0, 1.0, snapshot_tagged(epoch));
    CHECK_FALSE(stopper.should_stop());
  }
  CHECK(stopper.best_epoch() == 50);
}

TEST_CASE("val_loss monitoring treats lower as better") {
  EarlyStopping stopper(2, Monitor::val_loss);
  stopper.update(1, 0.5, 1.00, snapshot_tagged(1));
  stopper.update(2, 0.5, 0.80, snapshot_tagged(2));
  stopper.update(3, 0.5, 0.90, snapshot_tagged(3));
  stopper.update(4, 0.5, 0.85, snapshot_tagged(4));
  CHECK(stopper.should_stop());
  CHECK(stopper.best_epoch() == 2);
}

TEST_CASE("the returned snapshot is never worse than any earlier epoch") {
  EarlyStopping stopper(5, Monitor::val_accuracy);
  const std::vector<double> accs = {0.4, 0.8, 0.6, 0.7, 0.75, 0.2, 0.3};
  double best_seen = 0.0;
  for (std::size_t i = 0; i < accs.size(); ++i) {
    best_seen = std::max(best_seen, accs[i]);
    stopper.update(static_cast<int>(i + 1), accs[i], 1.0,
                   snapshot_tagged(static_cast<double>(i + 1)));
    CHECK(stopper.state().best_metric == best_seen);
  }
  CHECK(stopper.best_epoch() == 2);
}

TEST_CASE("fit returns the best-epoch snapshot and round-trips bit-exactly") {
  const auto docs = testsupport::make_synthetic_corpus(60, 61);
  const std::vector<Document> train_docs(docs.begin(), docs.begin() + 48);
  const std::vector<Document> val_docs(docs.begin() + 48, docs.end());
  NoiseParaphraser noise(9);
  const auto instances = augment_corpus(train_docs, noise);

  auto cfg = tiny_config();
  cfg.max_epochs = 5;
  cfg.learning_rate = 5e-3;

  const FitResult result = fit(instances, val_docs, cfg);
  REQUIRE(result.record.best_epoch >= 1);
  CHECK(result.checkpoint.best_epoch == result.record.best_epoch);
  CHECK(result.checkpoint.history.size() == result.record.epochs.size());

  // The recorded best is at least as good as every epoch the run saw.
  for (const auto& rec : result.record.epochs) {
    CHECK(result.record.epochs[result.record.best_epoch - 1].val_accuracy >=
          rec.val_accuracy);
  }

  const fs::path p = fs::temp_directory_path() /
                     ("mgtd-fit-ckpt-" + std::to_string(::getpid()) + ".bin");
  save_checkpoint(p, result.checkpoint);
  const Checkpoint loaded = load_checkpoint(p);
  fs::remove(p);

  const Metrics before = evaluate_checkpoint(result.checkpoint, val_docs);
  const Metrics after = evaluate_checkpoint(loaded, val_docs);
  CHECK(before.accuracy == after.accuracy);
  CHECK(before.macro_f1 == after.macro_f1);
  CHECK(before.micro_f1 == after.micro_f1);
  CHECK(before.accuracy == result.record.best_val.accuracy);
}

TEST_CASE("predict is deterministic, threshold-inclusive, and total") {
  const auto docs = testsupport::make_synthetic_corpus(30, 71);
  const std::vector<Document> train_docs(docs.begin(), docs.begin() + 24);
  const std::vector<Document> val_docs(docs.begin() + 24, docs.end());
  NoiseParaphraser noise(1);
  const auto result = fit(augment_corpus(train_docs, noise), val_docs, tiny_config());

  const auto preds1 = predict(result.checkpoint, val_docs);
  const auto preds2 = predict(result.checkpoint, val_docs);
  REQUIRE(preds1.size() == val_docs.size());
  for (std::size_t i = 0; i < preds1.size(); ++i) {
    CHECK(preds1[i].id == val_docs[i].id);
    CHECK(preds1[i].score == preds2[i].score);
    CHECK(preds1[i].label == preds2[i].label);
    CHECK(preds1[i].label ==
          (preds1[i].score >= 0.5 ? Label::machine : Label::human));
  }

  CHECK(predict(result.checkpoint, {}).empty());
}

TEST_CASE("fit rejects empty inputs") {
  const auto docs = testsupport::make_synthetic_corpus(4, 81);
  NoiseParaphraser noise(1);
  const auto instances = augment_corpus(docs, noise);
  CHECK_THROWS_AS(fit({}, docs, tiny_config()), std::runtime_error);
  CHECK_THROWS_AS(fit(instances, {}, tiny_config()), std::runtime_error);
}
