// mgtd: train and run a contrastive machine-generated-text detector.
//
// Subcommands: augment, train, predict, evaluate, sweep, stats.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "mgtd/augment.hpp"
#include "mgtd/checkpoint.hpp"
#include "mgtd/corpus.hpp"
#include "mgtd/sweep.hpp"
#include "mgtd/trainer.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// A dataset file holds either raw documents or augmented pairs; tell them
// apart by the first record's fields.
bool looks_like_instances(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open file: " + path.string());
  }
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.is_object()) return false;
    return rec.contains("anchor_text") && rec.contains("y");
  }
  return false;
}

std::vector<mgtd::ContrastiveInstance> load_training_pairs(
    const fs::path& path, const std::string& paraphraser_kind,
    std::uint64_t seed, const mgtd::ExternalEndpoint& endpoint) {
  if (looks_like_instances(path)) {
    return mgtd::load_instances(path);
  }
  auto docs = mgtd::load_dataset(path, mgtd::DatasetSchema::train);
  auto paraphraser = mgtd::make_paraphraser(paraphraser_kind, seed, endpoint);
  return mgtd::augment_corpus(docs, *paraphraser);
}

class FileMetricsSink final : public mgtd::MetricsSink {
 public:
  explicit FileMetricsSink(const fs::path& path)
      : out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) {
      throw std::runtime_error("cannot open metrics log: " + path.string());
    }
  }

  void on_step(const mgtd::StepRecord& r) override {
    json rec;
    rec["step"] = r.step;
    rec["L_con"] = r.l_con;
    rec["L_cls_pos"] = r.l_cls_pos;
    rec["L_cls_neg"] = r.l_cls_neg;
    rec["L_total"] = r.l_total;
    out_ << rec.dump() << '\n';
  }

  void on_epoch(const mgtd::EpochRecord& r) override {
    json rec;
    rec["epoch"] = r.epoch;
    rec["train_loss"] = r.train_loss;
    rec["L_con"] = r.l_con;
    rec["L_cls_pos"] = r.l_cls_pos;
    rec["L_cls_neg"] = r.l_cls_neg;
    rec["val_accuracy"] = r.val_accuracy;
    rec["val_macro_f1"] = r.val_macro_f1;
    rec["val_micro_f1"] = r.val_micro_f1;
    out_ << rec.dump() << std::endl;
  }

 private:
  std::ofstream out_;
};

json metrics_to_json(const mgtd::Metrics& m) {
  return json{{"accuracy", m.accuracy},
              {"macro_f1", m.macro_f1},
              {"micro_f1", m.micro_f1},
              {"n", m.n}};
}

std::vector<std::uint64_t> parse_seed_csv(const std::string& csv) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    seeds.push_back(std::stoull(item));
  }
  return seeds;
}

std::vector<double> parse_value_csv(const std::string& csv) {
  std::vector<double> values;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    values.push_back(std::stod(item));
  }
  return values;
}

int run(int argc, char** argv) {
  CLI::App app{"contrastive machine-generated-text detector"};
  app.require_subcommand(1);

  // augment
  auto* augment = app.add_subcommand(
      "augment", "build contrastive pairs from a labeled dataset");
  std::string aug_in, aug_out, aug_kind = "noise";
  std::uint64_t aug_seed = 1;
  std::string aug_endpoint, aug_cmd;
  bool aug_resume = false;
  augment->add_option("--in", aug_in, "labeled dataset (jsonl)")->required();
  augment->add_option("--out", aug_out, "output pair file (jsonl)")->required();
  augment->add_option("--paraphraser", aug_kind, "identity|noise|external");
  augment->add_option("--seed", aug_seed, "seed for the noise paraphraser");
  augment->add_option("--endpoint", aug_endpoint,
                      "http url of an external paraphrase service");
  augment->add_option("--cmd", aug_cmd,
                      "command for a subprocess paraphrase service");
  augment->add_flag("--resume", aug_resume,
                    "extend an existing partial output file");

  // train
  auto* train = app.add_subcommand("train", "train a detector");
  std::string train_in, train_val, train_test, train_cfg, train_out;
  std::int64_t train_seed = -1;
  std::string train_kind = "noise", train_endpoint, train_cmd;
  train->add_option("--train", train_in, "training data: raw dataset or augmented pairs")
      ->required();
  train->add_option("--val", train_val, "labeled validation dataset")->required();
  train->add_option("--test", train_test,
                    "labeled test dataset scored with the best checkpoint");
  train->add_option("--config", train_cfg, "training config file")->required();
  train->add_option("--out", train_out, "output directory")->required();
  train->add_option("--seed", train_seed, "override the config seed");
  train->add_option("--paraphraser", train_kind,
                    "paraphraser when --train is a raw dataset");
  train->add_option("--endpoint", train_endpoint,
                    "http url of an external paraphrase service");
  train->add_option("--cmd", train_cmd,
                    "command for a subprocess paraphrase service");

  // predict
  auto* predict = app.add_subcommand("predict", "score documents with a checkpoint");
  std::string pred_ckpt, pred_in, pred_out;
  double pred_threshold = 0.5;
  predict->add_option("--ckpt", pred_ckpt, "checkpoint file")->required();
  predict->add_option("--in", pred_in, "dataset to score (labels optional)")->required();
  predict->add_option("--out", pred_out, "prediction file (jsonl)")->required();
  predict->add_option("--threshold", pred_threshold, "machine decision threshold");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "metrics of a checkpoint on labeled data");
  std::string eval_ckpt, eval_in;
  evaluate->add_option("--ckpt", eval_ckpt, "checkpoint file")->required();
  evaluate->add_option("--in", eval_in, "labeled dataset")->required();

  // sweep
  auto* sweep = app.add_subcommand("sweep", "ablation sweep over one axis");
  std::string sweep_axis, sweep_values, sweep_cfg, sweep_seeds = "1,2,3";
  std::string sweep_out, sweep_train, sweep_val, sweep_test;
  std::string sweep_kind = "noise";
  int sweep_workers = 1;
  sweep->add_option("--axis", sweep_axis, "max_tokens|dropout_p|effective_batch")
      ->required();
  sweep->add_option("--values", sweep_values,
                    "comma-separated axis values (default: the built-in grid)");
  sweep->add_option("--config", sweep_cfg, "base training config file")->required();
  sweep->add_option("--seeds", sweep_seeds, "comma-separated seeds");
  sweep->add_option("--out", sweep_out, "output directory")->required();
  sweep->add_option("--train", sweep_train, "training data: raw dataset or augmented pairs")
      ->required();
  sweep->add_option("--val", sweep_val, "labeled validation dataset")->required();
  sweep->add_option("--test", sweep_test, "labeled test dataset")->required();
  sweep->add_option("--paraphraser", sweep_kind,
                    "paraphraser when --train is a raw dataset");
  sweep->add_option("--workers", sweep_workers, "parallel sweep cells");

  // stats
  auto* stats = app.add_subcommand("stats", "per-label and per-generator counts");
  std::string stats_in, stats_schema = "train";
  stats->add_option("--in", stats_in, "dataset file")->required();
  stats->add_option("--schema", stats_schema, "train|unlabeled");

  CLI11_PARSE(app, argc, argv);

  if (*augment) {
    auto docs = mgtd::load_dataset(aug_in, mgtd::DatasetSchema::train);
    mgtd::ExternalEndpoint endpoint{aug_endpoint, aug_cmd};
    if (aug_kind == "external" && endpoint.empty()) {
      throw std::runtime_error(
          "augment: --paraphraser external needs --endpoint or --cmd");
    }
    auto paraphraser = mgtd::make_paraphraser(aug_kind, aug_seed, endpoint);
    const std::size_t written =
        mgtd::augment_to_file(docs, *paraphraser, aug_out, aug_resume);
    std::cout << "augmented " << written << " of " << docs.size()
              << " documents -> " << aug_out << "\n";
    return 0;
  }

  if (*train) {
    mgtd::TrainConfig cfg = mgtd::parse_config_file(train_cfg);
    if (train_seed >= 0) cfg.seed = static_cast<std::uint64_t>(train_seed);

    mgtd::ExternalEndpoint endpoint{train_endpoint, train_cmd};
    auto instances = load_training_pairs(train_in, train_kind, cfg.seed, endpoint);
    auto val_docs = mgtd::load_dataset(train_val, mgtd::DatasetSchema::train);

    fs::create_directories(train_out);
    FileMetricsSink sink(fs::path(train_out) / "metrics.jsonl");
    const mgtd::FitResult result = mgtd::fit(instances, val_docs, cfg, &sink);

    const fs::path ckpt_path = fs::path(train_out) / "checkpoint.bin";
    mgtd::save_checkpoint(ckpt_path, result.checkpoint);

    json run_record;
    run_record["config_hash"] = result.record.config_hash;
    run_record["seed"] = result.record.seed;
    run_record["best_epoch"] = result.record.best_epoch;
    run_record["stopped_epoch"] = result.record.stopped_epoch;
    run_record["wall_seconds"] = result.record.wall_seconds;
    run_record["best_val"] = metrics_to_json(result.record.best_val);
    if (!train_test.empty()) {
      const auto test_docs = mgtd::load_dataset(train_test, mgtd::DatasetSchema::train);
      const mgtd::Metrics test_metrics =
          mgtd::evaluate_checkpoint(result.checkpoint, test_docs);
      run_record["test"] = metrics_to_json(test_metrics);
    }
    std::ofstream run_out(fs::path(train_out) / "run.json");
    run_out << run_record.dump(2) << '\n';

    std::cout << "best epoch " << result.record.best_epoch << " (val accuracy "
              << result.record.best_val.accuracy << ") -> " << ckpt_path.string()
              << "\n";
    return 0;
  }

  if (*predict) {
    const auto ckpt = mgtd::load_checkpoint(pred_ckpt);
    const auto docs = mgtd::load_dataset(pred_in, mgtd::DatasetSchema::unlabeled);
    const auto preds = mgtd::predict(ckpt, docs, pred_threshold);
    mgtd::write_predictions(pred_out, preds);
    std::cout << "wrote " << preds.size() << " predictions -> " << pred_out
              << "\n";
    return 0;
  }

  if (*evaluate) {
    const auto ckpt = mgtd::load_checkpoint(eval_ckpt);
    const auto docs = mgtd::load_dataset(eval_in, mgtd::DatasetSchema::train);
    const mgtd::Metrics m = mgtd::evaluate_checkpoint(ckpt, docs);
    std::cout << metrics_to_json(m).dump() << "\n";
    return 0;
  }

  if (*sweep) {
    mgtd::SweepSpec spec;
    spec.axis = mgtd::sweep_axis_from_string(sweep_axis);
    spec.values = sweep_values.empty() ? mgtd::default_axis_values(spec.axis)
                                       : parse_value_csv(sweep_values);
    spec.base = mgtd::parse_config_file(sweep_cfg);
    spec.seeds = parse_seed_csv(sweep_seeds);
    if (spec.seeds.empty()) {
      throw std::runtime_error("sweep: no seeds given");
    }

    auto instances =
        load_training_pairs(sweep_train, sweep_kind, spec.base.seed, {});
    auto val_docs = mgtd::load_dataset(sweep_val, mgtd::DatasetSchema::train);
    auto test_docs = mgtd::load_dataset(sweep_test, mgtd::DatasetSchema::train);

    const mgtd::SweepResult result =
        mgtd::run_sweep(spec, instances, val_docs, test_docs, sweep_workers);

    fs::create_directories(sweep_out);
    const std::string text = mgtd::render_table_text(result);
    {
      std::ofstream out(fs::path(sweep_out) / "table.txt");
      out << text;
    }
    {
      std::ofstream out(fs::path(sweep_out) / "table.jsonl");
      out << mgtd::render_table_jsonl(result);
    }
    std::cout << text;
    for (const auto& row : result.rows) {
      if (!row.error.empty()) return 1;
    }
    return 0;
  }

  if (*stats) {
    const auto schema = stats_schema == "unlabeled"
                            ? mgtd::DatasetSchema::unlabeled
                            : mgtd::DatasetSchema::train;
    const auto docs = mgtd::load_dataset(stats_in, schema);
    const mgtd::CountSummary s = mgtd::split_stats(docs);
    json out;
    out["total"] = s.total;
    out["human"] = s.human;
    out["machine"] = s.machine;
    out["unlabeled"] = s.unlabeled;
    out["per_generator"] = s.per_generator;
    out["per_source"] = s.per_source;
    std::cout << out.dump() << "\n";
    return 0;
  }

  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
