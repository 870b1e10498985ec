#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mgtd/augment.hpp"
#include "mgtd/paraphrase.hpp"
#include "mgtd/sweep.hpp"
#include "synthetic.hpp"

using namespace mgtd;

namespace {

struct SweepFixture {
  std::vector<ContrastiveInstance> instances;
  std::vector<Document> val_docs;
  std::vector<Document> test_docs;
  TrainConfig base;

  SweepFixture() {
    const auto docs = testsupport::make_synthetic_corpus(60, 91);
    const std::vector<Document> train_docs(docs.begin(), docs.begin() + 40);
    val_docs.assign(docs.begin() + 40, docs.begin() + 50);
    test_docs.assign(docs.begin() + 50, docs.end());
    NoiseParaphraser noise(5);
    instances = augment_corpus(train_docs, noise);

    base.model.encoder.dim = 12;
    base.model.head.hidden_dim = 8;
    base.model.encoder.vocab_buckets = 512;
    base.max_tokens = 128;
    base.dropout_p = 0.0;
    base.learning_rate = 1e-3;
    base.max_epochs = 2;
    base.micro_batch = 2;
    base.accumulation_steps = 2;
  }
};

}  // namespace

TEST_CASE("default axis grids") {
  CHECK(default_axis_values(SweepAxis::max_tokens) ==
        std::vector<double>{128, 256, 512, 1024, 2048, 4096});
  CHECK(default_axis_values(SweepAxis::dropout_p) ==
        std::vector<double>{0.0, 0.2, 0.4, 0.6, 0.9});
  CHECK(default_axis_values(SweepAxis::effective_batch) ==
        std::vector<double>{2, 4, 8, 16, 32, 64, 128});
}

TEST_CASE("axis names round-trip") {
  for (const auto axis : {SweepAxis::max_tokens, SweepAxis::dropout_p,
                          SweepAxis::effective_batch}) {
    CHECK(sweep_axis_from_string(to_string(axis)) == axis);
  }
  CHECK_THROWS_AS(sweep_axis_from_string("temperature"), std::runtime_error);
}

TEST_CASE("dropout sweep emits one row per value with 3-seed aggregates") {
  SweepFixture fx;
  SweepSpec spec;
  spec.axis = SweepAxis::dropout_p;
  spec.values = {0.0, 0.2, 0.4, 0.6, 0.9};
  spec.base = fx.base;
  spec.seeds = {1, 2, 3};

  const SweepResult result =
      run_sweep(spec, fx.instances, fx.val_docs, fx.test_docs);
  REQUIRE(result.rows.size() == 5);
  int best_rows = 0;
  for (const auto& row : result.rows) {
    CHECK(row.error.empty());
    CHECK(row.per_seed.size() == 3);
    CHECK(row.aggregate.runs == 3);
    CHECK(row.aggregate.accuracy.mean >= 0.0);
    CHECK(row.aggregate.accuracy.mean <= 1.0);
    if (row.best) ++best_rows;
  }
  CHECK(best_rows == 1);

  // Table layout: header columns plus one line per value.
  const std::string table = render_table_text(result);
  CHECK(table.find("Macro-f1") != std::string::npos);
  CHECK(table.find("Micro-f1") != std::string::npos);
  CHECK(table.find("Accuracy") != std::string::npos);
  CHECK(std::count(table.begin(), table.end(), '\n') == 6);

  // Deterministic re-run.
  const SweepResult again =
      run_sweep(spec, fx.instances, fx.val_docs, fx.test_docs);
  CHECK(render_table_jsonl(again) == render_table_jsonl(result));
}

TEST_CASE("effective batch values map onto accumulation steps") {
  SweepFixture fx;
  SweepSpec spec;
  spec.axis = SweepAxis::effective_batch;
  spec.values = {2, 4};
  spec.base = fx.base;
  spec.seeds = {1};

  // micro_batch pinned to 2: value 2 -> accum 1, value 4 -> accum 2. Both
  // must train cleanly.
  const SweepResult result =
      run_sweep(spec, fx.instances, fx.val_docs, fx.test_docs);
  for (const auto& row : result.rows) CHECK(row.error.empty());
}

TEST_CASE("an unrealizable cell is recorded as a row error and the sweep continues") {
  SweepFixture fx;
  SweepSpec spec;
  spec.axis = SweepAxis::effective_batch;
  spec.values = {3, 2};  // 3 is not realizable with micro_batch = 2
  spec.base = fx.base;
  spec.seeds = {1};

  const SweepResult result =
      run_sweep(spec, fx.instances, fx.val_docs, fx.test_docs);
  REQUIRE(result.rows.size() == 2);
  CHECK_FALSE(result.rows[0].error.empty());
  CHECK(result.rows[0].per_seed.empty());
  CHECK(result.rows[1].error.empty());
  CHECK(result.rows[1].best);

  const std::string table = render_table_text(result);
  CHECK(table.find("ERROR") != std::string::npos);
}

TEST_CASE("a single-value sweep equals a plain train-and-evaluate run") {
  SweepFixture fx;
  SweepSpec spec;
  spec.axis = SweepAxis::dropout_p;
  spec.values = {0.0};
  spec.base = fx.base;
  spec.seeds = {4};

  const SweepResult result =
      run_sweep(spec, fx.instances, fx.val_docs, fx.test_docs);
  REQUIRE(result.rows.size() == 1);
  REQUIRE(result.rows[0].per_seed.size() == 1);

  TrainConfig cfg = fx.base;
  cfg.dropout_p = 0.0;
  cfg.seed = 4;
  const FitResult direct = fit(fx.instances, fx.val_docs, cfg);
  const Metrics expected = evaluate_checkpoint(direct.checkpoint, fx.test_docs);
  CHECK(result.rows[0].per_seed[0].accuracy == expected.accuracy);
  CHECK(result.rows[0].per_seed[0].macro_f1 == expected.macro_f1);
}

TEST_CASE("parallel execution yields the same table as serial") {
  SweepFixture fx;
  SweepSpec spec;
  spec.axis = SweepAxis::dropout_p;
  spec.values = {0.0, 0.4};
  spec.base = fx.base;
  spec.seeds = {1, 2};

  const SweepResult serial =
      run_sweep(spec, fx.instances, fx.val_docs, fx.test_docs, 1);
  const SweepResult parallel =
      run_sweep(spec, fx.instances, fx.val_docs, fx.test_docs, 4);
  CHECK(render_table_jsonl(serial) == render_table_jsonl(parallel));
}
