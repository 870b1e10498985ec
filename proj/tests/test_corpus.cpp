#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mgtd/corpus.hpp"

using namespace mgtd;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("mgtd-corpus-" + std::to_string(::getpid()) + "-" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path file(const std::string& name) const { return path / name; }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

fs::path write_file(const TempDir& dir, const std::string& name,
                    const std::string& content) {
  const fs::path p = dir.file(name);
  std::ofstream out(p, std::ios::binary);
  out << content;
  return p;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("load_dataset maps fields and label codes") {
  TempDir dir;
  const auto p = write_file(dir, "d.jsonl",
                            R"({"id":"1","text":"Hello.","label":1})"
                            "\n"
                            R"({"id":7,"text":"Bye.","label":0,"model":"gpt","source":"wiki"})"
                            "\n");
  const auto docs = load_dataset(p, DatasetSchema::train);
  REQUIRE(docs.size() == 2);
  CHECK(docs[0].id == "1");
  CHECK(docs[0].text == "Hello.");
  CHECK(docs[0].label == Label::machine);
  CHECK_FALSE(docs[0].generator.has_value());
  CHECK(docs[1].id == "7");  // integer id normalized to string
  CHECK(docs[1].label == Label::human);
  CHECK(docs[1].generator == "gpt");
  CHECK(docs[1].source == "wiki");
}

TEST_CASE("load_dataset rejects duplicate ids naming both lines") {
  TempDir dir;
  const auto p = write_file(dir, "d.jsonl",
                            R"({"id":"1","text":"a.","label":1})"
                            "\n"
                            R"({"id":"1","text":"b.","label":0})"
                            "\n");
  CHECK_THROWS_WITH_AS(load_dataset(p, DatasetSchema::train),
                       doctest::Contains("lines 1 and 2"), std::runtime_error);
}

TEST_CASE("load_dataset on an empty file returns an empty list") {
  TempDir dir;
  const auto p = write_file(dir, "d.jsonl", "");
  CHECK(load_dataset(p, DatasetSchema::train).empty());
}

TEST_CASE("load_dataset names the malformed line") {
  TempDir dir;
  const auto p = write_file(dir, "d.jsonl",
                            R"({"id":"1","text":"a.","label":1})"
                            "\nnot json\n");
  CHECK_THROWS_WITH_AS(load_dataset(p, DatasetSchema::train),
                       doctest::Contains("line 2"), std::runtime_error);
}

TEST_CASE("load_dataset rejects unknown label values") {
  TempDir dir;
  const auto p =
      write_file(dir, "d.jsonl", R"({"id":"1","text":"a.","label":2})" "\n");
  CHECK_THROWS_AS(load_dataset(p, DatasetSchema::train), std::runtime_error);

  const auto p2 = write_file(dir, "d2.jsonl",
                             R"({"id":"1","text":"a.","label":"machine"})" "\n");
  CHECK_THROWS_AS(load_dataset(p2, DatasetSchema::train), std::runtime_error);
}

TEST_CASE("unlabeled schema permits a missing label, train schema does not") {
  TempDir dir;
  const auto p = write_file(dir, "d.jsonl", R"({"id":"1","text":"a."})" "\n");
  CHECK_THROWS_AS(load_dataset(p, DatasetSchema::train), std::runtime_error);
  const auto docs = load_dataset(p, DatasetSchema::unlabeled);
  REQUIRE(docs.size() == 1);
  CHECK_FALSE(docs[0].label.has_value());
}

TEST_CASE("load_dataset rejects blank text and empty ids") {
  TempDir dir;
  const auto blank =
      write_file(dir, "b.jsonl", R"({"id":"1","text":"  \n ","label":0})" "\n");
  CHECK_THROWS_AS(load_dataset(blank, DatasetSchema::train), std::runtime_error);
  const auto noid =
      write_file(dir, "n.jsonl", R"({"id":"","text":"x.","label":0})" "\n");
  CHECK_THROWS_AS(load_dataset(noid, DatasetSchema::train), std::runtime_error);
}

TEST_CASE("load_dataset is deterministic over the same bytes") {
  TempDir dir;
  const auto p = write_file(dir, "d.jsonl",
                            R"({"id":"1","text":"Hello.","label":1})"
                            "\n"
                            R"({"id":"2","text":"World.","label":0})"
                            "\n");
  const auto a = load_dataset(p, DatasetSchema::train);
  const auto b = load_dataset(p, DatasetSchema::train);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].id == b[i].id);
    CHECK(a[i].text == b[i].text);
    CHECK(a[i].label == b[i].label);
  }
}

TEST_CASE("write_predictions emits the expected lines in input order") {
  TempDir dir;
  const fs::path p = dir.file("preds.jsonl");

  SUBCASE("machine example") {
    write_predictions(p, {make_prediction("7", 0.9)});
    CHECK(read_file(p) == "{\"id\":\"7\",\"label\":1}\n");
  }
  SUBCASE("human example") {
    write_predictions(p, {make_prediction("a", 0.2)});
    CHECK(read_file(p) == "{\"id\":\"a\",\"label\":0}\n");
  }
  SUBCASE("empty input gives an empty file") {
    write_predictions(p, {});
    CHECK(read_file(p).empty());
  }
}

TEST_CASE("write_predictions is byte-identical across repeated calls") {
  TempDir dir;
  std::vector<Prediction> preds = {make_prediction("1", 0.7),
                                   make_prediction("2", 0.3),
                                   make_prediction("x9", 0.51)};
  const fs::path a = dir.file("a.jsonl");
  const fs::path b = dir.file("b.jsonl");
  write_predictions(a, preds);
  write_predictions(b, preds);
  CHECK(read_file(a) == read_file(b));
}

TEST_CASE("prediction round-trip preserves ids and labels") {
  TempDir dir;
  const fs::path p = dir.file("preds.jsonl");
  std::vector<Prediction> preds;
  for (int i = 0; i < 50; ++i) {
    preds.push_back(make_prediction("id-" + std::to_string(i),
                                    (i % 3) / 2.0));
  }
  write_predictions(p, preds);
  const auto loaded = load_predictions(p);
  REQUIRE(loaded.size() == preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    CHECK(loaded[i].id == preds[i].id);
    CHECK(loaded[i].label == preds[i].label);
  }
}

TEST_CASE("write_predictions rejects duplicate ids") {
  TempDir dir;
  CHECK_THROWS_AS(write_predictions(dir.file("p.jsonl"),
                                    {make_prediction("1", 0.9),
                                     make_prediction("1", 0.1)}),
                  std::runtime_error);
}

TEST_CASE("write_predictions fails on an unwritable path") {
  CHECK_THROWS_AS(
      write_predictions("/nonexistent-dir/preds.jsonl", {make_prediction("1", 0.9)}),
      std::runtime_error);
}

TEST_CASE("decision threshold is inclusive") {
  CHECK(make_prediction("x", 0.5).label == Label::machine);
  CHECK(make_prediction("x", 0.4999).label == Label::human);
  CHECK(make_prediction("x", 0.5, 0.6).label == Label::human);
}

TEST_CASE("split_stats counts labels and generators") {
  auto doc = [](std::string id, std::optional<Label> label,
                std::optional<std::string> gen = std::nullopt) {
    Document d;
    d.id = std::move(id);
    d.text = "t.";
    d.label = label;
    d.generator = std::move(gen);
    return d;
  };

  SUBCASE("two human, three machine") {
    std::vector<Document> docs = {doc("1", Label::human), doc("2", Label::human),
                                  doc("3", Label::machine),
                                  doc("4", Label::machine),
                                  doc("5", Label::machine)};
    const auto s = split_stats(docs);
    CHECK(s.human == 2);
    CHECK(s.machine == 3);
    CHECK(s.total == 5);
    CHECK(s.human + s.machine + s.unlabeled == docs.size());
  }
  SUBCASE("empty corpus is all zeros") {
    const auto s = split_stats({});
    CHECK(s.total == 0);
    CHECK(s.human == 0);
    CHECK(s.machine == 0);
    CHECK(s.unlabeled == 0);
    CHECK(s.per_generator.empty());
  }
  SUBCASE("five machine docs from one generator") {
    std::vector<Document> docs;
    for (int i = 0; i < 5; ++i) {
      docs.push_back(doc(std::to_string(i), Label::machine, "gen-a"));
    }
    const auto s = split_stats(docs);
    CHECK(s.per_generator.at("gen-a") == 5);
  }
}
