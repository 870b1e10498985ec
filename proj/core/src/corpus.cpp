#include "mgtd/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

namespace mgtd {

namespace {

using nlohmann::json;

bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c); });
}

std::string normalize_id(const json& v, std::size_t line_no) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
  throw std::runtime_error("dataset line " + std::to_string(line_no) +
                           ": id must be a string or integer");
}

}  // namespace

Label label_from_code(int code) {
  if (code == kHumanLabelCode) return Label::human;
  if (code == kMachineLabelCode) return Label::machine;
  throw std::runtime_error("unknown label value " + std::to_string(code) +
                           " (expected " + std::to_string(kHumanLabelCode) +
                           " or " + std::to_string(kMachineLabelCode) + ")");
}

Prediction make_prediction(std::string id, double score, double threshold) {
  Prediction p;
  p.id = std::move(id);
  p.score = score;
  p.label = score >= threshold ? Label::machine : Label::human;
  return p;
}

std::vector<Document> load_dataset(const std::filesystem::path& path,
                                   DatasetSchema schema) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open dataset file: " + path.string());
  }

  std::vector<Document> docs;
  std::unordered_map<std::string, std::size_t> seen;  // id -> line number
  std::string line;
  std::size_t line_no = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;

    json rec = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (rec.is_discarded() || !rec.is_object()) {
      throw std::runtime_error("dataset line " + std::to_string(line_no) +
                               ": malformed JSON record");
    }

    Document doc;
    if (!rec.contains("id")) {
      throw std::runtime_error("dataset line " + std::to_string(line_no) +
                               ": missing id");
    }
    doc.id = normalize_id(rec.at("id"), line_no);
    if (doc.id.empty()) {
      throw std::runtime_error("dataset line " + std::to_string(line_no) +
                               ": empty id");
    }

    if (!rec.contains("text") || !rec.at("text").is_string()) {
      throw std::runtime_error("dataset line " + std::to_string(line_no) +
                               ": missing or non-string text");
    }
    doc.text = rec.at("text").get<std::string>();
    if (is_blank(doc.text)) {
      throw std::runtime_error("dataset line " + std::to_string(line_no) +
                               ": text is empty after stripping whitespace");
    }

    if (rec.contains("label") && !rec.at("label").is_null()) {
      const json& lv = rec.at("label");
      if (!lv.is_number_integer() && !lv.is_number_unsigned()) {
        throw std::runtime_error("dataset line " + std::to_string(line_no) +
                                 ": label must be an integer");
      }
      try {
        doc.label = label_from_code(lv.get<int>());
      } catch (const std::exception& e) {
        throw std::runtime_error("dataset line " + std::to_string(line_no) +
                                 ": " + e.what());
      }
    } else if (schema == DatasetSchema::train) {
      throw std::runtime_error("dataset line " + std::to_string(line_no) +
                               ": missing label in train-schema dataset");
    }

    if (rec.contains("model") && rec.at("model").is_string()) {
      doc.generator = rec.at("model").get<std::string>();
    }
    if (rec.contains("source") && rec.at("source").is_string()) {
      doc.source = rec.at("source").get<std::string>();
    }

    auto [it, inserted] = seen.emplace(doc.id, line_no);
    if (!inserted) {
      throw std::runtime_error("duplicate id \"" + doc.id + "\" on lines " +
                               std::to_string(it->second) + " and " +
                               std::to_string(line_no));
    }
    docs.push_back(std::move(doc));
  }

  return docs;
}

void write_predictions(const std::filesystem::path& path,
                       const std::vector<Prediction>& preds) {
  {
    std::unordered_set<std::string> ids;
    for (const auto& p : preds) {
      if (!ids.insert(p.id).second) {
        throw std::runtime_error("write_predictions: duplicate id \"" + p.id +
                                 "\"");
      }
    }
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open prediction file for writing: " +
                             path.string());
  }
  for (const auto& p : preds) {
    json rec;
    rec["id"] = p.id;
    rec["label"] = label_code(p.label);
    out << rec.dump() << '\n';
  }
  if (!out) {
    throw std::runtime_error("failed while writing predictions to " +
                             path.string());
  }
}

std::vector<Prediction> load_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open prediction file: " + path.string());
  }
  std::vector<Prediction> preds;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.is_object() || !rec.contains("id") ||
        !rec.contains("label")) {
      throw std::runtime_error("prediction line " + std::to_string(line_no) +
                               ": malformed record");
    }
    Prediction p;
    p.id = normalize_id(rec.at("id"), line_no);
    p.label = label_from_code(rec.at("label").get<int>());
    p.score = rec.value("score", p.label == Label::machine ? 1.0 : 0.0);
    preds.push_back(std::move(p));
  }
  return preds;
}

CountSummary split_stats(const std::vector<Document>& docs) {
  CountSummary s;
  s.total = docs.size();
  for (const auto& d : docs) {
    if (!d.label) {
      ++s.unlabeled;
    } else if (*d.label == Label::human) {
      ++s.human;
    } else {
      ++s.machine;
    }
    if (d.generator) ++s.per_generator[*d.generator];
    if (d.source) ++s.per_source[*d.source];
  }
  return s;
}

}  // namespace mgtd
