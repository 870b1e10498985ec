#include "mgtd/augment.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

#include "mgtd/segment.hpp"

namespace mgtd {

namespace {

using nlohmann::json;

bool is_blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isspace(c); });
}

json instance_to_json(const ContrastiveInstance& inst) {
  json rec;
  rec["id"] = inst.anchor.id;
  rec["anchor_text"] = inst.anchor.text;
  rec["anchor_label"] = label_code(*inst.anchor.label);
  rec["paraphrase_text"] = inst.paraphrase_text;
  rec["y"] = inst.pair_label;
  return rec;
}

ContrastiveInstance instance_from_json(const json& rec, std::size_t line_no) {
  if (!rec.is_object() || !rec.contains("id") || !rec.contains("anchor_text") ||
      !rec.contains("anchor_label") || !rec.contains("paraphrase_text") ||
      !rec.contains("y")) {
    throw std::runtime_error("instances line " + std::to_string(line_no) +
                             ": malformed record");
  }
  Document anchor;
  anchor.id = rec.at("id").is_string()
                  ? rec.at("id").get<std::string>()
                  : std::to_string(rec.at("id").get<long long>());
  anchor.text = rec.at("anchor_text").get<std::string>();
  anchor.label = label_from_code(rec.at("anchor_label").get<int>());
  const int y = rec.at("y").get<int>();
  if (y != kPositivePair && y != kNegativePair) {
    throw std::runtime_error("instances line " + std::to_string(line_no) +
                             ": y must be +1 or -1");
  }
  ContrastiveInstance inst = build_instance(std::move(anchor),
                                            rec.at("paraphrase_text").get<std::string>());
  if (inst.pair_label != y) {
    throw std::runtime_error("instances line " + std::to_string(line_no) +
                             ": y is inconsistent with anchor_label");
  }
  return inst;
}

}  // namespace

std::string paraphrase_document(const Document& doc, Paraphraser& p) {
  if (doc.text.empty()) {
    throw std::runtime_error("paraphrase_document: document \"" + doc.id +
                             "\" has empty text");
  }
  SegmentedDocument seg = segment(doc.text);
  std::vector<std::string> rewritten;
  try {
    rewritten = p.paraphrase(seg.sentences, doc.id);
  } catch (const std::exception& e) {
    throw std::runtime_error("paraphraser \"" + p.name() +
                             "\" failed on document \"" + doc.id +
                             "\": " + e.what());
  }
  if (rewritten.size() != seg.sentences.size()) {
    throw std::runtime_error(
        "paraphraser \"" + p.name() + "\" returned " +
        std::to_string(rewritten.size()) + " sentences for document \"" +
        doc.id + "\" (expected " + std::to_string(seg.sentences.size()) + ")");
  }
  seg.sentences = std::move(rewritten);
  return rejoin(seg);
}

ContrastiveInstance build_instance(Document doc, std::string paraphrase_text) {
  if (doc.text.empty()) {
    throw std::runtime_error("build_instance: empty anchor text (id \"" +
                             doc.id + "\")");
  }
  if (paraphrase_text.empty()) {
    throw std::runtime_error("build_instance: empty paraphrase text (id \"" +
                             doc.id + "\")");
  }
  if (!doc.label) {
    throw std::runtime_error(
        "build_instance: unlabeled document \"" + doc.id +
        "\" cannot form a contrastive pair");
  }
  ContrastiveInstance inst;
  inst.pair_label =
      *doc.label == Label::machine ? kPositivePair : kNegativePair;
  inst.anchor = std::move(doc);
  inst.paraphrase_text = std::move(paraphrase_text);
  return inst;
}

std::vector<ContrastiveInstance> augment_corpus(std::span<const Document> docs,
                                                Paraphraser& p) {
  std::vector<ContrastiveInstance> out;
  out.reserve(docs.size());
  for (const Document& doc : docs) {
    out.push_back(build_instance(doc, paraphrase_document(doc, p)));
  }
  return out;
}

void write_instances(const std::filesystem::path& path,
                     std::span<const ContrastiveInstance> instances) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open instance file for writing: " +
                             path.string());
  }
  for (const auto& inst : instances) {
    out << instance_to_json(inst).dump() << '\n';
  }
  if (!out) {
    throw std::runtime_error("failed while writing instances to " +
                             path.string());
  }
}

std::vector<ContrastiveInstance> load_instances(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open instance file: " + path.string());
  }
  std::vector<ContrastiveInstance> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded()) {
      throw std::runtime_error("instances line " + std::to_string(line_no) +
                               ": malformed JSON");
    }
    out.push_back(instance_from_json(rec, line_no));
  }
  return out;
}

std::size_t augment_to_file(std::span<const Document> docs, Paraphraser& p,
                            const std::filesystem::path& out_path, bool resume) {
  std::size_t done = 0;
  if (resume && std::filesystem::exists(out_path)) {
    const auto existing = load_instances(out_path);
    if (existing.size() > docs.size()) {
      throw std::runtime_error(
          "resume: output has more instances than the input has documents");
    }
    for (std::size_t i = 0; i < existing.size(); ++i) {
      if (existing[i].anchor.id != docs[i].id) {
        throw std::runtime_error(
            "resume: output instance " + std::to_string(i + 1) +
            " has id \"" + existing[i].anchor.id +
            "\" but the input document there is \"" + docs[i].id +
            "\"; refusing to resume against a different corpus");
      }
    }
    done = existing.size();
  }

  std::ofstream out(out_path, done > 0
                                  ? std::ios::binary | std::ios::app
                                  : std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open instance file for writing: " +
                             out_path.string());
  }
  std::size_t written = 0;
  for (std::size_t i = done; i < docs.size(); ++i) {
    const auto inst = build_instance(docs[i], paraphrase_document(docs[i], p));
    out << instance_to_json(inst).dump() << '\n';
    out.flush();
    ++written;
  }
  if (!out) {
    throw std::runtime_error("failed while writing instances to " +
                             out_path.string());
  }
  return written;
}

}  // namespace mgtd
