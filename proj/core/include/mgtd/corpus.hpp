#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mgtd {

// On-disk integer coding for the two classes. The whole project keys off
// these two constants; change them here and nowhere else.
inline constexpr int kHumanLabelCode = 0;
inline constexpr int kMachineLabelCode = 1;

enum class Label : int { human = kHumanLabelCode, machine = kMachineLabelCode };

inline int label_code(Label l) { return static_cast<int>(l); }
Label label_from_code(int code);  // throws on anything but 0/1

// One labeled text instance. `label` is absent only for records loaded under
// the unlabeled schema; such documents are excluded from training.
struct Document {
  std::string id;
  std::string text;
  std::optional<Label> label;
  std::optional<std::string> generator;  // source model name, when known
  std::optional<std::string> source;     // domain tag, when known
};

enum class DatasetSchema { train, unlabeled };

struct Prediction {
  std::string id;
  Label label = Label::human;
  double score = 0.0;  // probability that the text is machine-generated
};

// label = machine iff score >= threshold (inclusive boundary).
Prediction make_prediction(std::string id, double score, double threshold = 0.5);

// Reads a line-delimited JSON dataset. Fields: id (string or integer,
// normalized to string), text, label (0/1; optional under the unlabeled
// schema), model (optional), source (optional). Malformed lines, duplicate
// ids and unknown label values raise with the offending line number(s).
std::vector<Document> load_dataset(const std::filesystem::path& path,
                                   DatasetSchema schema);

// Writes `{"id": ..., "label": 0|1}` per prediction, input order preserved.
// Output is byte-identical across repeated calls with identical input.
void write_predictions(const std::filesystem::path& path,
                       const std::vector<Prediction>& preds);

std::vector<Prediction> load_predictions(const std::filesystem::path& path);

struct CountSummary {
  std::size_t total = 0;
  std::size_t human = 0;
  std::size_t machine = 0;
  std::size_t unlabeled = 0;
  std::map<std::string, std::size_t> per_generator;
  std::map<std::string, std::size_t> per_source;
};

CountSummary split_stats(const std::vector<Document>& docs);

}  // namespace mgtd
