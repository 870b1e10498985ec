#include "mgtd/paraphrase.hpp"

#include <array>
#include <cctype>
#include <stdexcept>
#include <string_view>
#include <unordered_map>

#include "json.hpp"

#include "mgtd/rng.hpp"

namespace mgtd {

namespace {

using nlohmann::json;

const std::unordered_map<std::string_view, std::string_view>& synonym_table() {
  static const std::unordered_map<std::string_view, std::string_view> table = {
      {"good", "great"},       {"bad", "poor"},
      {"big", "large"},        {"small", "little"},
      {"fast", "quick"},       {"slow", "sluggish"},
      {"happy", "glad"},       {"sad", "unhappy"},
      {"smart", "clever"},     {"easy", "simple"},
      {"hard", "difficult"},   {"important", "crucial"},
      {"show", "demonstrate"}, {"make", "create"},
      {"use", "employ"},       {"help", "assist"},
      {"start", "begin"},      {"end", "finish"},
      {"need", "require"},     {"think", "believe"},
      {"say", "state"},        {"get", "obtain"},
      {"give", "provide"},     {"find", "locate"},
      {"keep", "retain"},      {"very", "quite"},
      {"many", "numerous"},    {"also", "additionally"},
      {"but", "however"},      {"because", "since"},
      {"new", "novel"},        {"old", "former"},
      {"often", "frequently"}, {"about", "regarding"},
      {"result", "outcome"},   {"method", "approach"},
      {"large", "sizeable"},   {"people", "individuals"},
      {"world", "globe"},      {"system", "framework"},
  };
  return table;
}

std::vector<std::string> split_words(const std::string& sentence) {
  std::vector<std::string> words;
  std::string current;
  for (char c : sentence) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!current.empty()) {
        words.push_back(std::move(current));
        current.clear();
      }
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

std::string join_words(const std::vector<std::string>& words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out.push_back(' ');
    out += words[i];
  }
  return out;
}

// Splits a word into (core, trailing punctuation cluster).
std::pair<std::string, std::string> split_trailing_punct(const std::string& w) {
  std::size_t end = w.size();
  while (end > 0 && !std::isalnum(static_cast<unsigned char>(w[end - 1])) &&
         static_cast<unsigned char>(w[end - 1]) < 0x80) {
    --end;
  }
  return {w.substr(0, end), w.substr(end)};
}

std::string lowercase_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

}  // namespace

std::vector<std::string> IdentityParaphraser::paraphrase(
    const std::vector<std::string>& sentences, std::string_view) {
  return sentences;
}

NoiseParaphraser::NoiseParaphraser(std::uint64_t seed, NoiseOptions options)
    : seed_(seed), options_(options) {}

std::string NoiseParaphraser::rewrite_sentence(const std::string& sentence,
                                               Rng& rng) const {
  std::vector<std::string> words = split_words(sentence);
  if (words.empty()) return sentence;

  // Synonym substitution, case-preserving on the first letter.
  for (auto& word : words) {
    auto [core, punct] = split_trailing_punct(word);
    if (core.empty()) continue;
    const std::string lowered = lowercase_ascii(core);
    auto it = synonym_table().find(lowered);
    if (it == synonym_table().end()) continue;
    if (!rng.bernoulli(options_.synonym_rate)) continue;
    std::string replacement(it->second);
    if (std::isupper(static_cast<unsigned char>(core[0]))) {
      replacement[0] = static_cast<char>(
          std::toupper(static_cast<unsigned char>(replacement[0])));
    }
    word = replacement + punct;
  }

  // Word dropout. The last word is kept so terminal punctuation stays put,
  // and short sentences are left alone.
  if (words.size() > 3) {
    std::vector<std::string> kept;
    kept.reserve(words.size());
    for (std::size_t i = 0; i < words.size(); ++i) {
      const bool last = i + 1 == words.size();
      if (!last && kept.size() + (words.size() - i) > 2 &&
          rng.bernoulli(options_.dropout_rate)) {
        continue;
      }
      kept.push_back(std::move(words[i]));
    }
    if (kept.size() >= 2) words = std::move(kept);
  }

  // Adjacent swaps, never touching the final word. Within a segmented
  // sentence only the final word can end in boundary punctuation, so
  // non-final swaps cannot create a new sentence boundary.
  if (words.size() > 2) {
    for (std::size_t i = 0; i + 2 < words.size(); ++i) {
      if (rng.bernoulli(options_.swap_rate)) {
        std::swap(words[i], words[i + 1]);
        ++i;
      }
    }
  }

  std::string out = join_words(words);
  if (out == sentence && words.size() >= 2) {
    // A paraphrase has to rephrase. When every probabilistic op missed,
    // force a minimal edit: swap the first differing adjacent non-final
    // pair, otherwise drop the leading word.
    bool swapped = false;
    for (std::size_t i = 0; i + 2 < words.size(); ++i) {
      if (words[i] != words[i + 1]) {
        std::swap(words[i], words[i + 1]);
        swapped = true;
        break;
      }
    }
    if (!swapped) words.erase(words.begin());
    out = join_words(words);
  }
  return out.empty() ? sentence : out;
}

std::vector<std::string> NoiseParaphraser::paraphrase(
    const std::vector<std::string>& sentences, std::string_view doc_id) {
  Rng rng(splitmix64(seed_ ^ fnv1a64(doc_id)));
  std::vector<std::string> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) {
    out.push_back(rewrite_sentence(s, rng));
  }
  return out;
}

ExternalParaphraser::ExternalParaphraser(const ExternalEndpoint& endpoint)
    : transport_(make_transport(endpoint)) {}

std::vector<std::string> ExternalParaphraser::paraphrase(
    const std::vector<std::string>& sentences, std::string_view) {
  json request;
  request["sentences"] = sentences;
  const std::string reply = transport_->roundtrip(request.dump());

  json parsed = json::parse(reply, nullptr, /*allow_exceptions=*/false);
  if (parsed.is_discarded() || !parsed.is_object() ||
      !parsed.contains("paraphrases") || !parsed.at("paraphrases").is_array()) {
    throw std::runtime_error("external paraphraser via " +
                             transport_->describe() +
                             ": reply is not a {\"paraphrases\": [...]} object");
  }
  std::vector<std::string> out;
  for (const auto& item : parsed.at("paraphrases")) {
    if (!item.is_string()) {
      throw std::runtime_error("external paraphraser via " +
                               transport_->describe() +
                               ": paraphrases must all be strings");
    }
    out.push_back(item.get<std::string>());
  }
  if (out.size() != sentences.size()) {
    throw std::runtime_error(
        "external paraphraser via " + transport_->describe() + ": sent " +
        std::to_string(sentences.size()) + " sentences but received " +
        std::to_string(out.size()) + " paraphrases");
  }
  return out;
}

std::unique_ptr<Paraphraser> make_paraphraser(const std::string& kind,
                                              std::uint64_t seed,
                                              const ExternalEndpoint& endpoint) {
  if (kind == "identity") return std::make_unique<IdentityParaphraser>();
  if (kind == "noise") return std::make_unique<NoiseParaphraser>(seed);
  if (kind == "external") return std::make_unique<ExternalParaphraser>(endpoint);
  throw std::runtime_error("unknown paraphraser kind \"" + kind +
                           "\" (expected identity, noise, or external)");
}

}  // namespace mgtd
