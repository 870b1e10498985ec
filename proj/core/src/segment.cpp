#include "mgtd/segment.hpp"

#include <stdexcept>

namespace mgtd {

namespace {

bool is_space_byte(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\v' || c == '\f' ||
         c == '\r';
}

bool is_sentence_final(char c) { return c == '.' || c == '!' || c == '?'; }

}  // namespace

SegmentedDocument segment(std::string_view text) {
  SegmentedDocument out;
  const std::size_t n = text.size();
  std::size_t pos = 0;

  // Leading separator: whatever whitespace the text opens with.
  while (pos < n && is_space_byte(text[pos])) ++pos;
  out.separators.emplace_back(text.substr(0, pos));

  while (pos < n) {
    const std::size_t start = pos;
    std::string sentence;
    std::string separator;
    bool boundary_found = false;

    while (pos < n) {
      if (!is_space_byte(text[pos])) {
        ++pos;
        continue;
      }
      const std::size_t run_start = pos;
      bool has_newline = false;
      while (pos < n && is_space_byte(text[pos])) {
        if (text[pos] == '\n') has_newline = true;
        ++pos;
      }
      const bool after_punct = is_sentence_final(text[run_start - 1]);
      const bool at_end = pos == n;
      if (has_newline || after_punct || at_end) {
        sentence = std::string(text.substr(start, run_start - start));
        separator = std::string(text.substr(run_start, pos - run_start));
        boundary_found = true;
        break;
      }
      // Plain interior whitespace: stays inside the sentence.
    }

    if (!boundary_found) {
      sentence = std::string(text.substr(start, pos - start));
    }
    out.sentences.push_back(std::move(sentence));
    out.separators.push_back(std::move(separator));
  }

  return out;
}

std::string rejoin(const SegmentedDocument& seg) {
  if (seg.separators.size() != seg.sentences.size() + 1) {
    throw std::runtime_error(
        "rejoin: separator list must be one longer than the sentence list (" +
        std::to_string(seg.separators.size()) + " vs " +
        std::to_string(seg.sentences.size()) + ")");
  }
  std::size_t total = seg.separators[0].size();
  for (std::size_t i = 0; i < seg.sentences.size(); ++i) {
    total += seg.sentences[i].size() + seg.separators[i + 1].size();
  }
  std::string out;
  out.reserve(total);
  out += seg.separators[0];
  for (std::size_t i = 0; i < seg.sentences.size(); ++i) {
    out += seg.sentences[i];
    out += seg.separators[i + 1];
  }
  return out;
}

}  // namespace mgtd
