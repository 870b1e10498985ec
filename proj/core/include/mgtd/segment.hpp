#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mgtd {

// A document split into sentences plus every byte of separator material, so
// that rejoin(segment(t)) == t holds byte-exactly. separators has exactly
// sentences.size() + 1 entries: leading run, one run after each sentence.
// Any entry may be empty.
struct SegmentedDocument {
  std::vector<std::string> sentences;
  std::vector<std::string> separators;
};

// Splits at maximal whitespace runs that either contain a newline, follow
// sentence-final punctuation (. ! ?), or touch the end of the text. Interior
// whitespace that triggers none of these stays inside its sentence. Works on
// bytes; multi-byte UTF-8 sequences pass through untouched.
SegmentedDocument segment(std::string_view text);

// Inverse of segment for any structurally valid SegmentedDocument.
// Throws if separators.size() != sentences.size() + 1.
std::string rejoin(const SegmentedDocument& seg);

}  // namespace mgtd
