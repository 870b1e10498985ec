#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mgtd/corpus.hpp"
#include "mgtd/paraphrase.hpp"

namespace mgtd {

inline constexpr int kPositivePair = +1;
inline constexpr int kNegativePair = -1;

// One contrastive training pair: the original document and its sentence-wise
// paraphrase. The pair label follows the anchor's origin: a machine-written
// anchor and its (machine-produced) paraphrase form a positive-positive pair
// (y = +1); a human-written anchor makes the paraphrase a hard negative
// (y = -1).
struct ContrastiveInstance {
  Document anchor;
  std::string paraphrase_text;
  int pair_label = kNegativePair;
};

// Segments, paraphrases each sentence through `p`, and rejoins with the
// original separators byte-for-byte. Throws if the adapter returns a list of
// the wrong length or otherwise fails.
std::string paraphrase_document(const Document& doc, Paraphraser& p);

// Requires a labeled anchor and non-empty paraphrase text.
ContrastiveInstance build_instance(Document doc, std::string paraphrase_text);

// One instance per document, input order preserved. Errors carry the id of
// the failing document.
std::vector<ContrastiveInstance> augment_corpus(std::span<const Document> docs,
                                                Paraphraser& p);

// Line-delimited JSON persistence:
// {"id", "anchor_text", "anchor_label", "paraphrase_text", "y"}
void write_instances(const std::filesystem::path& path,
                     std::span<const ContrastiveInstance> instances);
std::vector<ContrastiveInstance> load_instances(const std::filesystem::path& path);

// Streaming writer behind the augment CLI. With resume=true an existing
// partial output is validated against the document list and extended instead
// of recomputed. Returns the number of newly written instances.
std::size_t augment_to_file(std::span<const Document> docs, Paraphraser& p,
                            const std::filesystem::path& out_path, bool resume);

}  // namespace mgtd
