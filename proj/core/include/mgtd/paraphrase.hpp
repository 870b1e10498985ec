#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "mgtd/transport.hpp"

namespace mgtd {

// Sentence-level paraphraser. Implementations must return exactly one
// paraphrase per input sentence. doc_id scopes any randomness so that
// paraphrasing a corpus in parallel or serially yields identical bytes.
class Paraphraser {
 public:
  virtual ~Paraphraser() = default;
  virtual std::string name() const = 0;
  virtual bool deterministic() const = 0;
  virtual std::vector<std::string> paraphrase(
      const std::vector<std::string>& sentences, std::string_view doc_id) = 0;
};

// Returns every sentence unchanged. The baseline for round-trip tests.
class IdentityParaphraser final : public Paraphraser {
 public:
  std::string name() const override { return "identity"; }
  bool deterministic() const override { return true; }
  std::vector<std::string> paraphrase(const std::vector<std::string>& sentences,
                                      std::string_view doc_id) override;
};

struct NoiseOptions {
  double synonym_rate = 0.4;
  double dropout_rate = 0.1;
  double swap_rate = 0.1;
};

// Deterministic seeded rewriter: synonym substitution from a small built-in
// table, word dropout, and adjacent-word swaps. Per-document randomness is
// derived from (seed, doc_id) only. Every sentence of two or more words is
// guaranteed to come back different, so paraphrased documents never collide
// with their anchors.
class NoiseParaphraser final : public Paraphraser {
 public:
  explicit NoiseParaphraser(std::uint64_t seed, NoiseOptions options = {});

  std::string name() const override { return "noise"; }
  bool deterministic() const override { return true; }
  std::vector<std::string> paraphrase(const std::vector<std::string>& sentences,
                                      std::string_view doc_id) override;

 private:
  std::string rewrite_sentence(const std::string& sentence, class Rng& rng) const;

  std::uint64_t seed_;
  NoiseOptions options_;
};

// Adapter to any sentence-paraphrase service. Sends one
// {"sentences": [...]} object per call and expects {"paraphrases": [...]}
// of equal length.
class ExternalParaphraser final : public Paraphraser {
 public:
  explicit ExternalParaphraser(const ExternalEndpoint& endpoint);

  std::string name() const override { return "external"; }
  bool deterministic() const override { return false; }
  std::vector<std::string> paraphrase(const std::vector<std::string>& sentences,
                                      std::string_view doc_id) override;

 private:
  std::unique_ptr<LineTransport> transport_;
};

// kind is one of "identity", "noise", "external".
std::unique_ptr<Paraphraser> make_paraphraser(const std::string& kind,
                                              std::uint64_t seed,
                                              const ExternalEndpoint& endpoint = {});

}  // namespace mgtd
