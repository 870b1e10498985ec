#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mgtd/augment.hpp"
#include "mgtd/rng.hpp"
#include "mgtd/tensor.hpp"
#include "mgtd/transport.hpp"

namespace mgtd {

enum class EncoderKind { reference, external };

struct EncoderConfig {
  EncoderKind kind = EncoderKind::reference;
  int dim = 64;            // embedding dimension d
  int max_tokens = 4096;   // truncation length
  int vocab_buckets = 32768;  // hashed vocabulary size (reference encoder)
};

struct ClassifierHeadConfig {
  int hidden_dim = 64;
  double dropout_p = 0.6;  // applied between the two linear layers, train mode only
};

struct ModelConfig {
  EncoderConfig encoder;
  ClassifierHeadConfig head;
};

using Embedding = std::vector<double>;

// The four products of a shared-weight forward pass over one pair.
struct PairOutput {
  Embedding emb_anchor;
  Embedding emb_para;
  double prob_anchor = 0.0;
  double prob_para = 0.0;
};

enum class RunMode { train, eval };

// Lowercased whitespace/punctuation tokenization: alphanumeric runs are word
// tokens, every other non-space byte is its own token; each token is hashed
// into [0, vocab_buckets). Truncates to max_tokens. Bytes >= 0x80 count as
// word bytes so UTF-8 sequences stay inside one token.
std::vector<std::uint32_t> tokenize(std::string_view text, int max_tokens,
                                    int vocab_buckets);

// Forward intermediates for one text, kept for the backward pass.
struct BranchTrace {
  std::vector<std::uint32_t> tokens;
  std::vector<double> pooled;        // mean bucket embedding (reference only)
  Embedding embedding;               // e = tanh(W h + b)
  std::vector<double> hidden;        // a = tanh(W1 e + b1)
  std::vector<double> dropout_mask;  // inverted-dropout scale per unit; empty in eval
  double logit = 0.0;
  double prob = 0.0;
};

struct PairTrace {
  BranchTrace anchor;
  BranchTrace para;
};

// Loss gradients with respect to the four forward products, produced by the
// objective and consumed by DetectorModel::backward_pair.
struct PairGrads {
  std::vector<double> d_emb_anchor;
  std::vector<double> d_emb_para;
  double d_prob_anchor = 0.0;
  double d_prob_para = 0.0;
};

// Text -> embedding service with the same transports as the paraphraser:
// {"texts": [...]} -> {"embeddings": [[...], ...]}.
class ExternalEncoderClient {
 public:
  explicit ExternalEncoderClient(const ExternalEndpoint& endpoint);
  ~ExternalEncoderClient();
  std::vector<Embedding> embed(const std::vector<std::string>& texts);

 private:
  std::unique_ptr<LineTransport> transport_;
};

// Shared document encoder plus two-layer classifier head. Both members of a
// pair run through the one parameter set held here; there is no second copy
// anywhere.
//
// Reference encoder: bucket-embedding lookup -> mean pool -> affine -> tanh.
// Head: linear(d -> hidden) -> tanh -> dropout(train only) -> linear(hidden -> 1)
// -> sigmoid.
class DetectorModel {
 public:
  explicit DetectorModel(ModelConfig config);

  // Reference encoder only (external encoders hold no encoder parameters).
  void init_params(std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }
  void set_params(ParamSet params);

  void set_external_encoder(std::shared_ptr<ExternalEncoderClient> client);

  std::vector<std::uint32_t> tokenize_text(std::string_view text) const;

  // Throws on an empty token sequence or out-of-range token id.
  Embedding encode(std::span<const std::uint32_t> tokens) const;

  // rng is required in train mode when dropout_p > 0.
  double classify(const Embedding& e, RunMode mode, Rng* dropout_rng = nullptr) const;

  Embedding encode_text(const std::string& text) const;

  PairOutput forward_pair(const ContrastiveInstance& inst, RunMode mode,
                          Rng* dropout_rng = nullptr,
                          PairTrace* trace = nullptr) const;

  // Accumulates into `grads` (shapes from params().zeros_like()). Both
  // branches of the trace contribute to the same tensors.
  void backward_pair(const PairTrace& trace, const PairGrads& upstream,
                     ParamSet& grads) const;

  double score_text(const std::string& text) const;  // eval-mode probability

 private:
  struct BranchResult {
    Embedding embedding;
    double prob;
  };
  BranchTrace forward_branch(const std::string& text, RunMode mode,
                             Rng* dropout_rng) const;
  void backward_branch(const BranchTrace& trace, std::span<const double> d_emb,
                       double d_prob, ParamSet& grads) const;

  ModelConfig config_;
  ParamSet params_;
  std::shared_ptr<ExternalEncoderClient> external_;
};

}  // namespace mgtd
