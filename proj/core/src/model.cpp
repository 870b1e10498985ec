#include "mgtd/model.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace mgtd {

namespace {

using nlohmann::json;

bool is_word_byte(unsigned char c) {
  return std::isalnum(c) || c >= 0x80;  // keep UTF-8 sequences inside one token
}

double sigmoid(double x) {
  double s;
  if (x >= 0) {
    s = 1.0 / (1.0 + std::exp(-x));
  } else {
    const double e = std::exp(x);
    s = e / (1.0 + e);
  }
  // Keep the output strictly inside (0, 1) even for saturating logits.
  constexpr double tiny = 1e-15;
  if (s < tiny) s = tiny;
  if (s > 1.0 - tiny) s = 1.0 - tiny;
  return s;
}

constexpr std::string_view kEmbeddingName = "encoder.embedding";
constexpr std::string_view kProjWName = "encoder.proj_w";
constexpr std::string_view kProjBName = "encoder.proj_b";
constexpr std::string_view kW1Name = "head.w1";
constexpr std::string_view kB1Name = "head.b1";
constexpr std::string_view kW2Name = "head.w2";
constexpr std::string_view kB2Name = "head.b2";

}  // namespace

std::vector<std::uint32_t> tokenize(std::string_view text, int max_tokens,
                                    int vocab_buckets) {
  if (max_tokens < 1) {
    throw std::runtime_error("tokenize: max_tokens must be >= 1");
  }
  if (vocab_buckets < 1) {
    throw std::runtime_error("tokenize: vocab_buckets must be >= 1");
  }
  std::vector<std::uint32_t> ids;
  const auto buckets = static_cast<std::uint64_t>(vocab_buckets);

  std::string current;
  auto flush_word = [&] {
    if (current.empty()) return;
    ids.push_back(static_cast<std::uint32_t>(fnv1a64(current) % buckets));
    current.clear();
  };

  for (char raw : text) {
    if (static_cast<std::size_t>(ids.size()) >=
        static_cast<std::size_t>(max_tokens)) {
      return ids;
    }
    const auto c = static_cast<unsigned char>(raw);
    if (is_word_byte(c)) {
      current.push_back(
          static_cast<char>(c < 0x80 ? std::tolower(c) : c));
    } else {
      flush_word();
      if (ids.size() >= static_cast<std::size_t>(max_tokens)) return ids;
      if (!std::isspace(c)) {
        const char punct[2] = {raw, '\0'};
        ids.push_back(static_cast<std::uint32_t>(
            fnv1a64(std::string_view(punct, 1)) % buckets));
      }
    }
  }
  if (ids.size() < static_cast<std::size_t>(max_tokens)) flush_word();
  return ids;
}

ExternalEncoderClient::ExternalEncoderClient(const ExternalEndpoint& endpoint)
    : transport_(make_transport(endpoint)) {}

ExternalEncoderClient::~ExternalEncoderClient() = default;

std::vector<Embedding> ExternalEncoderClient::embed(
    const std::vector<std::string>& texts) {
  json request;
  request["texts"] = texts;
  const std::string reply = transport_->roundtrip(request.dump());
  json parsed = json::parse(reply, nullptr, /*allow_exceptions=*/false);
  if (parsed.is_discarded() || !parsed.is_object() ||
      !parsed.contains("embeddings") || !parsed.at("embeddings").is_array()) {
    throw std::runtime_error("external encoder via " + transport_->describe() +
                             ": reply is not a {\"embeddings\": [...]} object");
  }
  std::vector<Embedding> out;
  for (const auto& row : parsed.at("embeddings")) {
    out.push_back(row.get<Embedding>());
  }
  if (out.size() != texts.size()) {
    throw std::runtime_error("external encoder via " + transport_->describe() +
                             ": sent " + std::to_string(texts.size()) +
                             " texts but received " + std::to_string(out.size()) +
                             " embeddings");
  }
  return out;
}

DetectorModel::DetectorModel(ModelConfig config) : config_(config) {
  const auto d = static_cast<std::size_t>(config_.encoder.dim);
  const auto hidden = static_cast<std::size_t>(config_.head.hidden_dim);
  if (config_.encoder.kind == EncoderKind::reference) {
    const auto buckets = static_cast<std::size_t>(config_.encoder.vocab_buckets);
    params_.add(std::string(kEmbeddingName), Tensor({buckets, d}));
    params_.add(std::string(kProjWName), Tensor({d, d}));
    params_.add(std::string(kProjBName), Tensor({d}));
  }
  params_.add(std::string(kW1Name), Tensor({hidden, d}));
  params_.add(std::string(kB1Name), Tensor({hidden}));
  params_.add(std::string(kW2Name), Tensor({hidden}));
  params_.add(std::string(kB2Name), Tensor({1}));
}

void DetectorModel::init_params(std::uint64_t seed) {
  Rng rng(seed);
  const double d_scale = 1.0 / std::sqrt(static_cast<double>(config_.encoder.dim));
  const double h_scale =
      1.0 / std::sqrt(static_cast<double>(config_.head.hidden_dim));

  // Fill order is the fixed entry order, so one seed pins every value.
  for (auto& [name, tensor] : params_.entries()) {
    double scale = 0.0;
    if (name == kEmbeddingName) {
      scale = 0.5;
    } else if (name == kProjWName || name == kW1Name) {
      scale = d_scale;
    } else if (name == kW2Name) {
      scale = h_scale;
    } else {
      tensor.fill(0.0);  // biases
      continue;
    }
    for (double& v : tensor.data) v = rng.uniform(-scale, scale);
  }
}

void DetectorModel::set_params(ParamSet params) {
  if (params.tensor_count() != params_.tensor_count()) {
    throw std::runtime_error("set_params: tensor count mismatch");
  }
  for (const auto& [name, tensor] : params.entries()) {
    const Tensor& expected = params_.get(name);
    if (expected.shape != tensor.shape) {
      throw std::runtime_error("set_params: shape mismatch for " + name);
    }
  }
  params_ = std::move(params);
}

void DetectorModel::set_external_encoder(
    std::shared_ptr<ExternalEncoderClient> client) {
  external_ = std::move(client);
}

std::vector<std::uint32_t> DetectorModel::tokenize_text(
    std::string_view text) const {
  return tokenize(text, config_.encoder.max_tokens, config_.encoder.vocab_buckets);
}

Embedding DetectorModel::encode(std::span<const std::uint32_t> tokens) const {
  if (config_.encoder.kind != EncoderKind::reference) {
    throw std::runtime_error(
        "encode: token-level encoding requires the reference encoder");
  }
  if (tokens.empty()) {
    throw std::runtime_error("encode: empty token sequence");
  }
  const auto d = static_cast<std::size_t>(config_.encoder.dim);
  const Tensor& emb = params_.get(kEmbeddingName);
  const Tensor& w = params_.get(kProjWName);
  const Tensor& b = params_.get(kProjBName);

  std::vector<double> pooled(d, 0.0);
  for (std::uint32_t t : tokens) {
    if (t >= emb.shape[0]) {
      throw std::runtime_error("encode: token id " + std::to_string(t) +
                               " outside bucket range " +
                               std::to_string(emb.shape[0]));
    }
    const double* row = emb.data.data() + static_cast<std::size_t>(t) * d;
    for (std::size_t k = 0; k < d; ++k) pooled[k] += row[k];
  }
  const double inv = 1.0 / static_cast<double>(tokens.size());
  for (double& v : pooled) v *= inv;

  Embedding e(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    double u = b.at(j);
    const double* wrow = w.data.data() + j * d;
    for (std::size_t k = 0; k < d; ++k) u += wrow[k] * pooled[k];
    e[j] = std::tanh(u);
  }
  return e;
}

double DetectorModel::classify(const Embedding& e, RunMode mode,
                               Rng* dropout_rng) const {
  const auto d = static_cast<std::size_t>(config_.encoder.dim);
  if (e.size() != d) {
    throw std::runtime_error("classify: embedding dimension " +
                             std::to_string(e.size()) + " does not match d=" +
                             std::to_string(d));
  }
  const auto hidden_dim = static_cast<std::size_t>(config_.head.hidden_dim);
  const Tensor& w1 = params_.get(kW1Name);
  const Tensor& b1 = params_.get(kB1Name);
  const Tensor& w2 = params_.get(kW2Name);
  const Tensor& b2 = params_.get(kB2Name);

  double logit = b2.at(0);
  const double p = config_.head.dropout_p;
  const bool use_dropout = mode == RunMode::train && p > 0.0;
  if (use_dropout && dropout_rng == nullptr) {
    throw std::runtime_error(
        "classify: train mode with dropout needs an rng stream");
  }
  const double keep_scale = use_dropout ? 1.0 / (1.0 - p) : 1.0;

  for (std::size_t i = 0; i < hidden_dim; ++i) {
    double z = b1.at(i);
    const double* row = w1.data.data() + i * d;
    for (std::size_t j = 0; j < d; ++j) z += row[j] * e[j];
    double a = std::tanh(z);
    if (use_dropout) {
      a *= dropout_rng->uniform() < p ? 0.0 : keep_scale;
    }
    logit += w2.at(i) * a;
  }
  return sigmoid(logit);
}

BranchTrace DetectorModel::forward_branch(const std::string& text, RunMode mode,
                                          Rng* dropout_rng) const {
  BranchTrace trace;
  const auto d = static_cast<std::size_t>(config_.encoder.dim);

  if (config_.encoder.kind == EncoderKind::reference) {
    trace.tokens = tokenize_text(text);
    if (trace.tokens.empty()) {
      throw std::runtime_error("forward: text tokenizes to nothing: \"" + text +
                               "\"");
    }
    const Tensor& emb = params_.get(kEmbeddingName);
    const Tensor& w = params_.get(kProjWName);
    const Tensor& b = params_.get(kProjBName);
    trace.pooled.assign(d, 0.0);
    for (std::uint32_t t : trace.tokens) {
      if (t >= emb.shape[0]) {
        throw std::runtime_error("forward: token id out of range");
      }
      const double* row = emb.data.data() + static_cast<std::size_t>(t) * d;
      for (std::size_t k = 0; k < d; ++k) trace.pooled[k] += row[k];
    }
    const double inv = 1.0 / static_cast<double>(trace.tokens.size());
    for (double& v : trace.pooled) v *= inv;

    trace.embedding.assign(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
      double u = b.at(j);
      const double* wrow = w.data.data() + j * d;
      for (std::size_t k = 0; k < d; ++k) u += wrow[k] * trace.pooled[k];
      trace.embedding[j] = std::tanh(u);
    }
  } else {
    if (!external_) {
      throw std::runtime_error(
          "forward: external encoder configured but no client attached");
    }
    auto embs = external_->embed({text});
    if (embs[0].size() != d) {
      throw std::runtime_error("forward: external encoder returned dimension " +
                               std::to_string(embs[0].size()) + ", expected " +
                               std::to_string(d));
    }
    trace.embedding = std::move(embs[0]);
  }

  const auto hidden_dim = static_cast<std::size_t>(config_.head.hidden_dim);
  const Tensor& w1 = params_.get(kW1Name);
  const Tensor& b1 = params_.get(kB1Name);
  const Tensor& w2 = params_.get(kW2Name);
  const Tensor& b2 = params_.get(kB2Name);

  const double p = config_.head.dropout_p;
  const bool use_dropout = mode == RunMode::train && p > 0.0;
  if (use_dropout && dropout_rng == nullptr) {
    throw std::runtime_error(
        "forward: train mode with dropout needs an rng stream");
  }

  trace.hidden.assign(hidden_dim, 0.0);
  if (use_dropout) trace.dropout_mask.assign(hidden_dim, 0.0);

  double logit = b2.at(0);
  for (std::size_t i = 0; i < hidden_dim; ++i) {
    double z = b1.at(i);
    const double* row = w1.data.data() + i * d;
    for (std::size_t j = 0; j < d; ++j) z += row[j] * trace.embedding[j];
    trace.hidden[i] = std::tanh(z);
    double a = trace.hidden[i];
    if (use_dropout) {
      const double mask =
          dropout_rng->uniform() < p ? 0.0 : 1.0 / (1.0 - p);
      trace.dropout_mask[i] = mask;
      a *= mask;
    }
    logit += w2.at(i) * a;
  }
  trace.logit = logit;
  trace.prob = sigmoid(logit);
  return trace;
}

PairOutput DetectorModel::forward_pair(const ContrastiveInstance& inst,
                                       RunMode mode, Rng* dropout_rng,
                                       PairTrace* trace) const {
  BranchTrace anchor = forward_branch(inst.anchor.text, mode, dropout_rng);
  BranchTrace para = forward_branch(inst.paraphrase_text, mode, dropout_rng);

  PairOutput out;
  out.emb_anchor = anchor.embedding;
  out.emb_para = para.embedding;
  out.prob_anchor = anchor.prob;
  out.prob_para = para.prob;
  if (trace) {
    trace->anchor = std::move(anchor);
    trace->para = std::move(para);
  }
  return out;
}

void DetectorModel::backward_branch(const BranchTrace& trace,
                                    std::span<const double> d_emb,
                                    double d_prob, ParamSet& grads) const {
  const auto d = static_cast<std::size_t>(config_.encoder.dim);
  const auto hidden_dim = static_cast<std::size_t>(config_.head.hidden_dim);
  const Tensor& w1 = params_.get(kW1Name);
  const Tensor& w2 = params_.get(kW2Name);
  Tensor& g_w1 = grads.get(kW1Name);
  Tensor& g_b1 = grads.get(kB1Name);
  Tensor& g_w2 = grads.get(kW2Name);
  Tensor& g_b2 = grads.get(kB2Name);

  // d logit: sigmoid'(x) = p (1 - p).
  const double d_logit = d_prob * trace.prob * (1.0 - trace.prob);
  const bool has_mask = !trace.dropout_mask.empty();

  std::vector<double> d_e(trace.embedding.size(), 0.0);
  for (std::size_t j = 0; j < d_e.size(); ++j) d_e[j] = d_emb[j];

  g_b2.at(0) += d_logit;
  for (std::size_t i = 0; i < hidden_dim; ++i) {
    const double mask = has_mask ? trace.dropout_mask[i] : 1.0;
    const double a_dropped = trace.hidden[i] * mask;
    g_w2.at(i) += d_logit * a_dropped;
    const double d_hidden = d_logit * w2.at(i) * mask;
    const double d_z = d_hidden * (1.0 - trace.hidden[i] * trace.hidden[i]);
    g_b1.at(i) += d_z;
    double* g_row = g_w1.data.data() + i * d;
    const double* w_row = w1.data.data() + i * d;
    for (std::size_t j = 0; j < d; ++j) {
      g_row[j] += d_z * trace.embedding[j];
      d_e[j] += w_row[j] * d_z;
    }
  }

  if (config_.encoder.kind != EncoderKind::reference) {
    return;  // external embeddings are inputs, not parameters
  }

  const Tensor& w = params_.get(kProjWName);
  Tensor& g_w = grads.get(kProjWName);
  Tensor& g_b = grads.get(kProjBName);
  Tensor& g_emb = grads.get(kEmbeddingName);

  std::vector<double> d_h(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    const double e_j = trace.embedding[j];
    const double d_u = d_e[j] * (1.0 - e_j * e_j);
    g_b.at(j) += d_u;
    double* g_row = g_w.data.data() + j * d;
    const double* w_row = w.data.data() + j * d;
    for (std::size_t k = 0; k < d; ++k) {
      g_row[k] += d_u * trace.pooled[k];
      d_h[k] += w_row[k] * d_u;
    }
  }

  const double inv = 1.0 / static_cast<double>(trace.tokens.size());
  for (std::uint32_t t : trace.tokens) {
    double* row = g_emb.data.data() + static_cast<std::size_t>(t) * d;
    for (std::size_t k = 0; k < d; ++k) row[k] += d_h[k] * inv;
  }
}

void DetectorModel::backward_pair(const PairTrace& trace,
                                  const PairGrads& upstream,
                                  ParamSet& grads) const {
  backward_branch(trace.anchor, upstream.d_emb_anchor, upstream.d_prob_anchor,
                  grads);
  backward_branch(trace.para, upstream.d_emb_para, upstream.d_prob_para, grads);
}

double DetectorModel::score_text(const std::string& text) const {
  BranchTrace trace = forward_branch(text, RunMode::eval, nullptr);
  return trace.prob;
}

Embedding DetectorModel::encode_text(const std::string& text) const {
  if (config_.encoder.kind == EncoderKind::reference) {
    const auto tokens = tokenize_text(text);
    return encode(tokens);
  }
  if (!external_) {
    throw std::runtime_error(
        "encode_text: external encoder configured but no client attached");
  }
  auto embs = external_->embed({text});
  return std::move(embs[0]);
}

}  // namespace mgtd
