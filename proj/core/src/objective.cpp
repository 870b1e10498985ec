#include "mgtd/objective.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mgtd {

std::string to_string(ContrastiveKind kind) {
  switch (kind) {
    case ContrastiveKind::signed_cosine:
      return "signed-cosine";
    case ContrastiveKind::standard_cosine:
      return "standard-cosine";
  }
  throw std::runtime_error("unknown contrastive kind");
}

ContrastiveKind contrastive_kind_from_string(const std::string& s) {
  if (s == "signed-cosine") return ContrastiveKind::signed_cosine;
  if (s == "standard-cosine") return ContrastiveKind::standard_cosine;
  throw std::runtime_error("unknown contrastive mode \"" + s +
                           "\" (expected signed-cosine or standard-cosine)");
}

namespace {

double clamp_prob(double p) {
  return std::clamp(p, kProbClampEpsilon, 1.0 - kProbClampEpsilon);
}

struct CosineParts {
  double value = 0.0;  // clamped cosine
  double n1 = 0.0;
  double n2 = 0.0;
  double raw = 0.0;
};

CosineParts cosine_parts(std::span<const double> x1, std::span<const double> x2) {
  if (x1.size() != x2.size()) {
    throw std::runtime_error("cosine: dimension mismatch (" +
                             std::to_string(x1.size()) + " vs " +
                             std::to_string(x2.size()) + ")");
  }
  double dot = 0.0, s1 = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < x1.size(); ++i) {
    dot += x1[i] * x2[i];
    s1 += x1[i] * x1[i];
    s2 += x2[i] * x2[i];
  }
  CosineParts parts;
  parts.n1 = std::sqrt(s1);
  parts.n2 = std::sqrt(s2);
  if (parts.n1 < kDegenerateNorm || parts.n2 < kDegenerateNorm) {
    throw std::runtime_error(
        "cosine: degenerate embedding (norm below 1e-12)");
  }
  parts.raw = dot / (parts.n1 * parts.n2);
  parts.value = std::clamp(parts.raw, -1.0, 1.0);
  return parts;
}

void check_pair_label(int y) {
  if (y != +1 && y != -1) {
    throw std::runtime_error("contrastive_loss: pair label must be +1 or -1, got " +
                             std::to_string(y));
  }
}

double contrastive_from_cosine(double c, int y, const ContrastiveMode& mode) {
  if (mode.kind == ContrastiveKind::signed_cosine) {
    return (1.0 - y) * c + y * std::max(0.0, c);
  }
  return y == +1 ? 1.0 - c : std::max(0.0, c - mode.margin);
}

// dL/dc for either formulation (subgradient 0 at the hinge point).
double contrastive_dcos(double c, int y, const ContrastiveMode& mode) {
  if (mode.kind == ContrastiveKind::signed_cosine) {
    return (1.0 - y) + y * (c > 0.0 ? 1.0 : 0.0);
  }
  return y == +1 ? -1.0 : (c - mode.margin > 0.0 ? 1.0 : 0.0);
}

double bce_dprob(double prob, int gold) {
  if (prob < kProbClampEpsilon || prob > 1.0 - kProbClampEpsilon) {
    return 0.0;  // inside the clamp: flat
  }
  const double p = clamp_prob(prob);
  return gold == 1 ? -1.0 / p : 1.0 / (1.0 - p);
}

}  // namespace

double cosine(std::span<const double> x1, std::span<const double> x2) {
  return cosine_parts(x1, x2).value;
}

double contrastive_loss(std::span<const double> x1, std::span<const double> x2,
                        int y, const ContrastiveMode& mode) {
  check_pair_label(y);
  return contrastive_from_cosine(cosine(x1, x2), y, mode);
}

double classification_loss(double prob, int gold) {
  if (gold != 0 && gold != 1) {
    throw std::runtime_error("classification_loss: gold must be 0 or 1, got " +
                             std::to_string(gold));
  }
  const double p = clamp_prob(prob);
  return -(gold * std::log(p) + (1 - gold) * std::log(1.0 - p));
}

double combine_components(const LossWeights& w, double l_con, double l_cls_pos,
                          double l_cls_neg) {
  return w.alpha * l_con + w.beta * l_cls_pos + w.gamma * l_cls_neg;
}

TotalLoss total_loss(const PairOutput& out, const ContrastiveInstance& inst,
                     const LossWeights& w, const ContrastiveMode& mode,
                     bool swap_cls_targets) {
  PairGrads unused;
  return total_loss_with_grads(out, inst, w, mode, swap_cls_targets, unused);
}

TotalLoss total_loss_with_grads(const PairOutput& out,
                                const ContrastiveInstance& inst,
                                const LossWeights& w,
                                const ContrastiveMode& mode,
                                bool swap_cls_targets, PairGrads& grads) {
  check_pair_label(inst.pair_label);
  if (!inst.anchor.label) {
    throw std::runtime_error("total_loss: anchor document \"" + inst.anchor.id +
                             "\" has no gold label");
  }
  const int y = inst.pair_label;
  const int anchor_gold = label_code(*inst.anchor.label);
  // Paraphrases are machine-produced regardless of the anchor's origin.
  const int para_gold = kMachineLabelCode;

  const CosineParts cos = cosine_parts(out.emb_anchor, out.emb_para);

  TotalLoss loss;
  loss.l_con = contrastive_from_cosine(cos.value, y, mode);
  const double bce_anchor = classification_loss(out.prob_anchor, anchor_gold);
  const double bce_para = classification_loss(out.prob_para, para_gold);
  if (swap_cls_targets) {
    loss.l_cls_pos = bce_para;
    loss.l_cls_neg = bce_anchor;
  } else {
    loss.l_cls_pos = bce_anchor;
    loss.l_cls_neg = bce_para;
  }
  loss.total = combine_components(w, loss.l_con, loss.l_cls_pos, loss.l_cls_neg);

  // Gradients.
  const double d_cos = w.alpha * contrastive_dcos(cos.value, y, mode);
  const std::size_t dim = out.emb_anchor.size();
  grads.d_emb_anchor.assign(dim, 0.0);
  grads.d_emb_para.assign(dim, 0.0);
  const double inv_norms = 1.0 / (cos.n1 * cos.n2);
  const double inv_n1sq = 1.0 / (cos.n1 * cos.n1);
  const double inv_n2sq = 1.0 / (cos.n2 * cos.n2);
  for (std::size_t i = 0; i < dim; ++i) {
    grads.d_emb_anchor[i] =
        d_cos * (out.emb_para[i] * inv_norms - cos.raw * out.emb_anchor[i] * inv_n1sq);
    grads.d_emb_para[i] =
        d_cos * (out.emb_anchor[i] * inv_norms - cos.raw * out.emb_para[i] * inv_n2sq);
  }

  const double w_anchor = swap_cls_targets ? w.gamma : w.beta;
  const double w_para = swap_cls_targets ? w.beta : w.gamma;
  grads.d_prob_anchor = w_anchor * bce_dprob(out.prob_anchor, anchor_gold);
  grads.d_prob_para = w_para * bce_dprob(out.prob_para, para_gold);

  return loss;
}

}  // namespace mgtd
