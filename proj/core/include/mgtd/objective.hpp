#pragma once

#include <span>
#include <string>

#include "mgtd/model.hpp"

namespace mgtd {

// Weights of the composite objective. Defaults are the tuned values the
// training recipe ships with.
struct LossWeights {
  double alpha = 0.7;  // contrastive term
  double beta = 0.8;   // classification of the anchor against its gold label
  double gamma = 0.1;  // classification of the paraphrase against the machine label
};

// Two contrastive formulations over the pair cosine c and pair label y:
//
//   signed_cosine:    L = (1 - y) * c + y * max(0, c)
//   standard_cosine:  L = 1 - c            if y = +1
//                     L = max(0, c - m)    if y = -1
//
// signed_cosine is the default. Note that it penalizes positive cosine for
// both y values (its minimum for y = +1 sits at c <= 0), so it separates
// rather than attracts positive pairs; standard_cosine is the conventional
// attract/repel variant and is what the geometry checks run under.
enum class ContrastiveKind { signed_cosine, standard_cosine };

struct ContrastiveMode {
  ContrastiveKind kind = ContrastiveKind::signed_cosine;
  double margin = 0.0;  // standard_cosine only, in [0, 1]
};

std::string to_string(ContrastiveKind kind);
ContrastiveKind contrastive_kind_from_string(const std::string& s);

inline constexpr double kProbClampEpsilon = 1e-7;
inline constexpr double kDegenerateNorm = 1e-12;

// Cosine similarity clamped to [-1, 1]. Throws if either vector has norm
// below kDegenerateNorm.
double cosine(std::span<const double> x1, std::span<const double> x2);

// y must be +1 or -1.
double contrastive_loss(std::span<const double> x1, std::span<const double> x2,
                        int y, const ContrastiveMode& mode);

// Binary cross-entropy with the probability clamped to
// [kProbClampEpsilon, 1 - kProbClampEpsilon] before the logs. gold in {0, 1}.
double classification_loss(double prob, int gold);

struct TotalLoss {
  double total = 0.0;
  double l_con = 0.0;      // contrastive component (unweighted)
  double l_cls_pos = 0.0;  // anchor BCE component (unweighted)
  double l_cls_neg = 0.0;  // paraphrase BCE component (unweighted)
};

// total = alpha * l_con + beta * l_cls_pos + gamma * l_cls_neg, evaluated in
// exactly that order. Exposed separately so weight-linearity is testable
// without a forward pass.
double combine_components(const LossWeights& w, double l_con, double l_cls_pos,
                          double l_cls_neg);

// The composite objective over one pair. The anchor is scored against its
// gold label and the paraphrase against the machine label; swap_cls_targets
// routes (beta, gamma) to (paraphrase, anchor) instead.
TotalLoss total_loss(const PairOutput& out, const ContrastiveInstance& inst,
                     const LossWeights& w, const ContrastiveMode& mode,
                     bool swap_cls_targets = false);

// Same, plus gradients of the total with respect to the four forward
// products (for DetectorModel::backward_pair).
TotalLoss total_loss_with_grads(const PairOutput& out,
                                const ContrastiveInstance& inst,
                                const LossWeights& w,
                                const ContrastiveMode& mode,
                                bool swap_cls_targets, PairGrads& grads);

}  // namespace mgtd
