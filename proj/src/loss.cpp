#include "enes/loss.hpp"

#include <cmath>
#include <stdexcept>

#include "enes/errors.hpp"

namespace enes {

namespace {
constexpr double kCosEps = 1e-12;

double masked_sum(const std::array<double, kNumClasses>& probs,
                  const std::array<double, kNumClasses>& mask) {
  double s = 0.0;
  for (int c = 0; c < kNumClasses; ++c) s += mask[c] * probs[c];
  return s;
}

Tensor mask_column(const std::array<double, kNumClasses>& mask) {
  Tensor t(kNumClasses, 1);
  for (int c = 0; c < kNumClasses; ++c) t.at(c, 0) = mask[c];
  return t;
}
}  // namespace

double cross_entropy(const std::array<double, kNumClasses>& probs, int label) {
  if (label < 0 || label >= kNumClasses) throw std::out_of_range("cross_entropy: bad label");
  return -std::log(std::max(probs[label], kLogClamp));
}

double pearson_penalty(const TripletPrediction& pred, double r_ij, double r_jk) {
  const double p1 = masked_sum(pred.probs, class_mask_slot1_any());
  const double p2 = masked_sum(pred.probs, class_mask_slot2_any());
  return p1 * (1.0 - std::fabs(r_ij)) + p2 * (1.0 - std::fabs(r_jk));
}

double adjacency_penalty(const TripletPrediction& pred) {
  const double p_ij = masked_sum(pred.probs, class_mask_i_to_j());
  const double p_ji = masked_sum(pred.probs, class_mask_j_to_i());
  const double p_jk = masked_sum(pred.probs, class_mask_j_to_k());
  const double p_kj = masked_sum(pred.probs, class_mask_k_to_j());
  return 2.0 * (p_ij * p_ji + p_jk * p_kj);
}

double cosine_penalty(const TripletPrediction& pred, double sign) {
  double num = 0.0, na = 0.0, nb = 0.0;
  for (int c = 0; c < kNumClasses; ++c) {
    num += pred.expert_a[c] * pred.expert_b[c];
    na += pred.expert_a[c] * pred.expert_a[c];
    nb += pred.expert_b[c] * pred.expert_b[c];
  }
  return sign * num / (std::sqrt(na) * std::sqrt(nb) + kCosEps);
}

LossBreakdown fused_loss(std::span<const LossExample> batch, const PenaltyWeights& w) {
  if (batch.empty()) throw std::invalid_argument("fused_loss: empty batch");
  LossBreakdown out;
  out.weights = w;
  for (const LossExample& e : batch) {
    out.ce += cross_entropy(e.pred.probs, e.label);
    out.pearson_pen += pearson_penalty(e.pred, e.r_ij, e.r_jk);
    out.adjacency_pen += adjacency_penalty(e.pred);
    out.cosine_pen += cosine_penalty(e.pred, w.cosine_sign);
  }
  const double n = static_cast<double>(batch.size());
  out.ce /= n;
  out.pearson_pen /= n;
  out.adjacency_pen /= n;
  out.cosine_pen /= n;
  out.total = out.ce + w.a * out.pearson_pen + w.b * out.adjacency_pen + w.c * out.cosine_pen;
  return out;
}

LossBatch make_loss_batch(std::span<const int> labels, std::span<const double> r_ij,
                          std::span<const double> r_jk) {
  if (labels.empty() || labels.size() != r_ij.size() || labels.size() != r_jk.size())
    throw std::invalid_argument("make_loss_batch: inconsistent batch arrays");
  const int B = static_cast<int>(labels.size());
  LossBatch lb;
  lb.onehot = Tensor(B, kNumClasses);
  lb.coef_ij = Tensor(B, 1);
  lb.coef_jk = Tensor(B, 1);
  lb.labels.assign(labels.begin(), labels.end());
  for (int r = 0; r < B; ++r) {
    if (labels[r] < 0 || labels[r] >= kNumClasses)
      throw std::invalid_argument("make_loss_batch: bad label");
    lb.onehot.at(r, labels[r]) = 1.0;
    lb.coef_ij.at(r, 0) = 1.0 - std::fabs(r_ij[r]);
    lb.coef_jk.at(r, 0) = 1.0 - std::fabs(r_jk[r]);
  }
  return lb;
}

LossBreakdown TapeLoss::breakdown(const Tape& tape, const PenaltyWeights& w) const {
  LossBreakdown out;
  out.weights = w;
  out.total = tape.value(total).at(0, 0);
  out.ce = tape.value(ce).at(0, 0);
  out.pearson_pen = tape.value(pearson).at(0, 0);
  out.adjacency_pen = tape.value(adjacency).at(0, 0);
  out.cosine_pen = tape.value(cosine).at(0, 0);
  return out;
}

TapeLoss build_fused_loss(Tape& tape, const TapeForward& fwd, const LossBatch& batch,
                          const PenaltyWeights& w) {
  const int B = batch.onehot.rows();
  if (tape.value(fwd.probs).rows() != B)
    throw std::invalid_argument("build_fused_loss: batch size mismatch");
  const double inv_b = 1.0 / static_cast<double>(B);

  TapeLoss tl;
  // Cross entropy: mean over rows of -log prob at the labeled class.
  const int onehot = tape.leaf(batch.onehot);
  tl.ce = tape.scalar_mul(tape.sum_op(tape.hadamard(onehot, tape.log_op(fwd.probs))), -inv_b);

  // Pearson faithfulness: P(slot edge) * (1 - |r|), both slots.
  const int m_any1 = tape.leaf(mask_column(class_mask_slot1_any()));
  const int m_any2 = tape.leaf(mask_column(class_mask_slot2_any()));
  const int coef_ij = tape.leaf(batch.coef_ij);
  const int coef_jk = tape.leaf(batch.coef_jk);
  const int term1 = tape.hadamard(tape.matmul(fwd.probs, m_any1), coef_ij);
  const int term2 = tape.hadamard(tape.matmul(fwd.probs, m_any2), coef_jk);
  tl.pearson = tape.scalar_mul(tape.sum_op(tape.add(term1, term2)), inv_b);

  // Adjacency constraint: soft two-cycle count of the triplet adjacency.
  const int p_ij = tape.matmul(fwd.probs, tape.leaf(mask_column(class_mask_i_to_j())));
  const int p_ji = tape.matmul(fwd.probs, tape.leaf(mask_column(class_mask_j_to_i())));
  const int p_jk = tape.matmul(fwd.probs, tape.leaf(mask_column(class_mask_j_to_k())));
  const int p_kj = tape.matmul(fwd.probs, tape.leaf(mask_column(class_mask_k_to_j())));
  const int two_cycles = tape.add(tape.hadamard(p_ij, p_ji), tape.hadamard(p_jk, p_kj));
  tl.adjacency = tape.scalar_mul(tape.sum_op(two_cycles), 2.0 * inv_b);

  // Expert similarity: per-row cosine between expert logit vectors.
  const int num = tape.rowdot(fwd.expert_a, fwd.expert_b);
  const int eps = tape.leaf(Tensor(B, 1, kCosEps));
  const int den =
      tape.add(tape.hadamard(tape.rownorm(fwd.expert_a), tape.rownorm(fwd.expert_b)), eps);
  tl.cosine = tape.scalar_mul(tape.sum_op(tape.div_op(num, den)), w.cosine_sign * inv_b);

  tl.total = tape.add(
      tape.add(tape.add(tl.ce, tape.scalar_mul(tl.pearson, w.a)), tape.scalar_mul(tl.adjacency, w.b)),
      tape.scalar_mul(tl.cosine, w.c));
  return tl;
}

}  // namespace enes
