#pragma once

#include <span>
#include <vector>

#include "enes/model.hpp"
#include "enes/tape.hpp"

namespace enes {

struct PenaltyWeights {
  double a = 1.0;  // Pearson faithfulness
  double b = 1.0;  // adjacency two-cycle constraint
  double c = 1.0;  // expert similarity
  double cosine_sign = 1.0;
};

struct LossBreakdown {
  double total = 0.0;
  double ce = 0.0;
  double pearson_pen = 0.0;
  double adjacency_pen = 0.0;
  double cosine_pen = 0.0;
  PenaltyWeights weights;
};

// -log(probs[label]) with probabilities clamped at 1e-12.
double cross_entropy(const std::array<double, kNumClasses>& probs, int label);

// P(edge in slot) * (1 - |r|) summed over the two center-touching slots.
double pearson_penalty(const TripletPrediction& pred, double r_ij, double r_jk);

// trace(W^2) of the soft 3x3 triplet adjacency: the soft 2-cycle count,
// 2*(P(i->j)P(j->i) + P(j->k)P(k->j)). Non-negative; zero whenever each
// slot's mass sits on a single direction or none.
double adjacency_penalty(const TripletPrediction& pred);

// cos(angle between expert logit vectors); zero-vector convention gives 0.
// sign > 0 makes minimization push the experts apart.
double cosine_penalty(const TripletPrediction& pred, double sign = 1.0);

struct LossExample {
  TripletPrediction pred;
  int label = 0;
  double r_ij = 0.0;
  double r_jk = 0.0;
};

// Batch means of every component; total recomposes exactly as
// ce + a*pearson + b*adjacency + c*cosine.
LossBreakdown fused_loss(std::span<const LossExample> batch, const PenaltyWeights& w);

// Per-batch constants consumed by the tape loss.
struct LossBatch {
  Tensor onehot;     // B x 9
  Tensor coef_ij;    // B x 1, entries 1 - |r_ij|
  Tensor coef_jk;    // B x 1
  std::vector<int> labels;
};

LossBatch make_loss_batch(std::span<const int> labels, std::span<const double> r_ij,
                          std::span<const double> r_jk);

struct TapeLoss {
  int total = -1;
  int ce = -1;
  int pearson = -1;
  int adjacency = -1;
  int cosine = -1;
  LossBreakdown breakdown(const Tape& tape, const PenaltyWeights& w) const;
};

// Builds the fused objective on the tape over a batched forward pass.
TapeLoss build_fused_loss(Tape& tape, const TapeForward& fwd, const LossBatch& batch,
                          const PenaltyWeights& w);

}  // namespace enes
