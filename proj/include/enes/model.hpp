#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "enes/features.hpp"
#include "enes/graph.hpp"
#include "enes/tape.hpp"
#include "enes/tensor.hpp"

namespace enes {

inline constexpr int kNumClasses = 9;

// All learnable weights plus the fixed penalty weights. The architecture is
// a shared 21->64->64 tanh encoder feeding a nonlinear expert (64->32->9),
// a linear expert (64->9) and a sigmoid gate (64->1).
struct EnesParams {
  static constexpr int kInput = kFeatureDim;
  static constexpr int kHidden = 64;
  static constexpr int kExpertHidden = 32;

  Tensor enc_w1, enc_b1;   // 21->64
  Tensor enc_w2, enc_b2;   // 64->64
  Tensor ea_w1, ea_b1;     // 64->32
  Tensor ea_w2, ea_b2;     // 32->9
  Tensor eb_w, eb_b;       // 64->9
  Tensor gate_w, gate_b;   // 64->1

  // Penalty weights; fixed (non-learnable), strictly positive by default.
  double pen_a = 1.0, pen_b = 1.0, pen_c = 1.0;
  // Sign applied to the expert-similarity penalty (+1 pushes experts apart).
  double cosine_sign = 1.0;
  uint64_t train_seed = 0;

  std::vector<Tensor*> blocks();
  std::vector<const Tensor*> blocks() const;
  static const std::vector<std::string>& block_names();
  size_t parameter_count() const;
};

// Glorot-uniform weights, zero biases.
EnesParams init_params(uint64_t seed);

struct TripletPrediction {
  std::array<double, kNumClasses> probs{};
  double gate_w = 0.0;
  std::array<double, kNumClasses> expert_a{};  // logits
  std::array<double, kNumClasses> expert_b{};  // logits
  // Ties break toward the lowest class index.
  int argmax() const;
};

TripletPrediction forward(const EnesParams& params, const TripletFeatures& feats);

// Node ids of one batched forward pass on a tape. Parameter leaves appear in
// blocks() order.
struct TapeForward {
  std::vector<int> param_ids;
  int features = -1;
  int embedding = -1;
  int expert_a = -1;
  int expert_b = -1;
  int gate = -1;
  int fused = -1;
  int probs = -1;
};

// feats is (batch x 21). Matches forward() row for row.
TapeForward build_forward(Tape& tape, const EnesParams& params, const Tensor& feats);

// Runs every (sub)sampled triplet through the model, converts class
// probabilities to directed-edge evidence, and aggregates the vote board.
DirectedGraph predict_graph(const EnesParams& params, const ObservationMatrix& obs,
                            std::optional<size_t> triplet_cap, double threshold, uint64_t seed);

// Versioned binary parameter file; round trips bit-exactly.
void save_params(const EnesParams& params, const std::string& path);
EnesParams load_params(const std::string& path);

}  // namespace enes
