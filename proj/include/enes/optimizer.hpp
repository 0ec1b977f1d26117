#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "enes/datagen.hpp"
#include "enes/loss.hpp"
#include "enes/model.hpp"
#include "enes/rng.hpp"

namespace enes {

// Geometric cooling: temperature(e) = max(t0 * alpha^e, floor).
struct AnnealSchedule {
  double t0 = 1e-2;
  double alpha = 0.95;
  double floor = 1e-6;
};

double temperature_at(const AnnealSchedule& schedule, int epoch);

struct TrainConfig {
  double lr = 1e-3;
  int epochs = 200;
  int batch_size = 64;
  uint64_t seed = 0;
  double grad_clip = 5.0;  // max global L2 norm
  AnnealSchedule anneal;
  PenaltyWeights weights;
  // Checkpoint every N epochs to checkpoint_path (0 disables).
  int checkpoint_every = 0;
  std::string checkpoint_path;
};

// One SGLD update: clip gradients to the global norm bound, then
// theta <- theta - lr*g + sqrt(2*lr*temperature)*xi. At temperature zero the
// noise term is skipped entirely, giving a plain SGD step. Throws
// NumericError naming the offending block on non-finite gradients.
void langevin_step(std::vector<Tensor*> params, const std::vector<Tensor>& grads,
                   const std::vector<std::string>& block_names, double lr, double temperature,
                   double grad_clip, Rng& rng);

struct TrainLogRow {
  int epoch = 0;
  LossBreakdown loss;
  double temperature = 0.0;
};

struct TrainLog {
  std::vector<TrainLogRow> rows;
  void save_csv(const std::string& path) const;
};

struct TrainResult {
  EnesParams params;
  TrainLog log;
  std::vector<TripletFeatures> features;  // per dataset sample, reusable for eval
};

// Minibatch SGLD over the fused objective with per-epoch reshuffling.
// Features are precomputed from the dataset blocks before the first epoch.
TrainResult train(EnesParams params, const TripletDataset& dataset, const TrainConfig& cfg);

// Fraction of dataset samples whose predicted class matches the label.
double classification_accuracy(const EnesParams& params,
                               const std::vector<TripletFeatures>& features,
                               const TripletDataset& dataset);

}  // namespace enes
