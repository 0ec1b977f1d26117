#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "enes/graph.hpp"

namespace enes {

// d variables by T samples, rows are variables.
class ObservationMatrix {
 public:
  ObservationMatrix() = default;
  ObservationMatrix(int d, int T) : d_(d), T_(T), data_(static_cast<size_t>(d) * T, 0.0) {}

  int d() const { return d_; }
  int T() const { return T_; }
  double& at(int var, int t) { return data_[static_cast<size_t>(var) * T_ + t]; }
  double at(int var, int t) const { return data_[static_cast<size_t>(var) * T_ + t]; }
  const double* row(int var) const { return data_.data() + static_cast<size_t>(var) * T_; }
  double* row(int var) { return data_.data() + static_cast<size_t>(var) * T_; }

  const std::vector<std::string>& names() const { return names_; }
  void set_names(std::vector<std::string> names);

  // Per-row z-scoring; rows with (near) zero variance map to all-zeros.
  void standardize_rows();
  bool all_finite() const;

  bool operator==(const ObservationMatrix& o) const {
    return d_ == o.d_ && T_ == o.T_ && data_ == o.data_;
  }

 private:
  int d_ = 0;
  int T_ = 0;
  std::vector<double> data_;
  std::vector<std::string> names_;
};

enum class SemKind { Linear, Nonlinear };

struct SemConfig {
  SemKind kind = SemKind::Linear;
  // Edge coefficient magnitude range; sign is random. Kept away from zero so
  // edges stay detectable.
  double weight_min = 0.5;
  double weight_max = 2.0;
  double noise_std = 1.0;
};

struct MmConfig {
  double v_max = 1.0;
  double k_m = 1.0;
  double decay = 0.5;
  double dt = 0.05;
  int burn_in = 200;
  double noise_std = 0.05;
  // Nodes held at a fixed value every step (steady-state probes in tests).
  std::vector<std::pair<int, double>> clamp;
};

// Ancestral sampling along a topological order. Linear: x_j = sum w*x_i + e.
// Nonlinear: x_j = f_j(sum w*g_i(x_i)) + e with f,g drawn per node from
// {tanh, sine, square}.
ObservationMatrix sample_sem(const DirectedGraph& g, const SemConfig& cfg, int T, uint64_t seed);

// Euler-Maruyama integration of saturating production minus linear decay,
// dx_j = (sum_i v*x_i/(k+x_i) - decay*x_j) dt + noise dW, clipped at zero.
// Returns T post-burn-in states, one column per step.
ObservationMatrix simulate_mm(const DirectedGraph& g, const MmConfig& cfg, int T, uint64_t seed);

double mm_production(double x, double v_max, double k_m);

struct TripletSample {
  int source = 0;  // index into the (graph, observations) input list
  int i = 0, j = 0, k = 0;
  int label = 0;  // motif class 0..8
  std::vector<double> block;  // 3 x T, rows i, j, k (standardized)
  int T = 0;
  double r_ij = 0.0, r_jk = 0.0, r_ik = 0.0;
};

struct TripletDataset {
  std::string provenance;  // sem-linear | sem-nonlinear | mm | external | mixed
  std::vector<TripletSample> samples;
  std::array<size_t, 9> class_counts() const;
};

struct DatasetConfig {
  // Class 0 cap; nullopt applies 2x the median count of classes 1..8
  // (left uncapped when that median is zero).
  std::optional<size_t> class0_cap;
  bool mirror_augment = true;
  // Per-graph triplet subsample cap before labeling; nullopt = full enumeration.
  std::optional<size_t> triplet_cap;
};

TripletDataset build_triplet_dataset(
    const std::vector<std::pair<const DirectedGraph*, const ObservationMatrix*>>& inputs,
    const DatasetConfig& cfg, uint64_t seed, std::string provenance = "mixed");

// Columns are variables, rows are samples; transposed into d x T.
// Parse failures report row and column positions.
ObservationMatrix load_observations_csv(const std::string& path, char delimiter = ',',
                                        bool has_header = true);

void save_observations_csv(const std::string& path, const ObservationMatrix& obs);

// Binary dataset cache with a format-version byte.
void save_dataset(const std::string& path, const TripletDataset& ds);
TripletDataset load_dataset(const std::string& path);

}  // namespace enes
