#pragma once

#include <array>
#include <vector>

#include "enes/datagen.hpp"
#include "enes/graph.hpp"

namespace enes {

inline constexpr int kFeatureDim = 21;

// Per-triplet statistics: for each of the pairs (i,j), (j,k), (i,k) the five
// dependence measures {Pearson of raw values, Pearson of ranks, Pearson of
// absolute values, Pearson of squared values, sign-agreement rate - 0.5},
// then skewness and excess kurtosis for nodes i, j, k. Invariant under joint
// permutation of sample columns. Statistics touching a zero-variance row are 0.
using TripletFeatures = std::array<double, kFeatureDim>;

// Caches per-row transforms of an observation matrix so that per-triplet
// feature extraction reduces to dot products. Rows are standardized once at
// construction.
class TripletFeaturizer {
 public:
  explicit TripletFeaturizer(const ObservationMatrix& obs);

  TripletFeatures features(int i, int j, int k) const;
  TripletFeatures features(const TripletIndex& t) const { return features(t.i, t.j, t.k); }

  double raw_correlation(int a, int b) const;
  int d() const { return d_; }

 private:
  struct RowStats {
    // Normalized transforms (zero mean, unit variance) or all-zero when the
    // transform is degenerate.
    std::vector<double> raw, rank, abs, sq;
    std::vector<double> sign;  // +1 / -1
    bool degenerate = false;
    double skewness = 0.0;
    double kurtosis = 0.0;
  };
  double pair_stat(const std::vector<double>& a, const std::vector<double>& b) const;
  void pair_features(int a, int b, double* out) const;

  int d_ = 0;
  int T_ = 0;
  std::vector<RowStats> rows_;
};

// Features of a standalone 3 x T block (rows i, j, k). Throws when T < 8.
TripletFeatures featurize(const std::vector<double>& block, int T);

}  // namespace enes
