#pragma once

#include <set>
#include <vector>

#include "enes/datagen.hpp"
#include "enes/graph.hpp"

namespace enes {

// All pairs with |r| above the threshold, expanded into both directions
// (the baseline makes an undirected claim).
DirectedGraph pearson_baseline(const ObservationMatrix& obs, double threshold = 0.3);

struct CiTestResult {
  int a = 0, b = 0;
  std::set<int> conditioning;
  double partial_corr = 0.0;
  double z = 0.0;           // 0.5 * ln((1+r)/(1-r))
  double statistic = 0.0;   // sqrt(n - |S| - 3) * |z|
  bool independent = false;
  bool singular = false;    // degenerate submatrix, treated as dependent
};

struct PcConfig {
  double alpha = 0.05;
  int max_cond_size = 3;
  bool orient_rules = true;  // v-structures + Meek R1-R3
};

// Gaussian conditional-independence test on the partial correlation of
// (a, b) given S, via inversion of the correlation submatrix.
CiTestResult fisher_z_test(const ObservationMatrix& obs, int a, int b, const std::set<int>& S,
                           double alpha);

// Standard-normal quantile, accurate to ~1e-14 (rational seed plus Newton).
double normal_quantile(double p);

// Level-synchronous skeleton search, v-structure orientation, Meek closure,
// then expansion of the remaining undirected edges into both directions.
DirectedGraph pc_algorithm(const ObservationMatrix& obs, const PcConfig& cfg);

}  // namespace enes
