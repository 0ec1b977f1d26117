#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace enes {

// Binary directed graph over d nodes; adj[i*d+j] = 1 iff edge i -> j.
// Diagonal is always zero.
class DirectedGraph {
 public:
  DirectedGraph() = default;
  explicit DirectedGraph(int d) : d_(d), adj_(static_cast<size_t>(d) * d, 0) {}

  int d() const { return d_; }
  bool edge(int a, int b) const { return adj_[static_cast<size_t>(a) * d_ + b] != 0; }
  void set_edge(int a, int b, bool present);
  int edge_count() const;
  std::vector<std::pair<int, int>> edges() const;

  // Kahn's algorithm; true when a topological order consumes every node.
  bool is_acyclic() const;
  // Topological order (smallest index first among ready nodes). Throws
  // DataError on a cyclic graph.
  std::vector<int> topological_order() const;

  const std::vector<std::string>& names() const { return names_; }
  void set_names(std::vector<std::string> names);

  static DirectedGraph from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  static DirectedGraph load(const std::string& path);
  void save(const std::string& path) const;

  bool operator==(const DirectedGraph& o) const { return d_ == o.d_ && adj_ == o.adj_; }

 private:
  int d_ = 0;
  std::vector<uint8_t> adj_;
  std::vector<std::string> names_;
};

// Ordered edge-node-edge probe (i, j, k) with center j. Enumeration produces
// the canonical form i < k; ordered() admits any distinct triple (mirrored
// training samples reverse the outer pair).
struct TripletIndex {
  int i = 0, j = 0, k = 0;

  static TripletIndex canonical(int i, int j, int k, int d);
  static TripletIndex ordered(int i, int j, int k, int d);
};

// Relation of an ordered node pair: 0 none, 1 a->b, 2 b->a.
// A 2-cycle (both directions present) maps to 0; no single direction holds.
int pair_relation(const DirectedGraph& g, int a, int b);

// Motif class of a triplet: 3*r(i,j) + r(j,k), in 0..8. The direct i-k edge
// never affects the label.
int motif_label(const DirectedGraph& g, const TripletIndex& t);

inline int motif_encode(int r_ij, int r_jk) { return 3 * r_ij + r_jk; }
inline std::pair<int, int> motif_decode(int cls) { return {cls / 3, cls % 3}; }
// Class of the mirrored triplet (k, j, i).
int motif_mirror(int cls);

// Per-class membership masks used by both the loss penalties and vote
// accumulation. slot 1 is the (i,j) pair, slot 2 the (j,k) pair.
std::array<double, 9> class_mask_slot1_any();   // r(i,j) != 0
std::array<double, 9> class_mask_slot2_any();   // r(j,k) != 0
std::array<double, 9> class_mask_i_to_j();
std::array<double, 9> class_mask_j_to_i();
std::array<double, 9> class_mask_j_to_k();
std::array<double, 9> class_mask_k_to_j();

// Uniformly random topological order, then each forward edge kept with
// probability edge_prob. Always acyclic.
DirectedGraph sample_random_dag(int d, double edge_prob, uint64_t seed);

// All canonical triplets (i < k, any third center j), or a uniform random
// subsample of max_count of them. Throws when d < 3.
std::vector<TripletIndex> enumerate_triplets(int d, std::optional<size_t> max_count,
                                             uint64_t seed);
size_t triplet_count(int d);

// Accumulates per-direction soft evidence from triplet class probabilities.
// Single-writer per board.
class VoteBoard {
 public:
  explicit VoteBoard(int d)
      : d_(d), evidence_(static_cast<size_t>(d) * d, 0.0), counts_(static_cast<size_t>(d) * d, 0.0) {}

  int d() const { return d_; }
  void add(const TripletIndex& t, const std::array<double, 9>& probs);
  double evidence(int a, int b) const { return evidence_[static_cast<size_t>(a) * d_ + b]; }
  double count(int a, int b) const { return counts_[static_cast<size_t>(a) * d_ + b]; }
  // Mean evidence; 0 when the pair was never voted on.
  double mean(int a, int b) const;

 private:
  int d_;
  std::vector<double> evidence_;
  std::vector<double> counts_;
};

// Edge a->b emitted iff mean(a,b) > threshold and mean(a,b) > mean(b,a);
// ties go to no edge.
DirectedGraph aggregate_votes(const VoteBoard& board, double threshold);

}  // namespace enes
