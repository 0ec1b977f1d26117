#include "enes/graph.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <queue>
#include <stdexcept>

#include "enes/errors.hpp"
#include "enes/io.hpp"
#include "enes/rng.hpp"

namespace enes {

void DirectedGraph::set_edge(int a, int b, bool present) {
  if (a < 0 || b < 0 || a >= d_ || b >= d_) throw std::out_of_range("set_edge: index out of range");
  if (a == b) throw std::invalid_argument("set_edge: self-loops are not allowed");
  adj_[static_cast<size_t>(a) * d_ + b] = present ? 1 : 0;
}

int DirectedGraph::edge_count() const {
  return static_cast<int>(std::accumulate(adj_.begin(), adj_.end(), 0));
}

std::vector<std::pair<int, int>> DirectedGraph::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int a = 0; a < d_; ++a)
    for (int b = 0; b < d_; ++b)
      if (edge(a, b)) out.emplace_back(a, b);
  return out;
}

bool DirectedGraph::is_acyclic() const {
  std::vector<int> indeg(d_, 0);
  for (int a = 0; a < d_; ++a)
    for (int b = 0; b < d_; ++b)
      if (edge(a, b)) ++indeg[b];
  std::queue<int> ready;
  for (int v = 0; v < d_; ++v)
    if (indeg[v] == 0) ready.push(v);
  int consumed = 0;
  while (!ready.empty()) {
    int v = ready.front();
    ready.pop();
    ++consumed;
    for (int b = 0; b < d_; ++b)
      if (edge(v, b) && --indeg[b] == 0) ready.push(b);
  }
  return consumed == d_;
}

std::vector<int> DirectedGraph::topological_order() const {
  std::vector<int> indeg(d_, 0);
  for (int a = 0; a < d_; ++a)
    for (int b = 0; b < d_; ++b)
      if (edge(a, b)) ++indeg[b];
  std::vector<int> order;
  order.reserve(d_);
  std::vector<bool> done(d_, false);
  for (int step = 0; step < d_; ++step) {
    int pick = -1;
    for (int v = 0; v < d_; ++v)
      if (!done[v] && indeg[v] == 0) {
        pick = v;
        break;
      }
    if (pick < 0) throw DataError("topological_order: graph contains a cycle");
    done[pick] = true;
    order.push_back(pick);
    for (int b = 0; b < d_; ++b)
      if (edge(pick, b)) --indeg[b];
  }
  return order;
}

void DirectedGraph::set_names(std::vector<std::string> names) {
  if (!names.empty() && static_cast<int>(names.size()) != d_)
    throw std::invalid_argument("set_names: expected " + std::to_string(d_) + " names");
  names_ = std::move(names);
}

DirectedGraph DirectedGraph::from_json(const nlohmann::json& j) {
  if (!j.contains("d") || !j["d"].is_number_integer())
    throw DataError("graph json: missing integer field 'd'");
  const int d = j["d"].get<int>();
  if (d < 1) throw DataError("graph json: d must be >= 1");
  DirectedGraph g(d);
  if (j.contains("names") && !j["names"].is_null()) {
    auto names = j["names"].get<std::vector<std::string>>();
    if (!names.empty()) g.set_names(std::move(names));
  }
  if (j.contains("edges")) {
    for (const auto& e : j["edges"]) {
      if (!e.is_array() || e.size() != 2) throw DataError("graph json: edge entries must be [src,dst]");
      const int a = e[0].get<int>(), b = e[1].get<int>();
      if (a < 0 || b < 0 || a >= d || b >= d)
        throw DataError("graph json: edge index out of range");
      if (a == b) throw DataError("graph json: self-loop rejected");
      g.set_edge(a, b, true);
    }
  }
  return g;
}

nlohmann::json DirectedGraph::to_json() const {
  nlohmann::json j;
  j["d"] = d_;
  if (!names_.empty()) j["names"] = names_;
  nlohmann::json es = nlohmann::json::array();
  for (const auto& [a, b] : edges()) es.push_back({a, b});
  j["edges"] = std::move(es);
  return j;
}

DirectedGraph DirectedGraph::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open graph file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("bad graph json in " + path + ": " + e.what());
  }
  return from_json(j);
}

void DirectedGraph::save(const std::string& path) const {
  atomic_write(path, to_json().dump(2) + "\n");
}

namespace {
void check_triplet(int i, int j, int k, int d) {
  if (i < 0 || j < 0 || k < 0 || i >= d || j >= d || k >= d)
    throw std::out_of_range("triplet index out of range");
  if (i == j || j == k || i == k) throw std::invalid_argument("triplet indices must be distinct");
}
}  // namespace

TripletIndex TripletIndex::canonical(int i, int j, int k, int d) {
  check_triplet(i, j, k, d);
  if (i > k) std::swap(i, k);
  return TripletIndex{i, j, k};
}

TripletIndex TripletIndex::ordered(int i, int j, int k, int d) {
  check_triplet(i, j, k, d);
  return TripletIndex{i, j, k};
}

int pair_relation(const DirectedGraph& g, int a, int b) {
  const bool fwd = g.edge(a, b);
  const bool rev = g.edge(b, a);
  if (fwd && !rev) return 1;
  if (rev && !fwd) return 2;
  return 0;
}

int motif_label(const DirectedGraph& g, const TripletIndex& t) {
  check_triplet(t.i, t.j, t.k, g.d());
  return motif_encode(pair_relation(g, t.i, t.j), pair_relation(g, t.j, t.k));
}

int motif_mirror(int cls) {
  auto [r_ij, r_jk] = motif_decode(cls);
  auto flip = [](int r) { return r == 0 ? 0 : 3 - r; };
  return motif_encode(flip(r_jk), flip(r_ij));
}

namespace {
std::array<double, 9> mask_where(bool slot1, int rel) {
  std::array<double, 9> m{};
  for (int c = 0; c < 9; ++c) {
    auto [r_ij, r_jk] = motif_decode(c);
    const int r = slot1 ? r_ij : r_jk;
    if ((rel < 0 && r != 0) || r == rel) m[c] = 1.0;
  }
  return m;
}
}  // namespace

std::array<double, 9> class_mask_slot1_any() { return mask_where(true, -1); }
std::array<double, 9> class_mask_slot2_any() { return mask_where(false, -1); }
std::array<double, 9> class_mask_i_to_j() { return mask_where(true, 1); }
std::array<double, 9> class_mask_j_to_i() { return mask_where(true, 2); }
std::array<double, 9> class_mask_j_to_k() { return mask_where(false, 1); }
std::array<double, 9> class_mask_k_to_j() { return mask_where(false, 2); }

DirectedGraph sample_random_dag(int d, double edge_prob, uint64_t seed) {
  if (d < 1) throw std::invalid_argument("sample_random_dag: d must be >= 1");
  if (edge_prob < 0.0 || edge_prob > 1.0)
    throw std::invalid_argument("sample_random_dag: edge_prob must be in [0,1]");
  Rng rng(seed);
  std::vector<int> perm(d);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);
  DirectedGraph g(d);
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b)
      if (rng.bernoulli(edge_prob)) g.set_edge(perm[a], perm[b], true);
  return g;
}

size_t triplet_count(int d) {
  if (d < 3) return 0;
  return static_cast<size_t>(d) * (d - 1) * (d - 2) / 2;
}

std::vector<TripletIndex> enumerate_triplets(int d, std::optional<size_t> max_count,
                                             uint64_t seed) {
  if (d < 3) throw std::invalid_argument("graph too small for triplets");
  std::vector<TripletIndex> all;
  all.reserve(triplet_count(d));
  for (int i = 0; i < d; ++i)
    for (int k = i + 1; k < d; ++k)
      for (int j = 0; j < d; ++j)
        if (j != i && j != k) all.push_back(TripletIndex{i, j, k});
  if (max_count && *max_count < all.size()) {
    Rng rng(seed);
    rng.shuffle(all);
    all.resize(*max_count);
  }
  return all;
}

void VoteBoard::add(const TripletIndex& t, const std::array<double, 9>& probs) {
  static const auto m_ij = class_mask_i_to_j();
  static const auto m_ji = class_mask_j_to_i();
  static const auto m_jk = class_mask_j_to_k();
  static const auto m_kj = class_mask_k_to_j();
  auto masked_sum = [&probs](const std::array<double, 9>& m) {
    double s = 0.0;
    for (int c = 0; c < 9; ++c) s += m[c] * probs[c];
    return s;
  };
  auto slot = [this](int a, int b, double ev) {
    evidence_[static_cast<size_t>(a) * d_ + b] += ev;
    counts_[static_cast<size_t>(a) * d_ + b] += 1.0;
  };
  slot(t.i, t.j, masked_sum(m_ij));
  slot(t.j, t.i, masked_sum(m_ji));
  slot(t.j, t.k, masked_sum(m_jk));
  slot(t.k, t.j, masked_sum(m_kj));
}

double VoteBoard::mean(int a, int b) const {
  const double c = count(a, b);
  return c > 0.0 ? evidence(a, b) / c : 0.0;
}

DirectedGraph aggregate_votes(const VoteBoard& board, double threshold) {
  const int d = board.d();
  DirectedGraph g(d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      if (a == b) continue;
      const double m = board.mean(a, b);
      if (m > threshold && m > board.mean(b, a)) g.set_edge(a, b, true);
    }
  return g;
}

}  // namespace enes
