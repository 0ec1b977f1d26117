#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <set>

#include "enes/graph.hpp"

using namespace enes;

TEST_CASE("single node graph has no edges at any probability") {
  for (double p : {0.0, 0.5, 1.0}) {
    const DirectedGraph g = sample_random_dag(1, p, 42);
    CHECK(g.edge_count() == 0);
  }
}

TEST_CASE("edge probability one gives a transitive tournament") {
  const DirectedGraph g = sample_random_dag(3, 1.0, 9);
  CHECK(g.edge_count() == 3);  // d(d-1)/2
  CHECK(g.is_acyclic());
}

TEST_CASE("sampler is deterministic under a fixed seed") {
  const DirectedGraph a = sample_random_dag(11, 0.2, 7);
  const DirectedGraph b = sample_random_dag(11, 0.2, 7);
  CHECK(a == b);
  const DirectedGraph c = sample_random_dag(11, 0.2, 8);
  CHECK(!(a == c));
}

TEST_CASE("sampled graphs are always acyclic") {
  for (int d : {5, 11, 25}) {
    for (uint64_t seed = 0; seed < 100; ++seed) {
      const DirectedGraph g = sample_random_dag(d, 0.4, seed);
      REQUIRE(g.is_acyclic());
    }
  }
}

TEST_CASE("sampler validates parameters") {
  CHECK_THROWS_AS(sample_random_dag(0, 0.5, 1), std::invalid_argument);
  CHECK_THROWS_AS(sample_random_dag(3, -0.1, 1), std::invalid_argument);
  CHECK_THROWS_AS(sample_random_dag(3, 1.1, 1), std::invalid_argument);
}

TEST_CASE("motif label on the empty graph is class 0") {
  const DirectedGraph g(4);
  CHECK(motif_label(g, TripletIndex::canonical(0, 1, 2, 4)) == 0);
  CHECK(motif_label(g, TripletIndex::canonical(1, 3, 2, 4)) == 0);
}

TEST_CASE("chain and collider labels follow the encoding") {
  DirectedGraph chain(3);
  chain.set_edge(0, 1, true);
  chain.set_edge(1, 2, true);
  CHECK(motif_label(chain, TripletIndex::canonical(0, 1, 2, 3)) == 4);

  DirectedGraph collider(3);
  collider.set_edge(0, 1, true);
  collider.set_edge(2, 1, true);
  CHECK(motif_label(collider, TripletIndex::canonical(0, 1, 2, 3)) == 5);
}

TEST_CASE("direct i-k edge does not affect the label") {
  DirectedGraph g(3);
  g.set_edge(0, 1, true);
  g.set_edge(1, 2, true);
  const int before = motif_label(g, TripletIndex::canonical(0, 1, 2, 3));
  g.set_edge(0, 2, true);
  CHECK(motif_label(g, TripletIndex::canonical(0, 1, 2, 3)) == before);
}

TEST_CASE("label decode matches pair relations for all 64 three-node patterns") {
  for (int bits = 0; bits < 64; ++bits) {
    DirectedGraph g(3);
    int b = bits;
    for (int a = 0; a < 3; ++a)
      for (int c = 0; c < 3; ++c) {
        if (a == c) continue;
        g.set_edge(a, c, b & 1);
        b >>= 1;
      }
    const TripletIndex t = TripletIndex::canonical(0, 1, 2, 3);
    const auto [r_ij, r_jk] = motif_decode(motif_label(g, t));
    CHECK(r_ij == pair_relation(g, 0, 1));
    CHECK(r_jk == pair_relation(g, 1, 2));
  }
}

TEST_CASE("motif mirror flips slots and directions") {
  CHECK(motif_mirror(0) == 0);
  CHECK(motif_mirror(4) == 8);  // chain i->j->k seen from the far end
  CHECK(motif_mirror(8) == 4);
  CHECK(motif_mirror(5) == 5);  // collider is mirror-symmetric
  CHECK(motif_mirror(7) == 7);  // fork likewise
  for (int c = 0; c < 9; ++c) CHECK(motif_mirror(motif_mirror(c)) == c);
}

TEST_CASE("triplet index validation") {
  CHECK_THROWS_AS(TripletIndex::canonical(0, 0, 1, 3), std::invalid_argument);
  CHECK_THROWS_AS(TripletIndex::canonical(0, 1, 3, 3), std::out_of_range);
  const TripletIndex t = TripletIndex::canonical(2, 1, 0, 3);
  CHECK(t.i == 0);
  CHECK(t.k == 2);
}

TEST_CASE("triplet enumeration counts") {
  CHECK_THROWS_WITH(enumerate_triplets(2, std::nullopt, 0), "graph too small for triplets");
  CHECK(enumerate_triplets(3, std::nullopt, 0).size() == 3);
  CHECK(enumerate_triplets(11, std::nullopt, 0).size() == 495);

  // Brute-force count of distinct {i<k, j} triples.
  size_t brute = 0;
  const int d = 11;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        if (i < k && j != i && j != k) ++brute;
  CHECK(brute == 495);
  CHECK(triplet_count(11) == brute);
}

TEST_CASE("triplet subsampling returns exactly the cap, all distinct") {
  const auto sample = enumerate_triplets(50, 20000, 123);
  CHECK(sample.size() == 20000);
  std::set<std::tuple<int, int, int>> uniq;
  for (const auto& t : sample) {
    CHECK(t.i < t.k);
    uniq.insert({t.i, t.j, t.k});
  }
  CHECK(uniq.size() == 20000);
  // determinism
  const auto again = enumerate_triplets(50, 20000, 123);
  CHECK(again.size() == sample.size());
  for (size_t n = 0; n < sample.size(); ++n) {
    CHECK(again[n].i == sample[n].i);
    CHECK(again[n].j == sample[n].j);
    CHECK(again[n].k == sample[n].k);
  }
}

TEST_CASE("vote aggregation honors threshold, direction and ties") {
  VoteBoard board(3);
  std::array<double, 9> probs{};

  SUBCASE("all class 0 gives an empty graph") {
    probs[0] = 1.0;
    for (const auto& t : enumerate_triplets(3, std::nullopt, 0)) board.add(t, probs);
    CHECK(aggregate_votes(board, 0.05).edge_count() == 0);
  }

  SUBCASE("clear directional evidence emits one edge") {
    probs = {};
    probs[3] = 0.9;  // i->j asserted in slot 1
    probs[6] = 0.1;  // j->i
    board.add(TripletIndex::canonical(0, 1, 2, 3), probs);
    const DirectedGraph g = aggregate_votes(board, 0.35);
    CHECK(g.edge(0, 1));
    CHECK(!g.edge(1, 0));
  }

  SUBCASE("tied evidence is suppressed") {
    probs = {};
    probs[3] = 0.9;
    board.add(TripletIndex::canonical(0, 1, 2, 3), probs);
    // a second vote asserting the opposite direction equally strongly
    std::array<double, 9> rev{};
    rev[6] = 0.9;
    board.add(TripletIndex::canonical(0, 1, 2, 3), rev);
    const DirectedGraph g = aggregate_votes(board, 0.35);
    CHECK(!g.edge(0, 1));
    CHECK(!g.edge(1, 0));
  }
}

TEST_CASE("one-hot true labels reconstruct the graph through votes") {
  for (uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const DirectedGraph truth = sample_random_dag(6, 0.4, seed);
    VoteBoard board(6);
    for (const auto& t : enumerate_triplets(6, std::nullopt, 0)) {
      std::array<double, 9> probs{};
      probs[motif_label(truth, t)] = 1.0;
      board.add(t, probs);
    }
    const DirectedGraph rebuilt = aggregate_votes(board, 0.35);
    CHECK(rebuilt == truth);
  }
}

TEST_CASE("graph json round trip") {
  DirectedGraph g(4);
  g.set_edge(0, 2, true);
  g.set_edge(3, 1, true);
  g.set_names({"a", "b", "c", "d"});
  const auto j = g.to_json();
  CHECK(j["d"] == 4);
  const DirectedGraph back = DirectedGraph::from_json(j);
  CHECK(back == g);
  CHECK(back.names() == g.names());

  const std::string path = (std::filesystem::temp_directory_path() / "enes_graph_rt.json").string();
  g.save(path);
  CHECK(DirectedGraph::load(path) == g);
  std::filesystem::remove(path);
}

TEST_CASE("graph json rejects malformed input") {
  CHECK_THROWS(DirectedGraph::from_json(nlohmann::json{{"edges", {{0, 1}}}}));
  CHECK_THROWS(DirectedGraph::from_json(nlohmann::json{{"d", 2}, {"edges", {{0, 5}}}}));
  CHECK_THROWS(DirectedGraph::from_json(nlohmann::json{{"d", 2}, {"edges", {{1, 1}}}}));
}
