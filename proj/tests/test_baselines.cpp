#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "enes/baselines.hpp"
#include "enes/rng.hpp"

using namespace enes;

namespace {
ObservationMatrix gaussian_obs(int d, int T, uint64_t seed) {
  Rng rng(seed);
  ObservationMatrix obs(d, T);
  for (int v = 0; v < d; ++v)
    for (int t = 0; t < T; ++t) obs.at(v, t) = rng.normal();
  return obs;
}

// x -> y -> z (-> w) linear Gaussian chain.
ObservationMatrix chain_obs(int d, int T, uint64_t seed, double w = 1.5) {
  Rng rng(seed);
  ObservationMatrix obs(d, T);
  for (int t = 0; t < T; ++t) {
    obs.at(0, t) = rng.normal();
    for (int v = 1; v < d; ++v) obs.at(v, t) = w * obs.at(v - 1, t) + rng.normal();
  }
  return obs;
}

// x -> z <- y collider.
ObservationMatrix collider_obs(int T, uint64_t seed) {
  Rng rng(seed);
  ObservationMatrix obs(3, T);
  for (int t = 0; t < T; ++t) {
    obs.at(0, t) = rng.normal();
    obs.at(1, t) = rng.normal();
    obs.at(2, t) = 1.2 * obs.at(0, t) + 1.2 * obs.at(1, t) + rng.normal();
  }
  return obs;
}
}  // namespace

TEST_CASE("normal quantile reference values") {
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(normal_quantile(0.995) == doctest::Approx(2.5758293035489004).epsilon(1e-12));
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0));
  CHECK(normal_quantile(0.025) == doctest::Approx(-1.959963984540054).epsilon(1e-12));
  CHECK_THROWS_AS(normal_quantile(0.0), std::invalid_argument);
}

TEST_CASE("pearson baseline on independent noise is empty") {
  const ObservationMatrix obs = gaussian_obs(5, 10000, 3);
  CHECK(pearson_baseline(obs, 0.3).edge_count() == 0);
}

TEST_CASE("pearson baseline expands detected pairs in both directions") {
  const ObservationMatrix obs = chain_obs(2, 10000, 4, 2.0);  // |r| near 0.894
  const DirectedGraph g = pearson_baseline(obs, 0.3);
  CHECK(g.edge(0, 1));
  CHECK(g.edge(1, 0));
  CHECK(g.edge_count() == 2);
}

TEST_CASE("pearson baseline at threshold one is always empty") {
  const ObservationMatrix obs = chain_obs(3, 5000, 5);
  CHECK(pearson_baseline(obs, 1.0).edge_count() == 0);
}

TEST_CASE("pearson baseline is monotone in the threshold") {
  const ObservationMatrix obs = chain_obs(5, 2000, 6, 0.8);
  int prev = pearson_baseline(obs, 0.05).edge_count();
  for (double thr : {0.2, 0.4, 0.6, 0.8}) {
    const int cur = pearson_baseline(obs, thr).edge_count();
    CHECK(cur <= prev);
    prev = cur;
  }
}

TEST_CASE("fisher z on exact marginal correlation values") {
  // r = 0.5 at n = 100: statistic = atanh(0.5) * sqrt(97), over the 5% bound
  const double expected_stat = 0.5493061443340548 * std::sqrt(97.0);
  CHECK(expected_stat == doctest::Approx(5.410).epsilon(1e-3));

  // build data with sample correlation very near 0.5 via a large sample
  Rng rng(8);
  ObservationMatrix obs(2, 100);
  // deterministic check through the public api is covered below; here just
  // verify the decision boundary arithmetic via z and statistic fields
  for (int t = 0; t < 100; ++t) {
    const double x = rng.normal();
    obs.at(0, t) = x;
    obs.at(1, t) = x + rng.normal();
  }
  const CiTestResult res = fisher_z_test(obs, 0, 1, {}, 0.05);
  CHECK(res.z == doctest::Approx(0.5 * std::log((1 + res.partial_corr) / (1 - res.partial_corr)))
                     .epsilon(1e-12));
  CHECK(res.statistic ==
        doctest::Approx(std::sqrt(97.0) * std::fabs(res.z)).epsilon(1e-12));
  CHECK(!res.independent);  // strongly dependent pair
}

TEST_CASE("fisher z declares independent noise independent") {
  const ObservationMatrix obs = gaussian_obs(2, 5000, 9);
  const CiTestResult res = fisher_z_test(obs, 0, 1, {}, 0.05);
  CHECK(std::fabs(res.partial_corr) < 0.05);
  CHECK(res.independent);
}

TEST_CASE("fisher z separates a chain given the middle node") {
  int good = 0;
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const ObservationMatrix obs = chain_obs(3, 10000, seed);
    const CiTestResult given = fisher_z_test(obs, 0, 2, {1}, 0.01);
    const CiTestResult marginal = fisher_z_test(obs, 0, 2, {}, 0.01);
    if (given.independent && !marginal.independent) ++good;
  }
  CHECK(good >= 9);
}

TEST_CASE("fisher z is symmetric in the tested pair") {
  const ObservationMatrix obs = chain_obs(4, 3000, 10);
  const CiTestResult ab = fisher_z_test(obs, 1, 3, {0}, 0.05);
  const CiTestResult ba = fisher_z_test(obs, 3, 1, {0}, 0.05);
  CHECK(ab.partial_corr == doctest::Approx(ba.partial_corr).epsilon(1e-12));
  CHECK(ab.independent == ba.independent);
}

TEST_CASE("fisher z flags singular submatrices as dependent") {
  ObservationMatrix obs(3, 100);
  Rng rng(2);
  for (int t = 0; t < 100; ++t) {
    obs.at(0, t) = rng.normal();
    obs.at(1, t) = obs.at(0, t);  // exact copy: singular correlation matrix
    obs.at(2, t) = rng.normal();
  }
  const CiTestResult res = fisher_z_test(obs, 0, 2, {1}, 0.05);
  CHECK(res.singular);
  CHECK(!res.independent);
}

TEST_CASE("fisher z validates sample size") {
  const ObservationMatrix obs = gaussian_obs(4, 5, 1);  // n - |S| - 3 = 0
  CHECK_THROWS_AS(fisher_z_test(obs, 0, 1, {2, 3}, 0.05), std::invalid_argument);
}

TEST_CASE("pc on two independent variables is empty") {
  const ObservationMatrix obs = gaussian_obs(2, 5000, 21);
  PcConfig cfg;
  CHECK(pc_algorithm(obs, cfg).edge_count() == 0);
}

TEST_CASE("pc recovers the collider orientation") {
  PcConfig cfg;
  int hits = 0;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const ObservationMatrix obs = collider_obs(5000, seed);
    const DirectedGraph g = pc_algorithm(obs, cfg);
    const bool exact = g.edge(0, 2) && g.edge(1, 2) && !g.edge(2, 0) && !g.edge(2, 1) &&
                       !g.edge(0, 1) && !g.edge(1, 0);
    if (exact) ++hits;
  }
  CHECK(hits >= 18);  // 90% of 20 seeds
}

TEST_CASE("pc leaves a chain unoriented and expands it bidirectionally") {
  PcConfig cfg;
  int hits = 0;
  for (uint64_t seed = 100; seed < 120; ++seed) {
    const ObservationMatrix obs = chain_obs(3, 5000, seed);
    const DirectedGraph g = pc_algorithm(obs, cfg);
    const bool skeleton_ok = g.edge(0, 1) && g.edge(1, 0) && g.edge(1, 2) && g.edge(2, 1) &&
                             !g.edge(0, 2) && !g.edge(2, 0);
    if (skeleton_ok) ++hits;
  }
  CHECK(hits >= 18);
}

TEST_CASE("pc skeleton is order independent on strong data") {
  const int d = 4;
  const ObservationMatrix obs = chain_obs(d, 20000, 55);
  PcConfig cfg;
  const DirectedGraph base = pc_algorithm(obs, cfg);

  // permute variable order and map the skeleton back
  const std::vector<int> perm = {2, 0, 3, 1};
  ObservationMatrix permuted(d, obs.T());
  for (int v = 0; v < d; ++v)
    for (int t = 0; t < obs.T(); ++t) permuted.at(v, t) = obs.at(perm[v], t);
  const DirectedGraph moved = pc_algorithm(permuted, cfg);

  auto skel = [](const DirectedGraph& g, int a, int b) { return g.edge(a, b) || g.edge(b, a); };
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b) {
      int pa = -1, pb = -1;
      for (int v = 0; v < d; ++v) {
        if (perm[v] == a) pa = v;
        if (perm[v] == b) pb = v;
      }
      CHECK(skel(base, a, b) == skel(moved, pa, pb));
    }
}
