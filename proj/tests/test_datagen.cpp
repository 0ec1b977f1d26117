#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "enes/datagen.hpp"
#include "enes/errors.hpp"

using namespace enes;

namespace {

double pearson(const ObservationMatrix& obs, int a, int b) {
  const int T = obs.T();
  double ma = 0, mb = 0;
  for (int t = 0; t < T; ++t) {
    ma += obs.at(a, t);
    mb += obs.at(b, t);
  }
  ma /= T;
  mb /= T;
  double cov = 0, va = 0, vb = 0;
  for (int t = 0; t < T; ++t) {
    cov += (obs.at(a, t) - ma) * (obs.at(b, t) - mb);
    va += (obs.at(a, t) - ma) * (obs.at(a, t) - ma);
    vb += (obs.at(b, t) - mb) * (obs.at(b, t) - mb);
  }
  return cov / std::sqrt(va * vb);
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("independent noise rows stay uncorrelated") {
  const DirectedGraph g(3);
  SemConfig cfg;
  const ObservationMatrix obs = sample_sem(g, cfg, 10000, 4);
  CHECK(std::fabs(pearson(obs, 0, 1)) < 0.1);
  CHECK(std::fabs(pearson(obs, 0, 2)) < 0.1);
  CHECK(std::fabs(pearson(obs, 1, 2)) < 0.1);
}

TEST_CASE("linear chain correlation follows w over sqrt(w^2+1)") {
  DirectedGraph g(2);
  g.set_edge(0, 1, true);
  SemConfig cfg;
  cfg.weight_min = 2.0;  // pin w = 2 exactly
  cfg.weight_max = 2.0;
  const double expected = 2.0 / std::sqrt(5.0);  // 0.8944...
  int hits = 0;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const ObservationMatrix obs = sample_sem(g, cfg, 10000, seed);
    if (std::fabs(std::fabs(pearson(obs, 0, 1)) - expected) < 0.02) ++hits;
  }
  CHECK(hits >= 19);
}

TEST_CASE("sem is deterministic and validates input") {
  DirectedGraph g(4);
  g.set_edge(0, 1, true);
  SemConfig cfg;
  const ObservationMatrix a = sample_sem(g, cfg, 64, 11);
  const ObservationMatrix b = sample_sem(g, cfg, 64, 11);
  CHECK(a == b);
  CHECK(a.all_finite());
  CHECK_THROWS_AS(sample_sem(g, cfg, 4, 11), std::invalid_argument);

  DirectedGraph cyc(2);
  cyc.set_edge(0, 1, true);
  cyc.set_edge(1, 0, true);
  CHECK_THROWS_WITH_AS(sample_sem(cyc, cfg, 64, 1), "SEM requires a DAG", DataError);
}

TEST_CASE("nonlinear sem produces nonlinear dependence") {
  DirectedGraph g(2);
  g.set_edge(0, 1, true);
  SemConfig cfg;
  cfg.kind = SemKind::Nonlinear;
  cfg.noise_std = 0.3;
  const ObservationMatrix obs = sample_sem(g, cfg, 4096, 5);
  CHECK(obs.all_finite());
}

TEST_CASE("mm: source-free system with zero noise stays at zero") {
  DirectedGraph g(3);
  g.set_edge(0, 1, true);
  g.set_edge(1, 2, true);
  MmConfig cfg;
  cfg.noise_std = 0.0;
  const ObservationMatrix obs = simulate_mm(g, cfg, 50, 3);
  for (int v = 0; v < 3; ++v)
    for (int t = 0; t < 50; ++t) CHECK(obs.at(v, t) == 0.0);
}

TEST_CASE("mm: clamped parent at k_m drives child to v_max/(2*decay)") {
  DirectedGraph g(2);
  g.set_edge(0, 1, true);
  MmConfig cfg;
  cfg.noise_std = 0.0;
  cfg.clamp = {{0, cfg.k_m}};
  // production is v/2, so steady state is v/(2*decay) = 1.0 at defaults
  const ObservationMatrix obs = simulate_mm(g, cfg, 200, 7);
  const double last = obs.at(1, 199);
  CHECK(std::fabs(last - 1.0) < 1e-3);
  // monotone approach from below
  CHECK(obs.at(1, 0) < obs.at(1, 100));
  CHECK(obs.at(1, 100) <= obs.at(1, 199));
}

TEST_CASE("mm production saturates at v_max") {
  CHECK(mm_production(1e12, 1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(mm_production(0.0, 1.0, 1.0) == 0.0);
  for (double x : {0.1, 1.0, 10.0}) CHECK(mm_production(x, 1.0, 1.0) < 1.0);
}

TEST_CASE("mm trajectories are non-negative and deterministic") {
  const DirectedGraph g = sample_random_dag(6, 0.4, 2);
  MmConfig cfg;
  const ObservationMatrix a = simulate_mm(g, cfg, 300, 12);
  const ObservationMatrix b = simulate_mm(g, cfg, 300, 12);
  CHECK(a == b);
  for (int v = 0; v < 6; ++v)
    for (int t = 0; t < 300; ++t) CHECK(a.at(v, t) >= 0.0);

  MmConfig bad;
  bad.dt = 3.0;  // dt * decay >= 1
  CHECK_THROWS_AS(simulate_mm(g, bad, 50, 1), std::invalid_argument);
}

TEST_CASE("standardization zeroes degenerate rows") {
  ObservationMatrix obs(2, 10);
  for (int t = 0; t < 10; ++t) {
    obs.at(0, t) = 5.0;       // constant
    obs.at(1, t) = t * 1.0;   // varying
  }
  obs.standardize_rows();
  for (int t = 0; t < 10; ++t) CHECK(obs.at(0, t) == 0.0);
  double m = 0;
  for (int t = 0; t < 10; ++t) m += obs.at(1, t);
  CHECK(std::fabs(m) < 1e-12);
}

TEST_CASE("dataset from a single empty graph holds only class 0, truncated") {
  const DirectedGraph g(4);
  SemConfig sem;
  const ObservationMatrix obs = sample_sem(g, sem, 100, 9);
  DatasetConfig cfg;
  cfg.class0_cap = 5;
  cfg.mirror_augment = false;
  const TripletDataset ds = build_triplet_dataset({{&g, &obs}}, cfg, 1, "sem-linear");
  CHECK(ds.samples.size() == 5);
  for (const auto& s : ds.samples) CHECK(s.label == 0);
}

TEST_CASE("chain graph yields exactly one class-4 triplet") {
  DirectedGraph g(3);
  g.set_edge(0, 1, true);
  g.set_edge(1, 2, true);
  SemConfig sem;
  const ObservationMatrix obs = sample_sem(g, sem, 100, 9);
  DatasetConfig cfg;
  cfg.mirror_augment = false;
  cfg.class0_cap = 1000;
  const TripletDataset ds = build_triplet_dataset({{&g, &obs}}, cfg, 1, "sem-linear");
  CHECK(ds.samples.size() == 3);
  int class4 = 0;
  for (const auto& s : ds.samples)
    if (s.label == 4) {
      ++class4;
      CHECK(s.j == 1);
    }
  CHECK(class4 == 1);
}

TEST_CASE("mirror augmentation emits the mirrored class") {
  DirectedGraph g(3);
  g.set_edge(0, 1, true);
  g.set_edge(1, 2, true);
  SemConfig sem;
  const ObservationMatrix obs = sample_sem(g, sem, 100, 9);
  DatasetConfig cfg;
  cfg.mirror_augment = true;
  cfg.class0_cap = 1000;
  const TripletDataset ds = build_triplet_dataset({{&g, &obs}}, cfg, 1, "sem-linear");
  CHECK(ds.samples.size() == 6);
  int class8 = 0;
  for (const auto& s : ds.samples)
    if (s.label == 8) {
      ++class8;
      // mirrored chain: stored as (k, j, i) with the outer pair reversed
      CHECK(s.i == 2);
      CHECK(s.j == 1);
      CHECK(s.k == 0);
    }
  CHECK(class8 == 1);
}

TEST_CASE("every stored label re-derives from its source graph") {
  const DirectedGraph g1 = sample_random_dag(5, 0.5, 21);
  const DirectedGraph g2 = sample_random_dag(5, 0.3, 22);
  SemConfig sem;
  const ObservationMatrix o1 = sample_sem(g1, sem, 64, 31);
  const ObservationMatrix o2 = sample_sem(g2, sem, 64, 32);
  DatasetConfig cfg;
  const TripletDataset ds = build_triplet_dataset({{&g1, &o1}, {&g2, &o2}}, cfg, 5, "sem-linear");
  const DirectedGraph* graphs[2] = {&g1, &g2};
  for (const auto& s : ds.samples) {
    const DirectedGraph& g = *graphs[s.source];
    const int expect = motif_encode(pair_relation(g, s.i, s.j), pair_relation(g, s.j, s.k));
    CHECK(s.label == expect);
  }
  CHECK_THROWS_AS(build_triplet_dataset({}, cfg, 1), DataError);
}

TEST_CASE("csv loader shapes, names, and errors") {
  const std::string path = temp_path("enes_obs.csv");
  {
    std::ofstream out(path);
    out << "a,b,c\n";
    for (int t = 0; t < 5; ++t) out << "0,0,0\n";
  }
  const ObservationMatrix obs = load_observations_csv(path);
  CHECK(obs.d() == 3);
  CHECK(obs.T() == 5);
  CHECK(obs.names() == std::vector<std::string>{"a", "b", "c"});
  for (int v = 0; v < 3; ++v)
    for (int t = 0; t < 5; ++t) CHECK(obs.at(v, t) == 0.0);

  {
    std::ofstream out(path);
    out << "a,b\n1,2\n3\n";
  }
  CHECK_THROWS_WITH_AS(load_observations_csv(path),
                       doctest::Contains("ragged row at line 3"), DataError);

  {
    std::ofstream out(path);
    out << "a,b\n1,x\n";
  }
  CHECK_THROWS_WITH_AS(load_observations_csv(path),
                       doctest::Contains("line 2, column 2"), DataError);
  std::filesystem::remove(path);
}

TEST_CASE("csv save/load round trip preserves values exactly") {
  const DirectedGraph g = sample_random_dag(4, 0.5, 3);
  SemConfig sem;
  ObservationMatrix obs = sample_sem(g, sem, 32, 77);
  obs.set_names({"w", "x", "y", "z"});
  const std::string path = temp_path("enes_obs_rt.csv");
  save_observations_csv(path, obs);
  const ObservationMatrix back = load_observations_csv(path);
  CHECK(back == obs);
  CHECK(back.names() == obs.names());
  std::filesystem::remove(path);
}

TEST_CASE("dataset cache round trips") {
  const DirectedGraph g = sample_random_dag(4, 0.5, 8);
  SemConfig sem;
  const ObservationMatrix obs = sample_sem(g, sem, 40, 15);
  DatasetConfig cfg;
  const TripletDataset ds = build_triplet_dataset({{&g, &obs}}, cfg, 2, "sem-linear");
  const std::string path = temp_path("enes_dataset.bin");
  save_dataset(path, ds);
  const TripletDataset back = load_dataset(path);
  CHECK(back.provenance == ds.provenance);
  REQUIRE(back.samples.size() == ds.samples.size());
  for (size_t n = 0; n < ds.samples.size(); ++n) {
    CHECK(back.samples[n].label == ds.samples[n].label);
    CHECK(back.samples[n].block == ds.samples[n].block);
    CHECK(back.samples[n].r_ij == ds.samples[n].r_ij);
  }
  // truncated file fails cleanly
  {
    std::ifstream in(path, std::ios::binary);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(content.data(), static_cast<std::streamsize>(content.size() / 2));
  }
  CHECK_THROWS_AS(load_dataset(path), DataError);
  std::filesystem::remove(path);
}
