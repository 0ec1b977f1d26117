#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "enes/datagen.hpp"
#include "enes/errors.hpp"
#include "enes/model.hpp"
#include "enes/rng.hpp"

using namespace enes;

namespace {
TripletFeatures random_features(uint64_t seed) {
  Rng rng(seed);
  TripletFeatures f{};
  for (auto& v : f) v = rng.normal();
  return f;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}
}  // namespace

TEST_CASE("parameter count is fixed") {
  const EnesParams p = init_params(1);
  // 21*64+64 + 64*64+64 + 64*32+32 + 32*9+9 + 64*9+9 + 64*1+1
  CHECK(p.parameter_count() == 8595);
}

TEST_CASE("gate forced to one selects expert A exactly") {
  EnesParams p = init_params(2);
  p.gate_b.at(0, 0) = 50.0;  // sigmoid saturates to exactly 1.0
  const TripletFeatures f = random_features(3);
  const TripletPrediction pred = forward(p, f);
  CHECK(pred.gate_w == 1.0);
  Tensor fused(1, kNumClasses);
  for (int c = 0; c < kNumClasses; ++c) fused.at(0, c) = pred.expert_a[c];
  const Tensor probs = softmax_rows(fused);
  for (int c = 0; c < kNumClasses; ++c) CHECK(pred.probs[c] == probs.at(0, c));
}

TEST_CASE("gate forced to zero selects expert B exactly") {
  EnesParams p = init_params(2);
  p.gate_b.at(0, 0) = -800.0;  // exp underflows, sigmoid is exactly zero
  const TripletFeatures f = random_features(4);
  const TripletPrediction pred = forward(p, f);
  CHECK(pred.gate_w == 0.0);
  Tensor fused(1, kNumClasses);
  for (int c = 0; c < kNumClasses; ++c) fused.at(0, c) = pred.expert_b[c];
  const Tensor probs = softmax_rows(fused);
  for (int c = 0; c < kNumClasses; ++c) CHECK(pred.probs[c] == probs.at(0, c));
}

TEST_CASE("zero final layers give uniform probabilities") {
  EnesParams p = init_params(5);
  p.ea_w2 = Tensor(EnesParams::kExpertHidden, kNumClasses);
  p.ea_b2 = Tensor(1, kNumClasses);
  p.eb_w = Tensor(EnesParams::kHidden, kNumClasses);
  p.eb_b = Tensor(1, kNumClasses);
  const TripletPrediction pred = forward(p, random_features(6));
  for (int c = 0; c < kNumClasses; ++c)
    CHECK(pred.probs[c] == doctest::Approx(1.0 / 9.0).epsilon(1e-12));
}

TEST_CASE("fusion identity holds against an outside recomputation") {
  const EnesParams p = init_params(7);
  for (uint64_t s = 0; s < 5; ++s) {
    const TripletPrediction pred = forward(p, random_features(s));
    // rebuild fused logits and probabilities directly from the report
    Tensor fused(1, kNumClasses);
    for (int c = 0; c < kNumClasses; ++c)
      fused.at(0, c) = pred.gate_w * pred.expert_a[c] + (1.0 - pred.gate_w) * pred.expert_b[c];
    const Tensor probs = softmax_rows(fused);
    double total = 0.0;
    for (int c = 0; c < kNumClasses; ++c) {
      CHECK(std::fabs(pred.probs[c] - probs.at(0, c)) < 1e-15);
      total += pred.probs[c];
    }
    CHECK(std::fabs(total - 1.0) < 1e-12);
  }
}

TEST_CASE("expert B is affine in the embedding") {
  const EnesParams p = init_params(9);
  Rng rng(10);
  Tensor h1(1, EnesParams::kHidden), h2(1, EnesParams::kHidden);
  for (int c = 0; c < EnesParams::kHidden; ++c) {
    h1.at(0, c) = rng.normal();
    h2.at(0, c) = rng.normal();
  }
  auto expert_b = [&p](const Tensor& h) { return add(matmul(h, p.eb_w), p.eb_b); };
  const Tensor lhs = expert_b(add(h1, h2));
  const Tensor zero_out = expert_b(Tensor(1, EnesParams::kHidden));
  const Tensor rhs = sub(add(expert_b(h1), expert_b(h2)), zero_out);
  for (int c = 0; c < kNumClasses; ++c)
    CHECK(lhs.at(0, c) == doctest::Approx(rhs.at(0, c)).epsilon(1e-12));
}

TEST_CASE("tape forward agrees with the plain forward") {
  const EnesParams p = init_params(13);
  const int B = 4;
  Tensor feats(B, EnesParams::kInput);
  std::vector<TripletFeatures> fs;
  for (int r = 0; r < B; ++r) {
    fs.push_back(random_features(100 + r));
    for (int c = 0; c < EnesParams::kInput; ++c) feats.at(r, c) = fs.back()[c];
  }
  Tape tape;
  const TapeForward tf = build_forward(tape, p, feats);
  for (int r = 0; r < B; ++r) {
    const TripletPrediction pred = forward(p, fs[r]);
    CHECK(tape.value(tf.gate).at(r, 0) == pred.gate_w);
    for (int c = 0; c < kNumClasses; ++c) {
      CHECK(tape.value(tf.expert_a).at(r, c) == pred.expert_a[c]);
      CHECK(tape.value(tf.expert_b).at(r, c) == pred.expert_b[c]);
      CHECK(tape.value(tf.probs).at(r, c) == pred.probs[c]);
    }
  }
}

TEST_CASE("untrained zero-logit model predicts an empty graph") {
  EnesParams p = init_params(5);
  p.ea_w2 = Tensor(EnesParams::kExpertHidden, kNumClasses);
  p.ea_b2 = Tensor(1, kNumClasses);
  p.eb_w = Tensor(EnesParams::kHidden, kNumClasses);
  p.eb_b = Tensor(1, kNumClasses);
  const DirectedGraph g = sample_random_dag(5, 0.5, 3);
  SemConfig sem;
  const ObservationMatrix obs = sample_sem(g, sem, 128, 4);
  // uniform class probabilities put evidence 3/9 < 0.35 on every direction
  const DirectedGraph pred = predict_graph(p, obs, std::nullopt, 0.35, 0);
  CHECK(pred.edge_count() == 0);
}

TEST_CASE("predict_graph is deterministic and validates d") {
  const EnesParams p = init_params(21);
  const DirectedGraph g = sample_random_dag(6, 0.4, 8);
  SemConfig sem;
  const ObservationMatrix obs = sample_sem(g, sem, 100, 9);
  const DirectedGraph a = predict_graph(p, obs, 30, 0.3, 5);
  const DirectedGraph b = predict_graph(p, obs, 30, 0.3, 5);
  CHECK(a == b);

  ObservationMatrix tiny(2, 100);
  CHECK_THROWS_AS(predict_graph(p, tiny, std::nullopt, 0.35, 0), DataError);
}

TEST_CASE("column permutation leaves the prediction unchanged") {
  const EnesParams p = init_params(31);
  const DirectedGraph g = sample_random_dag(4, 0.5, 2);
  SemConfig sem;
  const ObservationMatrix obs = sample_sem(g, sem, 200, 6);
  Rng rng(77);
  std::vector<int> perm(200);
  for (int t = 0; t < 200; ++t) perm[t] = t;
  rng.shuffle(perm);
  ObservationMatrix shuffled(4, 200);
  for (int v = 0; v < 4; ++v)
    for (int t = 0; t < 200; ++t) shuffled.at(v, t) = obs.at(v, perm[t]);
  CHECK(predict_graph(p, obs, std::nullopt, 0.3, 1) ==
        predict_graph(p, shuffled, std::nullopt, 0.3, 1));
}

TEST_CASE("save and load round trip bit-exactly") {
  EnesParams p = init_params(55);
  p.pen_a = 1.5;
  p.pen_c = 0.25;
  p.train_seed = 909;
  const std::string path = temp_path("enes_params.bin");
  save_params(p, path);
  const EnesParams q = load_params(path);
  CHECK(q.pen_a == p.pen_a);
  CHECK(q.pen_c == p.pen_c);
  CHECK(q.train_seed == p.train_seed);
  const auto pb = p.blocks();
  const auto qb = q.blocks();
  for (size_t b = 0; b < pb.size(); ++b)
    for (size_t n = 0; n < pb[b]->size(); ++n) CHECK((*pb[b])[n] == (*qb[b])[n]);

  const TripletFeatures f = random_features(8);
  const TripletPrediction before = forward(p, f);
  const TripletPrediction after = forward(q, f);
  for (int c = 0; c < kNumClasses; ++c) CHECK(before.probs[c] == after.probs[c]);
  std::filesystem::remove(path);
}

TEST_CASE("truncated and mismatched parameter files are refused") {
  const EnesParams p = init_params(3);
  const std::string path = temp_path("enes_params_bad.bin");
  save_params(p, path);
  std::string content;
  {
    std::ifstream in(path, std::ios::binary);
    content.assign((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  }
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(content.data(), static_cast<std::streamsize>(content.size() - 100));
  }
  CHECK_THROWS_WITH_AS(load_params(path), doctest::Contains("unexpected end"), DataError);

  // corrupt the declared encoder width
  {
    std::string bad = content;
    const uint32_t wrong = 65;
    std::memcpy(bad.data() + 8 + 4 + 4, &wrong, sizeof(wrong));
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bad.data(), static_cast<std::streamsize>(bad.size()));
  }
  CHECK_THROWS_WITH_AS(load_params(path), doctest::Contains("architecture mismatch"), DataError);
  std::filesystem::remove(path);
}
