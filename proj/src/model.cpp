#include "enes/model.hpp"

#include <cmath>
#include <cstring>

#include "enes/errors.hpp"
#include "enes/io.hpp"
#include "enes/rng.hpp"

namespace enes {

namespace {
constexpr char kParamMagic[8] = {'E', 'N', 'E', 'S', 'P', 'A', 'R', '\0'};
constexpr uint32_t kParamVersion = 1;

Tensor glorot(int in, int out, Rng& rng) {
  const double bound = std::sqrt(6.0 / (in + out));
  Tensor w(in, out);
  for (size_t n = 0; n < w.size(); ++n) w[n] = rng.uniform(-bound, bound);
  return w;
}
}  // namespace

std::vector<Tensor*> EnesParams::blocks() {
  return {&enc_w1, &enc_b1, &enc_w2, &enc_b2, &ea_w1, &ea_b1,
          &ea_w2, &ea_b2, &eb_w,   &eb_b,   &gate_w, &gate_b};
}

std::vector<const Tensor*> EnesParams::blocks() const {
  return {&enc_w1, &enc_b1, &enc_w2, &enc_b2, &ea_w1, &ea_b1,
          &ea_w2, &ea_b2, &eb_w,   &eb_b,   &gate_w, &gate_b};
}

const std::vector<std::string>& EnesParams::block_names() {
  static const std::vector<std::string> names = {
      "enc_w1", "enc_b1", "enc_w2", "enc_b2", "ea_w1", "ea_b1",
      "ea_w2",  "ea_b2",  "eb_w",   "eb_b",   "gate_w", "gate_b"};
  return names;
}

size_t EnesParams::parameter_count() const {
  size_t n = 0;
  for (const Tensor* t : blocks()) n += t->size();
  return n;
}

EnesParams init_params(uint64_t seed) {
  Rng rng(seed);
  EnesParams p;
  p.train_seed = seed;
  p.enc_w1 = glorot(EnesParams::kInput, EnesParams::kHidden, rng);
  p.enc_b1 = Tensor(1, EnesParams::kHidden);
  p.enc_w2 = glorot(EnesParams::kHidden, EnesParams::kHidden, rng);
  p.enc_b2 = Tensor(1, EnesParams::kHidden);
  p.ea_w1 = glorot(EnesParams::kHidden, EnesParams::kExpertHidden, rng);
  p.ea_b1 = Tensor(1, EnesParams::kExpertHidden);
  p.ea_w2 = glorot(EnesParams::kExpertHidden, kNumClasses, rng);
  p.ea_b2 = Tensor(1, kNumClasses);
  p.eb_w = glorot(EnesParams::kHidden, kNumClasses, rng);
  p.eb_b = Tensor(1, kNumClasses);
  p.gate_w = glorot(EnesParams::kHidden, 1, rng);
  p.gate_b = Tensor(1, 1);
  return p;
}

int TripletPrediction::argmax() const {
  int best = 0;
  for (int c = 1; c < kNumClasses; ++c)
    if (probs[c] > probs[best]) best = c;
  return best;
}

TripletPrediction forward(const EnesParams& p, const TripletFeatures& feats) {
  Tensor x = Tensor::from_vector(std::vector<double>(feats.begin(), feats.end()), 1,
                                 EnesParams::kInput);
  const Tensor h1 = tanh_ew(add(matmul(x, p.enc_w1), p.enc_b1));
  const Tensor h2 = tanh_ew(add(matmul(h1, p.enc_w2), p.enc_b2));
  const Tensor a1 = tanh_ew(add(matmul(h2, p.ea_w1), p.ea_b1));
  const Tensor logits_a = add(matmul(a1, p.ea_w2), p.ea_b2);
  const Tensor logits_b = add(matmul(h2, p.eb_w), p.eb_b);
  const Tensor gate = sigmoid_ew(add(matmul(h2, p.gate_w), p.gate_b));

  const double w = gate.at(0, 0);
  Tensor fused(1, kNumClasses);
  for (int c = 0; c < kNumClasses; ++c)
    fused.at(0, c) = w * logits_a.at(0, c) + (1.0 - w) * logits_b.at(0, c);
  const Tensor probs = softmax_rows(fused);

  TripletPrediction out;
  out.gate_w = w;
  for (int c = 0; c < kNumClasses; ++c) {
    out.probs[c] = probs.at(0, c);
    out.expert_a[c] = logits_a.at(0, c);
    out.expert_b[c] = logits_b.at(0, c);
  }
  return out;
}

TapeForward build_forward(Tape& tape, const EnesParams& params, const Tensor& feats) {
  if (feats.cols() != EnesParams::kInput)
    throw std::invalid_argument("build_forward: features must have " +
                                std::to_string(EnesParams::kInput) + " columns");
  TapeForward tf;
  for (const Tensor* b : params.blocks()) tf.param_ids.push_back(tape.leaf(*b));
  const int w1 = tf.param_ids[0], b1 = tf.param_ids[1];
  const int w2 = tf.param_ids[2], b2 = tf.param_ids[3];
  const int aw1 = tf.param_ids[4], ab1 = tf.param_ids[5];
  const int aw2 = tf.param_ids[6], ab2 = tf.param_ids[7];
  const int bw = tf.param_ids[8], bb = tf.param_ids[9];
  const int gw = tf.param_ids[10], gb = tf.param_ids[11];

  tf.features = tape.leaf(feats);
  const int h1 = tape.tanh_op(tape.add(tape.matmul(tf.features, w1), b1));
  tf.embedding = tape.tanh_op(tape.add(tape.matmul(h1, w2), b2));
  const int a1 = tape.tanh_op(tape.add(tape.matmul(tf.embedding, aw1), ab1));
  tf.expert_a = tape.add(tape.matmul(a1, aw2), ab2);
  tf.expert_b = tape.add(tape.matmul(tf.embedding, bw), bb);
  tf.gate = tape.sigmoid_op(tape.add(tape.matmul(tf.embedding, gw), gb));

  const int ones = tape.leaf(Tensor(feats.rows(), 1, 1.0));
  const int gate_complement = tape.sub(ones, tf.gate);
  tf.fused = tape.add(tape.rowscale(tf.expert_a, tf.gate),
                      tape.rowscale(tf.expert_b, gate_complement));
  tf.probs = tape.softmax_rows_op(tf.fused);
  return tf;
}

DirectedGraph predict_graph(const EnesParams& params, const ObservationMatrix& obs,
                            std::optional<size_t> triplet_cap, double threshold, uint64_t seed) {
  if (obs.d() < 3) throw DataError("predict_graph: need at least 3 variables");
  const TripletFeaturizer fz(obs);
  const auto triplets = enumerate_triplets(obs.d(), triplet_cap, seed);
  VoteBoard board(obs.d());
  for (const auto& t : triplets) {
    const TripletPrediction pred = forward(params, fz.features(t));
    board.add(t, pred.probs);
  }
  DirectedGraph g = aggregate_votes(board, threshold);
  if (!obs.names().empty()) g.set_names(obs.names());
  return g;
}

namespace {
template <typename T>
void put(std::string& buf, const T& v) {
  buf.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T take(const std::string& buf, size_t& off) {
  if (off + sizeof(T) > buf.size())
    throw DataError("parameter file: unexpected end of file");
  T v;
  std::memcpy(&v, buf.data() + off, sizeof(T));
  off += sizeof(T);
  return v;
}
}  // namespace

void save_params(const EnesParams& params, const std::string& path) {
  std::string buf;
  buf.append(kParamMagic, 8);
  put(buf, kParamVersion);
  put(buf, static_cast<uint32_t>(EnesParams::kInput));
  put(buf, static_cast<uint32_t>(EnesParams::kHidden));
  put(buf, static_cast<uint32_t>(EnesParams::kExpertHidden));
  put(buf, static_cast<uint32_t>(kNumClasses));
  put(buf, params.pen_a);
  put(buf, params.pen_b);
  put(buf, params.pen_c);
  put(buf, params.cosine_sign);
  put(buf, params.train_seed);
  const auto blocks = params.blocks();
  put(buf, static_cast<uint32_t>(blocks.size()));
  for (const Tensor* t : blocks) {
    put(buf, static_cast<uint32_t>(t->rows()));
    put(buf, static_cast<uint32_t>(t->cols()));
    buf.append(reinterpret_cast<const char*>(t->data()), t->size() * sizeof(double));
  }
  atomic_write(path, buf);
}

EnesParams load_params(const std::string& path) {
  const std::string buf = read_file(path);
  if (buf.size() < 8 || std::memcmp(buf.data(), kParamMagic, 8) != 0)
    throw DataError("parameter file: bad magic in " + path);
  size_t off = 8;
  const auto version = take<uint32_t>(buf, off);
  if (version != kParamVersion)
    throw DataError("parameter file: unsupported version " + std::to_string(version));
  const auto input = take<uint32_t>(buf, off);
  const auto hidden = take<uint32_t>(buf, off);
  const auto expert_hidden = take<uint32_t>(buf, off);
  const auto classes = take<uint32_t>(buf, off);
  if (input != EnesParams::kInput || hidden != EnesParams::kHidden ||
      expert_hidden != EnesParams::kExpertHidden || classes != kNumClasses)
    throw DataError("parameter file: architecture mismatch (" + std::to_string(input) + "/" +
                    std::to_string(hidden) + "/" + std::to_string(expert_hidden) + "/" +
                    std::to_string(classes) + ")");

  EnesParams p = init_params(0);
  p.pen_a = take<double>(buf, off);
  p.pen_b = take<double>(buf, off);
  p.pen_c = take<double>(buf, off);
  p.cosine_sign = take<double>(buf, off);
  p.train_seed = take<uint64_t>(buf, off);
  const auto nblocks = take<uint32_t>(buf, off);
  auto blocks = p.blocks();
  if (nblocks != blocks.size()) throw DataError("parameter file: block count mismatch");
  for (Tensor* t : blocks) {
    const auto rows = take<uint32_t>(buf, off);
    const auto cols = take<uint32_t>(buf, off);
    if (rows != static_cast<uint32_t>(t->rows()) || cols != static_cast<uint32_t>(t->cols()))
      throw DataError("parameter file: architecture mismatch in block shape");
    const size_t bytes = static_cast<size_t>(rows) * cols * sizeof(double);
    if (off + bytes > buf.size()) throw DataError("parameter file: unexpected end of file");
    std::memcpy(t->data(), buf.data() + off, bytes);
    off += bytes;
  }
  if (off != buf.size()) throw DataError("parameter file: trailing bytes");
  return p;
}

}  // namespace enes
