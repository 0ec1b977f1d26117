#include "enes/optimizer.hpp"

#include <cmath>
#include <iostream>
#include <set>
#include <sstream>

#include "enes/io.hpp"

#include "enes/errors.hpp"

namespace enes {

double temperature_at(const AnnealSchedule& schedule, int epoch) {
  if (epoch < 0) throw std::invalid_argument("temperature_at: epoch must be >= 0");
  return std::max(schedule.t0 * std::pow(schedule.alpha, epoch), schedule.floor);
}

void langevin_step(std::vector<Tensor*> params, const std::vector<Tensor>& grads,
                   const std::vector<std::string>& block_names, double lr, double temperature,
                   double grad_clip, Rng& rng) {
  if (params.size() != grads.size())
    throw std::invalid_argument("langevin_step: parameter/gradient count mismatch");

  double sq_norm = 0.0;
  for (size_t b = 0; b < grads.size(); ++b) {
    for (size_t n = 0; n < grads[b].size(); ++n) {
      const double g = grads[b][n];
      if (!std::isfinite(g)) {
        const std::string name = b < block_names.size() ? block_names[b] : std::to_string(b);
        throw NumericError("langevin_step: non-finite gradient in block '" + name + "'");
      }
      sq_norm += g * g;
    }
  }
  const double norm = std::sqrt(sq_norm);
  const double scale = (grad_clip > 0.0 && norm > grad_clip) ? grad_clip / norm : 1.0;
  const double noise_scale = temperature > 0.0 ? std::sqrt(2.0 * lr * temperature) : 0.0;

  for (size_t b = 0; b < params.size(); ++b) {
    Tensor& p = *params[b];
    const Tensor& g = grads[b];
    if (!p.same_shape(g))
      throw std::invalid_argument("langevin_step: gradient shape mismatch for block " +
                                  std::to_string(b));
    for (size_t n = 0; n < p.size(); ++n) {
      p[n] -= lr * (scale * g[n]);
      if (noise_scale > 0.0) p[n] += noise_scale * rng.normal();
    }
  }
}

void TrainLog::save_csv(const std::string& path) const {
  std::ostringstream out;
  out << "epoch,total,ce,pearson,adjacency,cosine,temperature\n";
  for (const auto& r : rows) {
    out << r.epoch << ',' << format_double(r.loss.total) << ',' << format_double(r.loss.ce) << ','
        << format_double(r.loss.pearson_pen) << ',' << format_double(r.loss.adjacency_pen) << ','
        << format_double(r.loss.cosine_pen) << ',' << format_double(r.temperature) << '\n';
  }
  atomic_write(path, out.str());
}

TrainResult train(EnesParams params, const TripletDataset& dataset, const TrainConfig& cfg) {
  if (dataset.samples.empty()) throw DataError("train: empty dataset");
  if (cfg.lr <= 0.0) throw std::invalid_argument("train: lr must be positive");
  if (cfg.batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");

  {
    std::set<int> classes;
    for (const auto& s : dataset.samples) classes.insert(s.label);
    if (classes.size() < 2)
      std::cerr << "warning: training dataset contains a single class; proceeding\n";
  }

  TrainResult result;
  result.features.reserve(dataset.samples.size());
  for (const auto& s : dataset.samples) result.features.push_back(featurize(s.block, s.T));

  params.pen_a = cfg.weights.a;
  params.pen_b = cfg.weights.b;
  params.pen_c = cfg.weights.c;
  params.cosine_sign = cfg.weights.cosine_sign;
  params.train_seed = cfg.seed;

  Rng rng(cfg.seed);
  const size_t n = dataset.samples.size();
  std::vector<size_t> order(n);
  for (size_t s = 0; s < n; ++s) order[s] = s;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double temperature = temperature_at(cfg.anneal, epoch);
    rng.shuffle(order);

    LossBreakdown epoch_mean;
    epoch_mean.weights = cfg.weights;
    size_t seen = 0;

    for (size_t start = 0; start < n; start += cfg.batch_size) {
      const size_t stop = std::min(n, start + cfg.batch_size);
      const int B = static_cast<int>(stop - start);

      Tensor feats(B, EnesParams::kInput);
      std::vector<int> labels(B);
      std::vector<double> r_ij(B), r_jk(B);
      for (int r = 0; r < B; ++r) {
        const size_t idx = order[start + r];
        const auto& f = result.features[idx];
        for (int c = 0; c < EnesParams::kInput; ++c) feats.at(r, c) = f[c];
        labels[r] = dataset.samples[idx].label;
        r_ij[r] = dataset.samples[idx].r_ij;
        r_jk[r] = dataset.samples[idx].r_jk;
      }

      Tape tape;
      const TapeForward fwd = build_forward(tape, params, feats);
      const LossBatch lb = make_loss_batch(labels, r_ij, r_jk);
      const TapeLoss tl = build_fused_loss(tape, fwd, lb, cfg.weights);
      tape.backward(tl.total);

      std::vector<Tensor> grads;
      grads.reserve(fwd.param_ids.size());
      for (int id : fwd.param_ids) grads.push_back(tape.grad(id));
      langevin_step(params.blocks(), grads, EnesParams::block_names(), cfg.lr, temperature,
                    cfg.grad_clip, rng);

      const LossBreakdown bd = tl.breakdown(tape, cfg.weights);
      epoch_mean.total += bd.total * B;
      epoch_mean.ce += bd.ce * B;
      epoch_mean.pearson_pen += bd.pearson_pen * B;
      epoch_mean.adjacency_pen += bd.adjacency_pen * B;
      epoch_mean.cosine_pen += bd.cosine_pen * B;
      seen += B;
    }

    epoch_mean.total /= seen;
    epoch_mean.ce /= seen;
    epoch_mean.pearson_pen /= seen;
    epoch_mean.adjacency_pen /= seen;
    epoch_mean.cosine_pen /= seen;
    result.log.rows.push_back({epoch, epoch_mean, temperature});

    if (cfg.checkpoint_every > 0 && !cfg.checkpoint_path.empty() &&
        (epoch + 1) % cfg.checkpoint_every == 0)
      save_params(params, cfg.checkpoint_path);
  }

  result.params = std::move(params);
  return result;
}

double classification_accuracy(const EnesParams& params,
                               const std::vector<TripletFeatures>& features,
                               const TripletDataset& dataset) {
  if (features.size() != dataset.samples.size())
    throw std::invalid_argument("classification_accuracy: feature/sample count mismatch");
  if (features.empty()) return 0.0;
  size_t hits = 0;
  for (size_t s = 0; s < features.size(); ++s)
    if (forward(params, features[s]).argmax() == dataset.samples[s].label) ++hits;
  return static_cast<double>(hits) / static_cast<double>(features.size());
}

}  // namespace enes
