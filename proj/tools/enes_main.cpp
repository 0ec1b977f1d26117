// Command line front end: generate synthetic data, train the classifier,
// predict graphs from observations, evaluate predictions, run benchmarks.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "enes/baselines.hpp"
#include "enes/bench.hpp"
#include "enes/errors.hpp"
#include "enes/io.hpp"
#include "enes/metrics.hpp"
#include "enes/optimizer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

std::string default_out_dir() {
  const char* env = std::getenv("ENES_OUT_DIR");
  return env ? env : ".";
}

struct GenerateArgs {
  std::string kind = "sem-linear";
  int d = 11;
  double edge_prob = 0.3;
  int samples = 600;
  int graphs = 1;
  uint64_t seed = 1;
  std::string out_dir;
  double noise_std = -1.0;  // generator default when negative
};

uint64_t mix(uint64_t base, uint64_t salt) {
  uint64_t z = base + salt * 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

int run_generate(const GenerateArgs& args) {
  if (args.kind != "sem-linear" && args.kind != "sem-nonlinear" && args.kind != "mm")
    throw enes::DataError("generate: --kind must be sem-linear, sem-nonlinear or mm");
  const std::string out_dir = args.out_dir.empty() ? default_out_dir() : args.out_dir;
  enes::ensure_writable_dir(out_dir);

  json manifest;
  manifest["version"] = 1;
  manifest["kind"] = args.kind;
  manifest["d"] = args.d;
  manifest["samples"] = args.samples;
  manifest["edge_prob"] = args.edge_prob;
  manifest["base_seed"] = args.seed;
  json entries = json::array();

  for (int g = 0; g < args.graphs; ++g) {
    const uint64_t seed = args.seed + static_cast<uint64_t>(g);
    enes::DirectedGraph graph = enes::sample_random_dag(args.d, args.edge_prob, seed);
    std::vector<std::string> names;
    for (int v = 0; v < args.d; ++v) names.push_back("n" + std::to_string(v));
    graph.set_names(names);

    enes::ObservationMatrix obs;
    const uint64_t data_seed = mix(seed, 1);
    if (args.kind == "mm") {
      enes::MmConfig cfg;
      if (args.noise_std >= 0.0) cfg.noise_std = args.noise_std;
      obs = enes::simulate_mm(graph, cfg, args.samples, data_seed);
    } else {
      enes::SemConfig cfg;
      cfg.kind = args.kind == "sem-linear" ? enes::SemKind::Linear : enes::SemKind::Nonlinear;
      if (args.noise_std >= 0.0) cfg.noise_std = args.noise_std;
      obs = enes::sample_sem(graph, cfg, args.samples, data_seed);
    }
    obs.set_names(names);

    char tag[16];
    std::snprintf(tag, sizeof(tag), "g%03d", g);
    const std::string obs_path = (fs::path(out_dir) / (std::string(tag) + ".csv")).string();
    const std::string truth_path = (fs::path(out_dir) / (std::string(tag) + ".json")).string();
    enes::save_observations_csv(obs_path, obs);
    graph.save(truth_path);
    entries.push_back({{"obs", std::string(tag) + ".csv"},
                       {"truth", std::string(tag) + ".json"},
                       {"seed", seed}});
  }
  manifest["entries"] = std::move(entries);
  enes::atomic_write((fs::path(out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
  std::cout << "wrote " << args.graphs << " graph(s) to " << out_dir << "\n";
  return kExitOk;
}

struct TrainArgs {
  std::string data_dir;
  std::string out = "model.enes";
  std::string log_path;
  std::string cache_out;
  int epochs = 200;
  double lr = 1e-3;
  int batch_size = 64;
  double t0 = 1e-2;
  double alpha = 0.95;
  double temp_floor = 1e-6;
  double grad_clip = 5.0;
  std::vector<double> weights = {1.0, 1.0, 1.0};
  double cosine_sign = 1.0;
  uint64_t seed = 0;
  std::optional<size_t> class0_cap;
  bool no_mirror = false;
  int checkpoint_every = 0;
};

int run_train(const TrainArgs& args) {
  const fs::path manifest_path = fs::path(args.data_dir) / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) throw enes::DataError("train: cannot open " + manifest_path.string());
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw enes::DataError("train: bad manifest: " + std::string(e.what()));
  }
  if (!manifest.contains("entries") || manifest["entries"].empty())
    throw enes::DataError("train: manifest has no entries");

  std::vector<enes::DirectedGraph> graphs;
  std::vector<enes::ObservationMatrix> observations;
  for (const auto& e : manifest["entries"]) {
    graphs.push_back(enes::DirectedGraph::load(fs::path(args.data_dir) / e["truth"].get<std::string>()));
    observations.push_back(
        enes::load_observations_csv(fs::path(args.data_dir) / e["obs"].get<std::string>()));
  }
  std::vector<std::pair<const enes::DirectedGraph*, const enes::ObservationMatrix*>> inputs;
  for (size_t g = 0; g < graphs.size(); ++g) inputs.emplace_back(&graphs[g], &observations[g]);

  enes::DatasetConfig dc;
  dc.class0_cap = args.class0_cap;
  dc.mirror_augment = !args.no_mirror;
  const std::string kind = manifest.value("kind", "mixed");
  const enes::TripletDataset dataset =
      enes::build_triplet_dataset(inputs, dc, mix(args.seed, 2), kind);
  if (!args.cache_out.empty()) enes::save_dataset(args.cache_out, dataset);

  const auto counts = dataset.class_counts();
  std::cout << "dataset: " << dataset.samples.size() << " triplets, class counts [";
  for (int c = 0; c < 9; ++c) std::cout << (c ? " " : "") << counts[c];
  std::cout << "]\n";

  enes::TrainConfig cfg;
  cfg.epochs = args.epochs;
  cfg.lr = args.lr;
  cfg.batch_size = args.batch_size;
  cfg.seed = args.seed;
  cfg.grad_clip = args.grad_clip;
  cfg.anneal = {args.t0, args.alpha, args.temp_floor};
  if (args.weights.size() != 3) throw enes::DataError("train: --weights needs three values a,b,c");
  cfg.weights = {args.weights[0], args.weights[1], args.weights[2], args.cosine_sign};
  cfg.checkpoint_every = args.checkpoint_every;
  cfg.checkpoint_path = args.out + ".ckpt";

  enes::TrainResult result = enes::train(enes::init_params(mix(args.seed, 3)), dataset, cfg);
  std::cout << "parameters: " << result.params.parameter_count() << "\n";
  if (!result.log.rows.empty())
    std::cout << "final loss: " << result.log.rows.back().loss.total << ", train accuracy: "
              << enes::classification_accuracy(result.params, result.features, dataset) << "\n";
  enes::save_params(result.params, args.out);
  result.log.save_csv(args.log_path.empty() ? args.out + ".log.csv" : args.log_path);
  std::cout << "model written to " << args.out << "\n";
  return kExitOk;
}

struct PredictArgs {
  std::string model;
  std::string obs;
  std::string out = "pred.json";
  double threshold = 0.35;
  long triplet_cap = 20000;
  uint64_t seed = 0;
  std::string method = "enes";
  double pearson_threshold = 0.3;
  double pc_alpha = 0.05;
  int pc_max_cond = 3;
};

int run_predict(const PredictArgs& args) {
  const enes::ObservationMatrix obs = enes::load_observations_csv(args.obs);
  enes::DirectedGraph pred;
  if (args.method == "enes") {
    const enes::EnesParams params = enes::load_params(args.model);
    const std::optional<size_t> cap =
        args.triplet_cap > 0 ? std::optional<size_t>(args.triplet_cap) : std::nullopt;
    pred = enes::predict_graph(params, obs, cap, args.threshold, args.seed);
  } else if (args.method == "pearson") {
    pred = enes::pearson_baseline(obs, args.pearson_threshold);
  } else if (args.method == "pc") {
    enes::PcConfig cfg;
    cfg.alpha = args.pc_alpha;
    cfg.max_cond_size = args.pc_max_cond;
    pred = enes::pc_algorithm(obs, cfg);
  } else {
    throw enes::DataError("predict: --method must be enes, pearson or pc");
  }
  pred.save(args.out);
  std::cout << "prediction (" << pred.edge_count() << " edges) written to " << args.out << "\n";
  return kExitOk;
}

struct EvalArgs {
  std::string pred;
  std::string truth;
  std::string out;
  std::string method;
  std::string dataset;
  uint64_t seed = 0;
};

int run_eval(const EvalArgs& args) {
  const enes::DirectedGraph pred = enes::DirectedGraph::load(args.pred);
  const enes::DirectedGraph truth = enes::DirectedGraph::load(args.truth);
  const enes::MetricReport report = enes::evaluate(pred, truth);
  const json j = report.to_json(args.method, args.dataset, args.seed);
  std::cout << j.dump(2) << "\n";
  if (!args.out.empty()) enes::atomic_write(args.out, j.dump(2) + "\n");
  return kExitOk;
}

struct BenchArgs {
  std::string spec;
  std::string out = "results.csv";
  int jobs = 0;
};

int run_bench(const BenchArgs& args) {
  enes::BenchSpec spec = enes::parse_bench_spec(args.spec);
  if (args.jobs > 0) spec.jobs = args.jobs;
  const auto cells = enes::run_benchmark(spec, std::cerr);
  enes::print_table(cells, std::cout);
  enes::write_results_csv(args.out, cells);
  std::cout << "results written to " << args.out << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"edge-node-edge causal motif classifier and baselines"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* cmd_gen = app.add_subcommand("generate", "write synthetic observation/truth files");
  cmd_gen->add_option("--kind", gen.kind, "sem-linear | sem-nonlinear | mm");
  cmd_gen->add_option("--d", gen.d, "node count")->check(CLI::PositiveNumber);
  cmd_gen->add_option("--edge-prob", gen.edge_prob, "edge probability")
      ->check(CLI::Range(0.0, 1.0));
  cmd_gen->add_option("--samples", gen.samples, "samples per variable");
  cmd_gen->add_option("--graphs", gen.graphs, "number of graphs")->check(CLI::PositiveNumber);
  cmd_gen->add_option("--seed", gen.seed, "base seed");
  cmd_gen->add_option("--out-dir", gen.out_dir, "output directory (default $ENES_OUT_DIR or .)");
  cmd_gen->add_option("--noise-std", gen.noise_std, "override generator noise std");

  TrainArgs tr;
  auto* cmd_train = app.add_subcommand("train", "train the classifier on generated data");
  cmd_train->add_option("--data-dir", tr.data_dir, "directory with manifest.json")->required();
  cmd_train->add_option("--out", tr.out, "output model file");
  cmd_train->add_option("--log", tr.log_path, "training log csv (default <out>.log.csv)");
  cmd_train->add_option("--cache-out", tr.cache_out, "also write the dataset cache file");
  cmd_train->add_option("--epochs", tr.epochs)->check(CLI::NonNegativeNumber);
  cmd_train->add_option("--lr", tr.lr);
  cmd_train->add_option("--batch", tr.batch_size)->check(CLI::PositiveNumber);
  cmd_train->add_option("--t0", tr.t0, "initial temperature");
  cmd_train->add_option("--alpha", tr.alpha, "temperature decay per epoch");
  cmd_train->add_option("--temp-floor", tr.temp_floor);
  cmd_train->add_option("--grad-clip", tr.grad_clip);
  cmd_train->add_option("--weights", tr.weights, "penalty weights a b c")->expected(3);
  cmd_train->add_option("--cosine-sign", tr.cosine_sign);
  cmd_train->add_option("--seed", tr.seed);
  long cap_opt = -1;
  cmd_train->add_option("--class0-cap", cap_opt, "cap for class 0 (-1 = auto)");
  cmd_train->add_flag("--no-mirror", tr.no_mirror, "disable mirror augmentation");
  cmd_train->add_option("--checkpoint-every", tr.checkpoint_every, "epochs between checkpoints");

  PredictArgs pr;
  auto* cmd_pred = app.add_subcommand("predict", "predict a graph from observations");
  cmd_pred->add_option("--model", pr.model, "trained parameter file");
  cmd_pred->add_option("--obs", pr.obs, "observations csv")->required();
  cmd_pred->add_option("--out", pr.out, "output graph json");
  cmd_pred->add_option("--threshold", pr.threshold, "vote threshold");
  cmd_pred->add_option("--triplet-cap", pr.triplet_cap, "max triplets (<=0 = all)");
  cmd_pred->add_option("--seed", pr.seed, "triplet subsample seed");
  cmd_pred->add_option("--method", pr.method, "enes | pearson | pc");
  cmd_pred->add_option("--pearson-threshold", pr.pearson_threshold);
  cmd_pred->add_option("--pc-alpha", pr.pc_alpha);
  cmd_pred->add_option("--pc-max-cond", pr.pc_max_cond);

  EvalArgs ev;
  auto* cmd_eval = app.add_subcommand("eval", "score a prediction against a truth graph");
  cmd_eval->add_option("--pred", ev.pred)->required();
  cmd_eval->add_option("--truth", ev.truth)->required();
  cmd_eval->add_option("--out", ev.out, "also write the report json here");
  cmd_eval->add_option("--method", ev.method, "metadata: method name");
  cmd_eval->add_option("--dataset", ev.dataset, "metadata: dataset tag");
  cmd_eval->add_option("--seed", ev.seed, "metadata: seed");

  BenchArgs be;
  auto* cmd_bench = app.add_subcommand("bench", "run a benchmark spec");
  cmd_bench->add_option("--spec", be.spec, "bench spec file")->required();
  cmd_bench->add_option("--out", be.out, "results csv");
  cmd_bench->add_option("--jobs", be.jobs, "worker threads for evaluation runs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (cmd_gen->parsed()) return run_generate(gen);
    if (cmd_train->parsed()) {
      if (cap_opt >= 0) tr.class0_cap = static_cast<size_t>(cap_opt);
      return run_train(tr);
    }
    if (cmd_pred->parsed()) return run_predict(pr);
    if (cmd_eval->parsed()) return run_eval(ev);
    if (cmd_bench->parsed()) return run_bench(be);
  } catch (const enes::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const enes::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
