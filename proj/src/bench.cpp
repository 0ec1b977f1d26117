#include "enes/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "enes/errors.hpp"
#include "enes/io.hpp"

namespace enes {

namespace {

// Decouples companion seeds (graph vs data) drawn from one base.
uint64_t mix_seed(uint64_t base, uint64_t salt) {
  uint64_t z = base + salt * 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, sep)) out.push_back(trim(tok));
  return out;
}

DatasetSpec parse_dataset_value(const std::string& value, int lineno) {
  const auto parts = split(value, ',');
  if (parts.size() < 2)
    throw DataError("bench spec line " + std::to_string(lineno) +
                    ": dataset needs 'TAG, mm|external, ...'");
  DatasetSpec ds;
  ds.tag = parts[0];
  if (parts[1] == "mm") {
    ds.kind = DatasetSpec::Kind::MmSynthetic;
  } else if (parts[1] == "external") {
    ds.kind = DatasetSpec::Kind::External;
  } else {
    throw DataError("bench spec line " + std::to_string(lineno) + ": unknown dataset kind '" +
                    parts[1] + "'");
  }
  for (size_t p = 2; p < parts.size(); ++p) {
    const auto eq = parts[p].find('=');
    if (eq == std::string::npos)
      throw DataError("bench spec line " + std::to_string(lineno) + ": expected key=value, got '" +
                      parts[p] + "'");
    const std::string key = trim(parts[p].substr(0, eq));
    const std::string val = trim(parts[p].substr(eq + 1));
    if (key == "d")
      ds.d = std::stoi(val);
    else if (key == "obs")
      ds.obs_path = val;
    else if (key == "truth")
      ds.truth_path = val;
    else
      throw DataError("bench spec line " + std::to_string(lineno) + ": unknown dataset key '" +
                      key + "'");
  }
  return ds;
}

}  // namespace

double auto_mm_edge_prob(int d) {
  // Expected edge counts near 17/30/60 at d = 11/25/50, biological-sparsity
  // ballpark, interpolated between the anchors.
  double target;
  if (d <= 11)
    target = 17.0 * d / 11.0;
  else if (d <= 25)
    target = 17.0 + (30.0 - 17.0) * (d - 11) / 14.0;
  else
    target = 30.0 + (60.0 - 30.0) * (d - 25) / 25.0;
  const double pairs = static_cast<double>(d) * (d - 1) / 2.0;
  return std::clamp(target / pairs, 0.0, 0.6);
}

BenchSpec parse_bench_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open bench spec: " + path);
  BenchSpec spec;
  spec.methods.clear();
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw DataError("bench spec line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "methods") {
        for (const auto& m : split(value, ',')) spec.methods.push_back(m);
      } else if (key == "dataset") {
        spec.datasets.push_back(parse_dataset_value(value, lineno));
      } else if (key == "runs") {
        spec.runs = std::stoi(value);
      } else if (key == "eval_seed") {
        spec.eval_seed = std::stoull(value);
      } else if (key == "mm_samples") {
        spec.mm_samples = std::stoi(value);
      } else if (key == "mm_edge_prob") {
        spec.mm_edge_prob = std::stod(value);
      } else if (key == "model") {
        spec.model_path = value;
      } else if (key == "train_seed") {
        spec.train_seed = std::stoull(value);
      } else if (key == "train_graphs") {
        spec.train_graphs = std::stoi(value);
      } else if (key == "train_d") {
        spec.train_d = std::stoi(value);
      } else if (key == "train_edge_prob") {
        spec.train_edge_prob = std::stod(value);
      } else if (key == "train_samples") {
        spec.train_samples = std::stoi(value);
      } else if (key == "epochs") {
        spec.train.epochs = std::stoi(value);
      } else if (key == "lr") {
        spec.train.lr = std::stod(value);
      } else if (key == "batch_size") {
        spec.train.batch_size = std::stoi(value);
      } else if (key == "t0") {
        spec.train.anneal.t0 = std::stod(value);
      } else if (key == "alpha") {
        spec.train.anneal.alpha = std::stod(value);
      } else if (key == "temp_floor") {
        spec.train.anneal.floor = std::stod(value);
      } else if (key == "grad_clip") {
        spec.train.grad_clip = std::stod(value);
      } else if (key == "weight_a") {
        spec.train.weights.a = std::stod(value);
      } else if (key == "weight_b") {
        spec.train.weights.b = std::stod(value);
      } else if (key == "weight_c") {
        spec.train.weights.c = std::stod(value);
      } else if (key == "cosine_sign") {
        spec.train.weights.cosine_sign = std::stod(value);
      } else if (key == "vote_threshold") {
        spec.vote_threshold = std::stod(value);
      } else if (key == "triplet_cap") {
        const long cap = std::stol(value);
        spec.triplet_cap = cap > 0 ? std::optional<size_t>(cap) : std::nullopt;
      } else if (key == "pearson_threshold") {
        spec.pearson_threshold = std::stod(value);
      } else if (key == "pc_alpha") {
        spec.pc.alpha = std::stod(value);
      } else if (key == "pc_max_cond") {
        spec.pc.max_cond_size = std::stoi(value);
      } else if (key == "jobs") {
        spec.jobs = std::stoi(value);
      } else {
        throw DataError("bench spec line " + std::to_string(lineno) + ": unknown key '" + key +
                        "'");
      }
    } catch (const std::invalid_argument&) {
      throw DataError("bench spec line " + std::to_string(lineno) + ": bad value for '" + key +
                      "'");
    }
  }
  spec.train.seed = spec.train_seed;
  return spec;
}

void validate_spec(const BenchSpec& spec) {
  if (spec.methods.empty()) throw DataError("bench spec: at least one method required");
  for (const auto& m : spec.methods)
    if (m != "enes" && m != "pearson" && m != "pc")
      throw DataError("bench spec: unknown method '" + m + "'");
  if (spec.datasets.empty()) throw DataError("bench spec: at least one dataset required");
  for (const auto& ds : spec.datasets) {
    if (ds.kind == DatasetSpec::Kind::External) {
      if (ds.obs_path.empty() || ds.truth_path.empty())
        throw DataError("bench spec: external dataset '" + ds.tag +
                        "' needs both obs= and truth= paths");
      if (!std::filesystem::exists(ds.obs_path))
        throw DataError("bench spec: missing observations file " + ds.obs_path);
      if (!std::filesystem::exists(ds.truth_path))
        throw DataError("bench spec: missing truth file " + ds.truth_path);
    } else if (ds.d < 3) {
      throw DataError("bench spec: mm dataset '" + ds.tag + "' needs d >= 3");
    }
  }
  if (spec.runs < 1) throw DataError("bench spec: runs must be >= 1");

  const bool needs_training =
      spec.model_path.empty() &&
      std::find(spec.methods.begin(), spec.methods.end(), "enes") != spec.methods.end();
  if (needs_training) {
    // Leakage guard: training graph seeds and evaluation graph seeds must be
    // disjoint ranges.
    const uint64_t t0 = spec.train_seed, t1 = spec.train_seed + spec.train_graphs;
    const uint64_t e0 = spec.eval_seed, e1 = spec.eval_seed + spec.runs;
    if (t0 < e1 && e0 < t1)
      throw DataError("bench spec: training seeds [" + std::to_string(t0) + "," +
                      std::to_string(t1) + ") overlap evaluation seeds [" + std::to_string(e0) +
                      "," + std::to_string(e1) + ")");
  }
  if (!spec.model_path.empty() && !std::filesystem::exists(spec.model_path))
    throw DataError("bench spec: missing model file " + spec.model_path);
}

TripletDataset build_training_corpus(const BenchSpec& spec) {
  std::vector<DirectedGraph> graphs(spec.train_graphs);
  std::vector<ObservationMatrix> observations(spec.train_graphs);
  for (int g = 0; g < spec.train_graphs; ++g) {
    const uint64_t seed = spec.train_seed + static_cast<uint64_t>(g);
    graphs[g] = sample_random_dag(spec.train_d, spec.train_edge_prob, seed);
    const uint64_t data_seed = mix_seed(seed, 1);
    switch (g % 3) {
      case 0: {
        SemConfig cfg;
        cfg.kind = SemKind::Linear;
        observations[g] = sample_sem(graphs[g], cfg, spec.train_samples, data_seed);
        break;
      }
      case 1: {
        SemConfig cfg;
        cfg.kind = SemKind::Nonlinear;
        observations[g] = sample_sem(graphs[g], cfg, spec.train_samples, data_seed);
        break;
      }
      default:
        observations[g] = simulate_mm(graphs[g], spec.mm, spec.train_samples, data_seed);
    }
  }
  std::vector<std::pair<const DirectedGraph*, const ObservationMatrix*>> inputs;
  for (int g = 0; g < spec.train_graphs; ++g) inputs.emplace_back(&graphs[g], &observations[g]);
  DatasetConfig cfg;
  return build_triplet_dataset(inputs, cfg, mix_seed(spec.train_seed, 2), "mixed");
}

std::vector<BenchCell> run_benchmark(const BenchSpec& spec, std::ostream& log) {
  validate_spec(spec);

  const bool wants_enes =
      std::find(spec.methods.begin(), spec.methods.end(), "enes") != spec.methods.end();
  EnesParams params;
  if (wants_enes) {
    if (!spec.model_path.empty()) {
      params = load_params(spec.model_path);
      log << "loaded model from " << spec.model_path << " (" << params.parameter_count()
          << " parameters)\n";
    } else {
      log << "building training corpus (" << spec.train_graphs << " graphs, d=" << spec.train_d
          << ")...\n";
      const TripletDataset corpus = build_training_corpus(spec);
      const auto counts = corpus.class_counts();
      log << "corpus: " << corpus.samples.size() << " triplets, class counts [";
      for (int c = 0; c < 9; ++c) log << (c ? " " : "") << counts[c];
      log << "]\n";
      TrainConfig tc = spec.train;
      tc.seed = spec.train_seed;
      log << "training " << tc.epochs << " epochs...\n";
      TrainResult tr = train(init_params(mix_seed(spec.train_seed, 3)), corpus, tc);
      params = std::move(tr.params);
      log << "parameters: " << params.parameter_count() << ", final loss "
          << tr.log.rows.back().loss.total << ", train accuracy "
          << classification_accuracy(params, tr.features, corpus) << "\n";
    }
  }

  std::vector<BenchCell> cells;
  for (const auto& ds : spec.datasets) {
    // Per-run data built once and shared by every method.
    struct RunData {
      DirectedGraph truth;
      ObservationMatrix obs;
    };
    std::vector<RunData> run_data(spec.runs);

    ObservationMatrix external_obs;
    DirectedGraph external_truth;
    if (ds.kind == DatasetSpec::Kind::External) {
      external_obs = load_observations_csv(ds.obs_path);
      external_truth = DirectedGraph::load(ds.truth_path);
      if (external_obs.d() != external_truth.d())
        throw DataError("dataset '" + ds.tag + "': observation dimension " +
                        std::to_string(external_obs.d()) + " does not match truth dimension " +
                        std::to_string(external_truth.d()));
    }

    const double edge_prob =
        spec.mm_edge_prob > 0.0 ? spec.mm_edge_prob : auto_mm_edge_prob(ds.d);
    for (int r = 0; r < spec.runs; ++r) {
      if (ds.kind == DatasetSpec::Kind::External) {
        run_data[r].truth = external_truth;
        run_data[r].obs = external_obs;
      } else {
        const uint64_t seed = spec.eval_seed + static_cast<uint64_t>(r);
        run_data[r].truth = sample_random_dag(ds.d, edge_prob, seed);
        run_data[r].obs = simulate_mm(run_data[r].truth, spec.mm, spec.mm_samples, mix_seed(seed, 1));
      }
    }

    for (const auto& method : spec.methods) {
      BenchCell cell;
      cell.method = method;
      cell.dataset = ds.tag;
      cell.d = run_data.front().truth.d();
      cell.runs = spec.runs;

      const auto started = std::chrono::steady_clock::now();
      std::vector<MetricReport> reports(spec.runs);
      std::atomic<int> next{0};
      auto worker = [&]() {
        for (int r = next.fetch_add(1); r < spec.runs; r = next.fetch_add(1)) {
          DirectedGraph pred;
          if (method == "enes") {
            pred = predict_graph(params, run_data[r].obs, spec.triplet_cap, spec.vote_threshold,
                                 spec.eval_seed + static_cast<uint64_t>(r));
          } else if (method == "pearson") {
            pred = pearson_baseline(run_data[r].obs, spec.pearson_threshold);
          } else {
            pred = pc_algorithm(run_data[r].obs, spec.pc);
          }
          reports[r] = evaluate(pred, run_data[r].truth);
        }
      };
      const int jobs = std::max(1, std::min(spec.jobs, spec.runs));
      if (jobs == 1) {
        worker();
      } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
      }
      cell.mean = mean_report(reports);
      cell.seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      log << "cell " << method << " x " << ds.tag << ": shd " << cell.mean.shd << ", precision "
          << cell.mean.precision << " (" << cell.seconds << " s)\n";
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

void print_table(const std::vector<BenchCell>& cells, std::ostream& out) {
  out << std::left << std::setw(10) << "method" << std::setw(12) << "dataset" << std::right
      << std::setw(5) << "d" << std::setw(6) << "runs" << std::setw(10) << "accuracy"
      << std::setw(11) << "precision" << std::setw(9) << "recall" << std::setw(9) << "f1"
      << std::setw(9) << "shd" << std::setw(10) << "seconds" << "\n";
  for (const auto& c : cells) {
    out << std::left << std::setw(10) << c.method << std::setw(12) << c.dataset << std::right
        << std::setw(5) << c.d << std::setw(6) << c.runs << std::fixed << std::setprecision(4)
        << std::setw(10) << c.mean.accuracy << std::setw(11) << c.mean.precision << std::setw(9)
        << c.mean.recall << std::setw(9) << c.mean.f1 << std::setprecision(2) << std::setw(9)
        << c.mean.shd << std::setw(10) << c.seconds << "\n";
    out.unsetf(std::ios::fixed);
    out << std::setprecision(6);
  }
}

void write_results_csv(const std::string& path, const std::vector<BenchCell>& cells) {
  std::ostringstream out;
  out << "method,dataset,d,runs,accuracy,precision,recall,f1,shd\n";
  for (const auto& c : cells)
    out << c.method << ',' << c.dataset << ',' << c.d << ',' << c.runs << ','
        << format_double(c.mean.accuracy) << ',' << format_double(c.mean.precision) << ','
        << format_double(c.mean.recall) << ',' << format_double(c.mean.f1) << ','
        << format_double(c.mean.shd) << '\n';
  atomic_write(path, out.str());
}

std::vector<BenchCell> parse_results_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open results csv: " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("results csv: empty file");
  if (trim(line) != "method,dataset,d,runs,accuracy,precision,recall,f1,shd")
    throw DataError("results csv: unexpected header");
  std::vector<BenchCell> cells;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 9) throw DataError("results csv: malformed row '" + line + "'");
    BenchCell c;
    c.method = f[0];
    c.dataset = f[1];
    c.d = std::stoi(f[2]);
    c.runs = std::stoi(f[3]);
    c.mean.d = c.d;
    c.mean.accuracy = std::stod(f[4]);
    c.mean.precision = std::stod(f[5]);
    c.mean.recall = std::stod(f[6]);
    c.mean.f1 = std::stod(f[7]);
    c.mean.shd = std::stod(f[8]);
    cells.push_back(std::move(c));
  }
  return cells;
}

}  // namespace enes
