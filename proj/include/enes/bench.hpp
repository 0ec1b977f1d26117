#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "enes/baselines.hpp"
#include "enes/metrics.hpp"
#include "enes/optimizer.hpp"

namespace enes {

struct DatasetSpec {
  enum class Kind { MmSynthetic, External };
  std::string tag;
  Kind kind = Kind::MmSynthetic;
  int d = 11;              // mm-synthetic only
  std::string obs_path;    // external only
  std::string truth_path;  // external only
};

// Declarative benchmark description. Training data is always synthetic and
// drawn from seeds disjoint from the evaluation seeds.
struct BenchSpec {
  std::vector<std::string> methods;  // subset of {enes, pearson, pc}
  std::vector<DatasetSpec> datasets;
  int runs = 10;
  uint64_t eval_seed = 9000;

  int mm_samples = 1000;
  double mm_edge_prob = 0.0;  // 0 = auto density for the node count
  MmConfig mm;

  std::string model_path;  // optional pretrained parameters
  uint64_t train_seed = 1;
  int train_graphs = 36;
  int train_d = 11;
  double train_edge_prob = 0.31;
  int train_samples = 600;
  TrainConfig train;

  double vote_threshold = 0.35;
  std::optional<size_t> triplet_cap = 20000;
  double pearson_threshold = 0.3;
  PcConfig pc;

  int jobs = 1;
};

// Expected edge count around 17/30/60 at d = 11/25/50.
double auto_mm_edge_prob(int d);

BenchSpec parse_bench_spec(const std::string& path);
// Throws on invalid method names, missing datasets/files, or overlapping
// training and evaluation seed ranges.
void validate_spec(const BenchSpec& spec);

struct BenchCell {
  std::string method;
  std::string dataset;
  int d = 0;
  int runs = 0;
  MetricReport mean;
  double seconds = 0.0;
};

// Mixed linear/nonlinear/MM corpus on random DAGs drawn from the training
// seed range.
TripletDataset build_training_corpus(const BenchSpec& spec);

// Trains (or loads) the model once when requested, then evaluates every
// (method, dataset) cell over `runs` seeds and averages the reports.
std::vector<BenchCell> run_benchmark(const BenchSpec& spec, std::ostream& log);

void print_table(const std::vector<BenchCell>& cells, std::ostream& out);
void write_results_csv(const std::string& path, const std::vector<BenchCell>& cells);
std::vector<BenchCell> parse_results_csv(const std::string& path);

}  // namespace enes
