#include "enes/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "enes/errors.hpp"
#include "enes/io.hpp"
#include "enes/rng.hpp"

namespace enes {

namespace {
constexpr double kVarEps = 1e-12;
constexpr int kMinSamples = 8;

double apply_nonlinearity(int which, double x) {
  switch (which) {
    case 0: return std::tanh(x);
    case 1: return std::sin(x);
    default: return x * x;
  }
}
}  // namespace

void ObservationMatrix::set_names(std::vector<std::string> names) {
  if (!names.empty() && static_cast<int>(names.size()) != d_)
    throw std::invalid_argument("set_names: expected " + std::to_string(d_) + " names");
  names_ = std::move(names);
}

void ObservationMatrix::standardize_rows() {
  for (int v = 0; v < d_; ++v) {
    double* r = row(v);
    double m = 0.0;
    for (int t = 0; t < T_; ++t) m += r[t];
    m /= T_;
    double var = 0.0;
    for (int t = 0; t < T_; ++t) var += (r[t] - m) * (r[t] - m);
    var /= T_;
    if (var < kVarEps) {
      std::fill(r, r + T_, 0.0);
    } else {
      const double inv = 1.0 / std::sqrt(var);
      for (int t = 0; t < T_; ++t) r[t] = (r[t] - m) * inv;
    }
  }
}

bool ObservationMatrix::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

ObservationMatrix sample_sem(const DirectedGraph& g, const SemConfig& cfg, int T, uint64_t seed) {
  if (!g.is_acyclic()) throw DataError("SEM requires a DAG");
  if (T < kMinSamples) throw std::invalid_argument("sample_sem: T must be >= 8");
  Rng rng(seed);
  const int d = g.d();

  // Edge weights in row-major edge order, then per-node nonlinearities,
  // then noise in topological order: a fixed draw sequence per seed.
  std::vector<double> w(static_cast<size_t>(d) * d, 0.0);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      if (g.edge(a, b)) {
        const double mag = rng.uniform(cfg.weight_min, cfg.weight_max);
        w[static_cast<size_t>(a) * d + b] = rng.bernoulli(0.5) ? mag : -mag;
      }
  std::vector<int> f_of(d, 0), g_of(d, 0);
  if (cfg.kind == SemKind::Nonlinear)
    for (int v = 0; v < d; ++v) {
      f_of[v] = static_cast<int>(rng.bounded(3));
      g_of[v] = static_cast<int>(rng.bounded(3));
    }

  ObservationMatrix obs(d, T);
  for (int node : g.topological_order()) {
    std::vector<int> parents;
    for (int p = 0; p < d; ++p)
      if (g.edge(p, node)) parents.push_back(p);
    double* out = obs.row(node);
    for (int t = 0; t < T; ++t) {
      double acc = 0.0;
      for (int p : parents) {
        const double xp = obs.at(p, t);
        const double gp = cfg.kind == SemKind::Linear ? xp : apply_nonlinearity(g_of[p], xp);
        acc += w[static_cast<size_t>(p) * d + node] * gp;
      }
      if (cfg.kind == SemKind::Nonlinear && !parents.empty())
        acc = apply_nonlinearity(f_of[node], acc);
      out[t] = acc + cfg.noise_std * rng.normal();
    }
  }
  if (!obs.all_finite()) throw NumericError("sample_sem produced non-finite values");
  return obs;
}

double mm_production(double x, double v_max, double k_m) { return v_max * x / (k_m + x); }

ObservationMatrix simulate_mm(const DirectedGraph& g, const MmConfig& cfg, int T, uint64_t seed) {
  if (!g.is_acyclic()) throw DataError("MM simulation requires a DAG");
  if (T < kMinSamples) throw std::invalid_argument("simulate_mm: T must be >= 8");
  if (cfg.dt * cfg.decay >= 1.0)
    throw std::invalid_argument("simulate_mm: unstable config, dt*decay must be < 1");
  if (cfg.v_max <= 0.0 || cfg.k_m <= 0.0 || cfg.decay <= 0.0 || cfg.dt <= 0.0)
    throw std::invalid_argument("simulate_mm: rates must be positive");

  Rng rng(seed);
  const int d = g.d();
  std::vector<std::vector<int>> parents(d);
  for (int b = 0; b < d; ++b)
    for (int a = 0; a < d; ++a)
      if (g.edge(a, b)) parents[b].push_back(a);

  std::vector<double> x(d, 0.0), next(d, 0.0);
  for (const auto& [node, value] : cfg.clamp) x[node] = value;
  const double sq_dt = std::sqrt(cfg.dt);

  ObservationMatrix obs(d, T);
  const int total = cfg.burn_in + T;
  for (int step = 0; step < total; ++step) {
    for (int j = 0; j < d; ++j) {
      double prod = 0.0;
      for (int p : parents[j]) prod += mm_production(x[p], cfg.v_max, cfg.k_m);
      double v = x[j] + cfg.dt * (prod - cfg.decay * x[j]);
      if (cfg.noise_std > 0.0) v += cfg.noise_std * sq_dt * rng.normal();
      next[j] = std::max(v, 0.0);
    }
    for (const auto& [node, value] : cfg.clamp) next[node] = value;
    x = next;
    if (step >= cfg.burn_in)
      for (int j = 0; j < d; ++j) obs.at(j, step - cfg.burn_in) = x[j];
  }
  if (!obs.all_finite()) throw NumericError("simulate_mm produced non-finite values");
  return obs;
}

std::array<size_t, 9> TripletDataset::class_counts() const {
  std::array<size_t, 9> counts{};
  for (const auto& s : samples) ++counts[s.label];
  return counts;
}

TripletDataset build_triplet_dataset(
    const std::vector<std::pair<const DirectedGraph*, const ObservationMatrix*>>& inputs,
    const DatasetConfig& cfg, uint64_t seed, std::string provenance) {
  if (inputs.empty()) throw DataError("build_triplet_dataset: no input graphs");
  Rng rng(seed);
  TripletDataset ds;
  ds.provenance = std::move(provenance);

  int source = 0;
  for (const auto& [graph, raw_obs] : inputs) {
    if (graph->d() != raw_obs->d())
      throw DataError("build_triplet_dataset: observation dimension does not match graph");
    ObservationMatrix obs = *raw_obs;
    obs.standardize_rows();
    const int T = obs.T();
    const auto triplets = enumerate_triplets(graph->d(), cfg.triplet_cap, rng.next_u64());

    auto pearson = [&obs, T](int a, int b) {
      // Rows are standardized; zero-variance rows are all-zero.
      double s = 0.0;
      const double* ra = obs.row(a);
      const double* rb = obs.row(b);
      for (int t = 0; t < T; ++t) s += ra[t] * rb[t];
      return s / T;
    };
    auto make_sample = [&](int i, int j, int k, int label) {
      TripletSample s;
      s.source = source;
      s.i = i;
      s.j = j;
      s.k = k;
      s.label = label;
      s.T = T;
      s.block.resize(static_cast<size_t>(3) * T);
      std::memcpy(s.block.data(), obs.row(i), sizeof(double) * T);
      std::memcpy(s.block.data() + T, obs.row(j), sizeof(double) * T);
      std::memcpy(s.block.data() + 2 * T, obs.row(k), sizeof(double) * T);
      s.r_ij = pearson(i, j);
      s.r_jk = pearson(j, k);
      s.r_ik = pearson(i, k);
      return s;
    };

    for (const auto& t : triplets) {
      const int label = motif_label(*graph, t);
      ds.samples.push_back(make_sample(t.i, t.j, t.k, label));
      if (cfg.mirror_augment)
        ds.samples.push_back(make_sample(t.k, t.j, t.i, motif_mirror(label)));
    }
    ++source;
  }

  // Downsample the combinatorially dominant no-edge class.
  auto counts = ds.class_counts();
  size_t cap;
  if (cfg.class0_cap) {
    cap = *cfg.class0_cap;
  } else {
    std::array<size_t, 8> rest;
    std::copy(counts.begin() + 1, counts.end(), rest.begin());
    std::sort(rest.begin(), rest.end());
    const size_t median = (rest[3] + rest[4]) / 2;
    if (median == 0) return ds;  // nothing to calibrate against
    cap = 2 * median;
  }
  if (counts[0] > cap) {
    std::vector<size_t> zero_idx;
    for (size_t n = 0; n < ds.samples.size(); ++n)
      if (ds.samples[n].label == 0) zero_idx.push_back(n);
    rng.shuffle(zero_idx);
    zero_idx.resize(cap);
    std::vector<bool> keep(ds.samples.size(), false);
    for (size_t n = 0; n < ds.samples.size(); ++n)
      if (ds.samples[n].label != 0) keep[n] = true;
    for (size_t n : zero_idx) keep[n] = true;
    std::vector<TripletSample> kept;
    kept.reserve(ds.samples.size());
    for (size_t n = 0; n < ds.samples.size(); ++n)
      if (keep[n]) kept.push_back(std::move(ds.samples[n]));
    ds.samples = std::move(kept);
  }
  return ds;
}

ObservationMatrix load_observations_csv(const std::string& path, char delimiter, bool has_header) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open observations file: " + path);

  std::vector<std::string> names;
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  size_t ncols = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, delimiter)) cells.push_back(cell);
    if (line.back() == delimiter) cells.push_back("");
    if (has_header && names.empty() && rows.empty()) {
      names = cells;
      ncols = cells.size();
      continue;
    }
    if (ncols == 0) ncols = cells.size();
    if (cells.size() != ncols)
      throw DataError(path + ": ragged row at line " + std::to_string(lineno) + " (expected " +
                      std::to_string(ncols) + " columns, got " + std::to_string(cells.size()) + ")");
    std::vector<double> vals(ncols);
    for (size_t c = 0; c < ncols; ++c) {
      try {
        size_t used = 0;
        vals[c] = std::stod(cells[c], &used);
        while (used < cells[c].size() && std::isspace(static_cast<unsigned char>(cells[c][used])))
          ++used;
        if (used != cells[c].size()) throw std::invalid_argument("trailing chars");
      } catch (const std::exception&) {
        throw DataError(path + ": non-numeric cell at line " + std::to_string(lineno) +
                        ", column " + std::to_string(c + 1) + ": '" + cells[c] + "'");
      }
      if (!std::isfinite(vals[c]))
        throw DataError(path + ": non-finite cell at line " + std::to_string(lineno) +
                        ", column " + std::to_string(c + 1));
    }
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw DataError(path + ": no data rows");

  const int d = static_cast<int>(ncols);
  const int T = static_cast<int>(rows.size());
  ObservationMatrix obs(d, T);
  for (int t = 0; t < T; ++t)
    for (int v = 0; v < d; ++v) obs.at(v, t) = rows[t][v];
  if (!names.empty()) obs.set_names(std::move(names));
  return obs;
}

void save_observations_csv(const std::string& path, const ObservationMatrix& obs) {
  std::ostringstream out;
  if (!obs.names().empty()) {
    for (int v = 0; v < obs.d(); ++v) {
      if (v) out << ',';
      out << obs.names()[v];
    }
    out << '\n';
  }
  for (int t = 0; t < obs.T(); ++t) {
    for (int v = 0; v < obs.d(); ++v) {
      if (v) out << ',';
      out << format_double(obs.at(v, t));
    }
    out << '\n';
  }
  atomic_write(path, out.str());
}

namespace {
constexpr char kDatasetMagic[4] = {'E', 'N', 'D', 'S'};
constexpr uint8_t kDatasetVersion = 1;

template <typename T>
void put(std::string& buf, const T& v) {
  buf.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T take(const std::string& buf, size_t& off) {
  if (off + sizeof(T) > buf.size()) throw DataError("dataset cache: unexpected end of file");
  T v;
  std::memcpy(&v, buf.data() + off, sizeof(T));
  off += sizeof(T);
  return v;
}
}  // namespace

void save_dataset(const std::string& path, const TripletDataset& ds) {
  std::string buf;
  buf.append(kDatasetMagic, 4);
  put(buf, kDatasetVersion);
  put(buf, static_cast<uint32_t>(ds.provenance.size()));
  buf.append(ds.provenance);
  put(buf, static_cast<uint64_t>(ds.samples.size()));
  for (const auto& s : ds.samples) {
    put(buf, static_cast<int32_t>(s.source));
    put(buf, static_cast<int32_t>(s.i));
    put(buf, static_cast<int32_t>(s.j));
    put(buf, static_cast<int32_t>(s.k));
    put(buf, static_cast<uint8_t>(s.label));
    put(buf, static_cast<int32_t>(s.T));
    put(buf, s.r_ij);
    put(buf, s.r_jk);
    put(buf, s.r_ik);
    buf.append(reinterpret_cast<const char*>(s.block.data()), s.block.size() * sizeof(double));
  }
  atomic_write(path, buf);
}

TripletDataset load_dataset(const std::string& path) {
  const std::string buf = read_file(path);
  if (buf.size() < 5 || std::memcmp(buf.data(), kDatasetMagic, 4) != 0)
    throw DataError("dataset cache: bad magic in " + path);
  size_t off = 4;
  const auto version = take<uint8_t>(buf, off);
  if (version != kDatasetVersion)
    throw DataError("dataset cache: unsupported version " + std::to_string(version));
  TripletDataset ds;
  const auto plen = take<uint32_t>(buf, off);
  if (off + plen > buf.size()) throw DataError("dataset cache: unexpected end of file");
  ds.provenance.assign(buf.data() + off, plen);
  off += plen;
  const auto n = take<uint64_t>(buf, off);
  ds.samples.resize(n);
  for (auto& s : ds.samples) {
    s.source = take<int32_t>(buf, off);
    s.i = take<int32_t>(buf, off);
    s.j = take<int32_t>(buf, off);
    s.k = take<int32_t>(buf, off);
    s.label = take<uint8_t>(buf, off);
    s.T = take<int32_t>(buf, off);
    s.r_ij = take<double>(buf, off);
    s.r_jk = take<double>(buf, off);
    s.r_ik = take<double>(buf, off);
    const size_t bytes = static_cast<size_t>(3) * s.T * sizeof(double);
    if (off + bytes > buf.size()) throw DataError("dataset cache: unexpected end of file");
    s.block.resize(static_cast<size_t>(3) * s.T);
    std::memcpy(s.block.data(), buf.data() + off, bytes);
    off += bytes;
  }
  return ds;
}

}  // namespace enes
