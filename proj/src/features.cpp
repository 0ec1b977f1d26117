#include "enes/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace enes {

namespace {
constexpr double kVarEps = 1e-12;

// Zero-mean unit-variance copy, or all-zeros for (near) constant input.
// Returns true when degenerate.
bool normalize(std::vector<double>& v) {
  const int n = static_cast<int>(v.size());
  double m = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double var = 0.0;
  for (double x : v) var += (x - m) * (x - m);
  var /= n;
  if (var < kVarEps) {
    std::fill(v.begin(), v.end(), 0.0);
    return true;
  }
  const double inv = 1.0 / std::sqrt(var);
  for (double& x : v) x = (x - m) * inv;
  return false;
}

// Average ranks with ties sharing the mean of their positions.
std::vector<double> ranks_of(const double* data, int n) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [data](int a, int b) { return data[a] < data[b]; });
  std::vector<double> r(n);
  int p = 0;
  while (p < n) {
    int q = p;
    while (q + 1 < n && data[idx[q + 1]] == data[idx[p]]) ++q;
    const double avg = 0.5 * (p + q) + 1.0;
    for (int t = p; t <= q; ++t) r[idx[t]] = avg;
    p = q + 1;
  }
  return r;
}
}  // namespace

TripletFeaturizer::TripletFeaturizer(const ObservationMatrix& input) : d_(input.d()), T_(input.T()) {
  if (T_ < 8) throw std::invalid_argument("too few samples");
  ObservationMatrix obs = input;
  obs.standardize_rows();

  rows_.resize(d_);
  for (int v = 0; v < d_; ++v) {
    RowStats& rs = rows_[v];
    const double* r = obs.row(v);
    rs.raw.assign(r, r + T_);
    rs.degenerate = normalize(rs.raw);  // no-op scaling unless degenerate

    rs.rank = ranks_of(r, T_);
    normalize(rs.rank);

    rs.abs.resize(T_);
    rs.sq.resize(T_);
    rs.sign.resize(T_);
    for (int t = 0; t < T_; ++t) {
      rs.abs[t] = std::fabs(r[t]);
      rs.sq[t] = r[t] * r[t];
      rs.sign[t] = r[t] >= 0.0 ? 1.0 : -1.0;
    }
    normalize(rs.abs);
    normalize(rs.sq);

    if (!rs.degenerate) {
      double m3 = 0.0, m4 = 0.0;
      for (int t = 0; t < T_; ++t) {
        const double x = rs.raw[t];
        m3 += x * x * x;
        m4 += x * x * x * x;
      }
      rs.skewness = m3 / T_;
      rs.kurtosis = m4 / T_ - 3.0;
    }
  }
}

double TripletFeaturizer::pair_stat(const std::vector<double>& a,
                                    const std::vector<double>& b) const {
  double s = 0.0;
  for (int t = 0; t < T_; ++t) s += a[t] * b[t];
  return s / T_;
}

void TripletFeaturizer::pair_features(int a, int b, double* out) const {
  const RowStats& ra = rows_[a];
  const RowStats& rb = rows_[b];
  if (ra.degenerate || rb.degenerate) {
    std::fill(out, out + 5, 0.0);
    return;
  }
  out[0] = pair_stat(ra.raw, rb.raw);
  out[1] = pair_stat(ra.rank, rb.rank);
  out[2] = pair_stat(ra.abs, rb.abs);
  out[3] = pair_stat(ra.sq, rb.sq);
  out[4] = 0.5 * pair_stat(ra.sign, rb.sign);  // agreement rate - 0.5
}

TripletFeatures TripletFeaturizer::features(int i, int j, int k) const {
  if (i < 0 || j < 0 || k < 0 || i >= d_ || j >= d_ || k >= d_)
    throw std::out_of_range("featurizer: node index out of range");
  TripletFeatures f{};
  pair_features(i, j, f.data());
  pair_features(j, k, f.data() + 5);
  pair_features(i, k, f.data() + 10);
  f[15] = rows_[i].skewness;
  f[16] = rows_[j].skewness;
  f[17] = rows_[k].skewness;
  f[18] = rows_[i].kurtosis;
  f[19] = rows_[j].kurtosis;
  f[20] = rows_[k].kurtosis;
  return f;
}

double TripletFeaturizer::raw_correlation(int a, int b) const {
  if (rows_[a].degenerate || rows_[b].degenerate) return 0.0;
  return pair_stat(rows_[a].raw, rows_[b].raw);
}

TripletFeatures featurize(const std::vector<double>& block, int T) {
  if (T < 8) throw std::invalid_argument("too few samples");
  if (block.size() != static_cast<size_t>(3) * T)
    throw std::invalid_argument("featurize: block must be 3 x T");
  ObservationMatrix obs(3, T);
  for (int v = 0; v < 3; ++v)
    for (int t = 0; t < T; ++t) obs.at(v, t) = block[static_cast<size_t>(v) * T + t];
  return TripletFeaturizer(obs).features(0, 1, 2);
}

}  // namespace enes
