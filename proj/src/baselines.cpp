#include "enes/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>

#include "enes/errors.hpp"

namespace enes {

namespace {

// Correlation matrix of standardized rows.
std::vector<double> correlation_matrix(const ObservationMatrix& input) {
  ObservationMatrix obs = input;
  obs.standardize_rows();
  const int d = obs.d(), T = obs.T();
  std::vector<double> corr(static_cast<size_t>(d) * d, 0.0);
  for (int a = 0; a < d; ++a) {
    corr[static_cast<size_t>(a) * d + a] = 1.0;
    for (int b = a + 1; b < d; ++b) {
      double s = 0.0;
      const double* ra = obs.row(a);
      const double* rb = obs.row(b);
      for (int t = 0; t < T; ++t) s += ra[t] * rb[t];
      s /= T;
      corr[static_cast<size_t>(a) * d + b] = s;
      corr[static_cast<size_t>(b) * d + a] = s;
    }
  }
  return corr;
}

// Gauss-Jordan inverse with partial pivoting; false on a singular matrix.
bool invert(std::vector<double>& m, int n) {
  std::vector<double> inv(static_cast<size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) inv[static_cast<size_t>(i) * n + i] = 1.0;
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::fabs(m[static_cast<size_t>(r) * n + col]) >
          std::fabs(m[static_cast<size_t>(pivot) * n + col]))
        pivot = r;
    if (std::fabs(m[static_cast<size_t>(pivot) * n + col]) < 1e-12) return false;
    if (pivot != col)
      for (int c = 0; c < n; ++c) {
        std::swap(m[static_cast<size_t>(pivot) * n + c], m[static_cast<size_t>(col) * n + c]);
        std::swap(inv[static_cast<size_t>(pivot) * n + c], inv[static_cast<size_t>(col) * n + c]);
      }
    const double diag = m[static_cast<size_t>(col) * n + col];
    for (int c = 0; c < n; ++c) {
      m[static_cast<size_t>(col) * n + c] /= diag;
      inv[static_cast<size_t>(col) * n + c] /= diag;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = m[static_cast<size_t>(r) * n + col];
      if (f == 0.0) continue;
      for (int c = 0; c < n; ++c) {
        m[static_cast<size_t>(r) * n + c] -= f * m[static_cast<size_t>(col) * n + c];
        inv[static_cast<size_t>(r) * n + c] -= f * inv[static_cast<size_t>(col) * n + c];
      }
    }
  }
  m = std::move(inv);
  return true;
}

double phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
double phi_density(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

CiTestResult fisher_z_from_corr(const std::vector<double>& corr, int d, int n, int a, int b,
                                const std::set<int>& S, double alpha) {
  if (a == b) throw std::invalid_argument("fisher_z_test: identical variables");
  const int df_guard = n - static_cast<int>(S.size()) - 3;
  if (df_guard < 1) throw std::invalid_argument("fisher_z_test: too few samples for |S|");

  CiTestResult res;
  res.a = a;
  res.b = b;
  res.conditioning = S;

  double r;
  if (S.empty()) {
    r = corr[static_cast<size_t>(a) * d + b];
  } else {
    std::vector<int> idx = {a, b};
    idx.insert(idx.end(), S.begin(), S.end());
    const int m = static_cast<int>(idx.size());
    std::vector<double> sub(static_cast<size_t>(m) * m);
    for (int r1 = 0; r1 < m; ++r1)
      for (int c1 = 0; c1 < m; ++c1)
        sub[static_cast<size_t>(r1) * m + c1] = corr[static_cast<size_t>(idx[r1]) * d + idx[c1]];
    if (!invert(sub, m)) {
      res.singular = true;
      res.independent = false;  // conservative: keep the edge
      return res;
    }
    r = -sub[1] / std::sqrt(sub[0] * sub[static_cast<size_t>(m) + 1]);
  }

  const double cap = 1.0 - 1e-12;
  r = std::clamp(r, -cap, cap);
  res.partial_corr = r;
  res.z = 0.5 * std::log((1.0 + r) / (1.0 - r));
  res.statistic = std::sqrt(static_cast<double>(df_guard)) * std::fabs(res.z);
  res.independent = res.statistic <= normal_quantile(1.0 - alpha / 2.0);
  return res;
}

// Lexicographic k-subsets of `pool`; calls fn(subset) until it returns true.
bool for_each_subset(const std::vector<int>& pool, int k,
                     const std::function<bool(const std::set<int>&)>& fn) {
  const int n = static_cast<int>(pool.size());
  if (k > n) return false;
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    std::set<int> subset;
    for (int i : idx) subset.insert(pool[i]);
    if (fn(subset)) return true;
    int pos = k - 1;
    while (pos >= 0 && idx[pos] == n - k + pos) --pos;
    if (pos < 0) return false;
    ++idx[pos];
    for (int i = pos + 1; i < k; ++i) idx[i] = idx[i - 1] + 1;
  }
}

}  // namespace

double normal_quantile(double p) {
  if (p <= 0.0 || p >= 1.0) throw std::invalid_argument("normal_quantile: p must be in (0,1)");
  // Acklam's rational approximation as the seed.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double dd[] = {7.784695709041462e-03, 3.224671290700398e-01,
                              2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((dd[0] * q + dd[1]) * q + dd[2]) * q + dd[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((dd[0] * q + dd[1]) * q + dd[2]) * q + dd[3]) * q + 1.0);
  }
  // Two Newton refinements against the exact CDF.
  for (int it = 0; it < 2; ++it) x -= (phi(x) - p) / phi_density(x);
  return x;
}

DirectedGraph pearson_baseline(const ObservationMatrix& obs, double threshold) {
  if (obs.d() < 2) throw std::invalid_argument("pearson_baseline: need at least 2 variables");
  if (obs.T() < 8) throw std::invalid_argument("pearson_baseline: need at least 8 samples");
  const auto corr = correlation_matrix(obs);
  const int d = obs.d();
  DirectedGraph g(d);
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b)
      if (std::fabs(corr[static_cast<size_t>(a) * d + b]) > threshold) {
        g.set_edge(a, b, true);
        g.set_edge(b, a, true);
      }
  if (!obs.names().empty()) g.set_names(obs.names());
  return g;
}

CiTestResult fisher_z_test(const ObservationMatrix& obs, int a, int b, const std::set<int>& S,
                           double alpha) {
  if (S.count(a) || S.count(b))
    throw std::invalid_argument("fisher_z_test: conditioning set contains a tested variable");
  return fisher_z_from_corr(correlation_matrix(obs), obs.d(), obs.T(), a, b, S, alpha);
}

DirectedGraph pc_algorithm(const ObservationMatrix& obs, const PcConfig& cfg) {
  if (obs.d() < 2) throw std::invalid_argument("pc_algorithm: need at least 2 variables");
  if (cfg.alpha <= 0.0 || cfg.alpha >= 1.0)
    throw std::invalid_argument("pc_algorithm: alpha must be in (0,1)");
  const int d = obs.d();
  const int n = obs.T();
  const auto corr = correlation_matrix(obs);

  std::vector<std::vector<bool>> skel(d, std::vector<bool>(d, false));
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      if (a != b) skel[a][b] = true;
  std::map<std::pair<int, int>, std::set<int>> sepsets;
  auto sepset_key = [](int a, int b) { return std::make_pair(std::min(a, b), std::max(a, b)); };

  // Skeleton phase, level-synchronous: adjacency snapshots are fixed per
  // level so the result does not depend on edge visiting order.
  for (int level = 0; level <= cfg.max_cond_size; ++level) {
    if (n - level - 3 < 1) break;
    const auto snapshot = skel;
    auto neighbours = [&snapshot, d](int v, int excl) {
      std::vector<int> out;
      for (int u = 0; u < d; ++u)
        if (u != excl && snapshot[v][u]) out.push_back(u);
      return out;
    };
    std::vector<std::pair<int, int>> removals;
    bool any_candidate = false;
    for (int a = 0; a < d; ++a)
      for (int b = a + 1; b < d; ++b) {
        if (!snapshot[a][b]) continue;
        const auto adj_a = neighbours(a, b);
        const auto adj_b = neighbours(b, a);
        if (static_cast<int>(std::max(adj_a.size(), adj_b.size())) >= level) any_candidate = true;
        bool separated = false;
        std::set<int> sep;
        auto try_set = [&](const std::set<int>& S) {
          const auto res = fisher_z_from_corr(corr, d, n, a, b, S, cfg.alpha);
          if (res.independent) {
            separated = true;
            sep = S;
            return true;
          }
          return false;
        };
        for_each_subset(adj_a, level, try_set);
        if (!separated) for_each_subset(adj_b, level, try_set);
        if (separated) {
          removals.emplace_back(a, b);
          sepsets[sepset_key(a, b)] = sep;
        }
      }
    for (const auto& [a, b] : removals) {
      skel[a][b] = false;
      skel[b][a] = false;
    }
    if (!any_candidate) break;
  }

  // dir[a][b] marks orientation a -> b on a skeleton edge.
  std::vector<std::vector<bool>> dir(d, std::vector<bool>(d, false));

  if (cfg.orient_rules) {
    // v-structures: a -> c <- b for nonadjacent (a,b) whose separating set
    // excludes the common neighbour c.
    for (int a = 0; a < d; ++a)
      for (int b = a + 1; b < d; ++b) {
        if (skel[a][b]) continue;
        const auto it = sepsets.find(sepset_key(a, b));
        if (it == sepsets.end()) continue;
        for (int c = 0; c < d; ++c) {
          if (c == a || c == b || !skel[a][c] || !skel[b][c]) continue;
          if (it->second.count(c)) continue;
          dir[a][c] = true;
          dir[b][c] = true;
        }
      }

    auto undirected = [&](int a, int b) { return skel[a][b] && !dir[a][b] && !dir[b][a]; };
    auto oriented = [&](int a, int b) { return skel[a][b] && dir[a][b] && !dir[b][a]; };

    // Meek rules R1-R3 to closure.
    bool changed = true;
    while (changed) {
      changed = false;
      // R1: a -> b, b - c, a and c nonadjacent => b -> c.
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
          if (a == b || !oriented(a, b)) continue;
          for (int c = 0; c < d; ++c)
            if (c != a && c != b && undirected(b, c) && !skel[a][c]) {
              dir[b][c] = true;
              changed = true;
            }
        }
      // R2: a -> b -> c with a - c => a -> c.
      for (int a = 0; a < d; ++a)
        for (int c = 0; c < d; ++c) {
          if (a == c || !undirected(a, c)) continue;
          for (int b = 0; b < d; ++b)
            if (b != a && b != c && oriented(a, b) && oriented(b, c)) {
              dir[a][c] = true;
              changed = true;
              break;
            }
        }
      // R3: a - b with a - c, a - e, c -> b, e -> b, c and e nonadjacent => a -> b.
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
          if (a == b || !undirected(a, b)) continue;
          bool fire = false;
          for (int c = 0; c < d && !fire; ++c) {
            if (c == a || c == b || !undirected(a, c) || !oriented(c, b)) continue;
            for (int e = c + 1; e < d && !fire; ++e) {
              if (e == a || e == b || !undirected(a, e) || !oriented(e, b)) continue;
              if (!skel[c][e]) fire = true;
            }
          }
          if (fire) {
            dir[a][b] = true;
            changed = true;
          }
        }
    }
  }

  // Directed output: oriented edges one way, everything else both ways.
  DirectedGraph g(d);
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b) {
      if (!skel[a][b]) continue;
      const bool ab = dir[a][b], ba = dir[b][a];
      if (ab && !ba) {
        g.set_edge(a, b, true);
      } else if (ba && !ab) {
        g.set_edge(b, a, true);
      } else {
        g.set_edge(a, b, true);
        g.set_edge(b, a, true);
      }
    }
  if (!obs.names().empty()) g.set_names(obs.names());
  return g;
}

}  // namespace enes
