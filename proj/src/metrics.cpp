#include "enes/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include "enes/errors.hpp"

namespace enes {

namespace {
void check_identity(const MetricReport& r) {
  const double dd = static_cast<double>(r.d) * r.d;
  if (std::fabs(r.accuracy - (dd - r.shd) / dd) > 1e-9)
    throw NumericError("metric report violates the accuracy-SHD identity");
}
}  // namespace

MetricReport evaluate(const DirectedGraph& pred, const DirectedGraph& truth) {
  if (pred.d() != truth.d())
    throw DataError("evaluate: dimension mismatch (" + std::to_string(pred.d()) + " vs " +
                    std::to_string(truth.d()) + ")");
  const int d = pred.d();
  MetricReport r;
  r.d = d;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      if (i == j) continue;
      const bool p = pred.edge(i, j);
      const bool t = truth.edge(i, j);
      if (p) r.predicted_positives += 1.0;
      if (t) r.true_positives_total += 1.0;
      if (p && t) r.tp += 1.0;
    }
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j)
      if (pred.edge(i, j) != truth.edge(i, j) || pred.edge(j, i) != truth.edge(j, i))
        r.shd += 1.0;

  r.precision = r.predicted_positives > 0.0 ? r.tp / r.predicted_positives : 0.0;
  r.recall = r.true_positives_total > 0.0 ? r.tp / r.true_positives_total : 0.0;
  r.f1 = (r.precision + r.recall) > 0.0
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  const double dd = static_cast<double>(d) * d;
  r.accuracy = (dd - r.shd) / dd;
  check_identity(r);
  return r;
}

MetricReport mean_report(const std::vector<MetricReport>& reports) {
  if (reports.empty()) throw std::invalid_argument("mean_report: empty list");
  const int d = reports.front().d;
  MetricReport m;
  m.d = d;
  for (const auto& r : reports) {
    if (r.d != d) throw DataError("mean_report: reports have mixed dimensions");
    m.tp += r.tp;
    m.predicted_positives += r.predicted_positives;
    m.true_positives_total += r.true_positives_total;
    m.precision += r.precision;
    m.recall += r.recall;
    m.f1 += r.f1;
    m.shd += r.shd;
    m.accuracy += r.accuracy;
  }
  const double n = static_cast<double>(reports.size());
  m.tp /= n;
  m.predicted_positives /= n;
  m.true_positives_total /= n;
  m.precision /= n;
  m.recall /= n;
  m.f1 /= n;
  m.shd /= n;
  m.accuracy /= n;
  check_identity(m);
  return m;
}

nlohmann::json MetricReport::to_json(const std::string& method, const std::string& dataset,
                                     uint64_t seed) const {
  nlohmann::json j;
  if (!method.empty()) j["method"] = method;
  if (!dataset.empty()) j["dataset"] = dataset;
  j["seed"] = seed;
  j["d"] = d;
  j["tp"] = tp;
  j["predicted_positives"] = predicted_positives;
  j["true_positives_total"] = true_positives_total;
  j["precision"] = precision;
  j["recall"] = recall;
  j["f1"] = f1;
  j["shd"] = shd;
  j["accuracy"] = accuracy;
  return j;
}

}  // namespace enes
