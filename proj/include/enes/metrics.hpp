#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "enes/graph.hpp"

namespace enes {

// Comparison of a predicted against a true directed graph. The accuracy
// identity acc == (d^2 - shd) / d^2 is asserted whenever a report is built.
struct MetricReport {
  double tp = 0.0;                     // ordered pairs where both graphs have the edge
  double predicted_positives = 0.0;    // edges in the prediction
  double true_positives_total = 0.0;   // edges in the truth
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double shd = 0.0;  // unordered pairs whose edge pattern differs
  double accuracy = 0.0;
  int d = 0;

  nlohmann::json to_json(const std::string& method = "", const std::string& dataset = "",
                         uint64_t seed = 0) const;
};

MetricReport evaluate(const DirectedGraph& pred, const DirectedGraph& truth);

// Arithmetic mean of every field; the accuracy identity is re-verified
// against the mean SHD.
MetricReport mean_report(const std::vector<MetricReport>& reports);

}  // namespace enes
