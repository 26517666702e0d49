#pragma once

#include <functional>
#include <string>
#include <vector>

#include "socnav/model.hpp"

namespace socnav {

struct SampleEval {
  int id = 0;  // position in the dataset
  double label = 0.0;
  double prediction = 0.0;
  double abs_error = 0.0;
};

struct Histogram {
  std::vector<double> bin_edges;  // n_bins + 1 edges over [0, 1]
  std::vector<int> counts;
};

struct EvalReport {
  std::size_t size = 0;
  double mse = 0.0;
  std::vector<SampleEval> samples;
  Histogram histogram;
};

// Uniform bins over [0, 1], right-exclusive except the last; counts sum to
// the number of errors. Errors outside [0, 1] raise BoundsError.
Histogram error_histogram(const std::vector<double>& errors, int n_bins);

// Deterministic scoring of a frozen model against a labelled dataset on the
// normalized [0, 1] scale. Unlabelled samples raise ValidationError naming
// the sample.
EvalReport evaluate(const Model& m, const std::vector<Scenario>& dataset, int n_bins = 20);

// Same bookkeeping with an arbitrary scorer (stub models in tests).
EvalReport evaluate_with(const std::function<double(const Graph&)>& scorer,
                         const std::vector<Graph>& graphs, int n_bins = 20);

// rescaled = true adds 0-100 columns next to the normalized ones.
std::string eval_report_json(const EvalReport& r, bool rescaled = false);
std::string histogram_csv(const Histogram& h);

}  // namespace socnav
