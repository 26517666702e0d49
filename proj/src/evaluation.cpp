#include "socnav/evaluation.hpp"

#include <cmath>

#include <json.hpp>

namespace socnav {

Histogram error_histogram(const std::vector<double>& errors, int n_bins) {
  if (n_bins < 1) throw ConfigError("histogram needs n_bins >= 1", "bins");
  Histogram h;
  h.bin_edges.resize(static_cast<std::size_t>(n_bins) + 1);
  for (int i = 0; i <= n_bins; ++i)
    h.bin_edges[static_cast<std::size_t>(i)] = static_cast<double>(i) / n_bins;
  h.counts.assign(static_cast<std::size_t>(n_bins), 0);
  for (std::size_t i = 0; i < errors.size(); ++i) {
    const double e = errors[i];
    if (!(e >= 0.0) || !(e <= 1.0))
      throw BoundsError("error " + std::to_string(e) + " at sample " + std::to_string(i) +
                        " outside [0, 1]", "errors");
    const int bin = std::min(n_bins - 1, static_cast<int>(std::floor(e * n_bins)));
    ++h.counts[static_cast<std::size_t>(bin)];
  }
  return h;
}

EvalReport evaluate_with(const std::function<double(const Graph&)>& scorer,
                         const std::vector<Graph>& graphs, int n_bins) {
  if (graphs.empty()) throw ConfigError("evaluation needs a non-empty dataset", "dataset");
  EvalReport r;
  r.size = graphs.size();
  r.samples.reserve(graphs.size());
  std::vector<double> errors;
  errors.reserve(graphs.size());
  double sse = 0.0;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    if (!graphs[i].label)
      throw ValidationError("sample " + std::to_string(i) + " has no label",
                            "sample " + std::to_string(i));
    const double label = *graphs[i].label;
    const double pred = scorer(graphs[i]);
    const double err = std::abs(pred - label);
    r.samples.push_back({static_cast<int>(i), label, pred, err});
    errors.push_back(err);
    sse += (pred - label) * (pred - label);
  }
  r.mse = sse / static_cast<double>(graphs.size());
  r.histogram = error_histogram(errors, n_bins);
  return r;
}

EvalReport evaluate(const Model& m, const std::vector<Scenario>& dataset, int n_bins) {
  if (dataset.empty()) throw ConfigError("evaluation needs a non-empty dataset", "dataset");
  std::vector<Graph> graphs;
  graphs.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (!dataset[i].label)
      throw ValidationError("sample " + std::to_string(i) + " has no label",
                            "sample " + std::to_string(i));
    graphs.push_back(build_graph(dataset[i], m.spec.variant));
  }
  return evaluate_with([&m](const Graph& g) { return score_graph(m, g); }, graphs, n_bins);
}

std::string eval_report_json(const EvalReport& r, bool rescaled) {
  nlohmann::ordered_json j;
  j["size"] = r.size;
  j["mse"] = r.mse;
  if (rescaled) j["mse_0_100_scale"] = r.mse * 100.0 * 100.0;
  j["histogram"] = {{"bin_edges", r.histogram.bin_edges}, {"counts", r.histogram.counts}};
  j["samples"] = nlohmann::ordered_json::array();
  for (const SampleEval& s : r.samples) {
    nlohmann::ordered_json e;
    e["id"] = s.id;
    e["label"] = s.label;
    e["prediction"] = s.prediction;
    e["abs_error"] = s.abs_error;
    if (rescaled) {
      e["label_0_100"] = s.label * 100.0;
      e["prediction_0_100"] = s.prediction * 100.0;
    }
    j["samples"].push_back(std::move(e));
  }
  return j.dump();
}

std::string histogram_csv(const Histogram& h) {
  std::string out = "bin_left,count\n";
  char buf[64];
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%d\n", h.bin_edges[i], h.counts[i]);
    out += buf;
  }
  return out;
}

}  // namespace socnav
