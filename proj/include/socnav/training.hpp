#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "socnav/model.hpp"

namespace socnav {

// Training hyperparameters. The search samples batch_size, hidden_units,
// attention heads, learning rate, weight decay, layers, dropout and alpha
// from their documented ranges; epochs and patience stay fixed at 1000 / 5.
struct TrainConfig {
  int epochs = 1000;
  int patience = 5;
  int batch_size = 100;
  int hidden_units = 64;
  int attention_heads = 2;
  int final_heads = 2;
  double learning_rate = 1e-4;
  double weight_decay = 0.0;
  int layers = 2;
  double dropout = 0.0;
  double alpha = 0.2;
  std::uint64_t seed = 0;
  std::string preset = "gat";
};

ModelSpec spec_for(const TrainConfig& cfg);
std::string train_config_json(const TrainConfig& cfg);

// Disjoint union of member graphs: features stacked, edge indices offset so
// no edge crosses a member boundary, one robot index and label slot per
// member.
struct BatchedGraph {
  GraphVariant variant = GraphVariant::Unlabelled;
  std::vector<NodeKind> node_types;
  ad::Mat features;
  std::vector<Edge> edges;
  std::vector<int> relations;
  std::vector<int> robot_indices;
  std::vector<std::optional<double>> labels;
  std::vector<int> node_offsets;  // size = members + 1

  int n_nodes() const { return static_cast<int>(node_types.size()); }
  int members() const { return static_cast<int>(robot_indices.size()); }
};

BatchedGraph batch_graphs(const std::vector<Graph>& graphs);
EdgeIndex edge_index(const BatchedGraph& bg);

// Forward scores for every member of a batch, in member order.
ad::Tensor model_scores(const Model& m, const BatchedGraph& bg, const Forward& fwd = {});

struct TrainReport {
  std::vector<double> train_loss;  // one entry per completed epoch
  std::vector<double> dev_loss;
  int best_epoch = 0;  // 1-based epoch of the returned parameters
  double best_dev_loss = 0.0;
  double wall_clock_sec = 0.0;
  TrainConfig config;
};

// wall-clock is the only non-reproducible field; pass include_wall_clock =
// false when byte-stable output matters.
std::string train_report_json(const TrainReport& r, bool include_wall_clock = true);

// Graphization of a labelled dataset. Scenarios are first put into a
// canonical order (sorted by their serialized form) so that training results
// do not depend on file order; shuffling is seed-driven only.
std::vector<Graph> graphize_dataset(std::vector<Scenario> scenarios, GraphVariant variant,
                                    bool require_labels);

// Mini-batch Adam with per-epoch dev evaluation and early stopping: stops
// after `patience` consecutive epochs without dev improvement and returns the
// parameters of the best dev epoch. Throws DivergenceError (with epoch and
// config context) on a non-finite loss.
std::pair<Model, TrainReport> train(const TrainConfig& cfg,
                                    const std::vector<Scenario>& train_set,
                                    const std::vector<Scenario>& dev_set);

struct SearchResult {
  int session = 0;  // sampling order
  TrainConfig config;
  double best_dev_loss = 0.0;  // +inf for diverged sessions
  int best_epoch = 0;
  std::string status;  // "ok" or "diverged"
};

// One uniformly sampled configuration: integer ranges uniform-inclusive,
// learning rate log-uniform over [1e-6, 1e-4], weight decay 0 with
// probability 1/4 and log-uniform over [1e-9, 1e-6] otherwise.
TrainConfig sample_config(Rng& rng, const std::string& preset);

// Runs n_sessions sampled configurations and ranks them by best dev loss
// (diverged sessions last, ties by session id). All configs are drawn before
// any session runs, so the outcome is a pure function of the seed and
// independent of `jobs`.
std::vector<SearchResult> random_search(int n_sessions, std::uint64_t seed,
                                        const std::string& preset,
                                        const std::vector<Scenario>& train_set,
                                        const std::vector<Scenario>& dev_set, int jobs = 1);

std::string search_results_json(const std::vector<SearchResult>& results);

}  // namespace socnav
