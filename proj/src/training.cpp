#include "socnav/training.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

#include <json.hpp>

namespace socnav {

using ad::Mat;
using ad::Tensor;

ModelSpec spec_for(const TrainConfig& cfg) {
  return preset_spec(cfg.preset, cfg.layers, cfg.hidden_units, cfg.attention_heads,
                     cfg.final_heads, cfg.alpha, cfg.dropout);
}

namespace {

nlohmann::ordered_json config_to_json(const TrainConfig& cfg) {
  nlohmann::ordered_json j;
  j["preset"] = cfg.preset;
  j["epochs"] = cfg.epochs;
  j["patience"] = cfg.patience;
  j["batch_size"] = cfg.batch_size;
  j["hidden_units"] = cfg.hidden_units;
  j["attention_heads"] = cfg.attention_heads;
  j["final_heads"] = cfg.final_heads;
  j["learning_rate"] = cfg.learning_rate;
  j["weight_decay"] = cfg.weight_decay;
  j["layers"] = cfg.layers;
  j["dropout"] = cfg.dropout;
  j["alpha"] = cfg.alpha;
  j["seed"] = cfg.seed;
  return j;
}

}  // namespace

std::string train_config_json(const TrainConfig& cfg) { return config_to_json(cfg).dump(); }

BatchedGraph batch_graphs(const std::vector<Graph>& graphs) {
  if (graphs.empty()) throw ConfigError("cannot batch zero graphs", "batch");

  BatchedGraph bg;
  bg.variant = graphs.front().variant;
  const Eigen::Index width = graphs.front().features.cols();
  int total_nodes = 0;
  std::size_t total_edges = 0;
  for (const Graph& g : graphs) {
    if (g.variant != bg.variant)
      throw ConfigError("cannot batch mixed graph variants", "batch");
    if (g.features.cols() != width)
      throw ConfigError("cannot batch mixed feature widths", "batch");
    total_nodes += g.n_nodes();
    total_edges += g.edges.size();
  }

  bg.node_types.reserve(static_cast<std::size_t>(total_nodes));
  bg.features.resize(total_nodes, width);
  bg.edges.reserve(total_edges);
  bg.relations.reserve(bg.variant == GraphVariant::Labelled ? total_edges : 0);
  bg.node_offsets.push_back(0);

  int offset = 0;
  for (const Graph& g : graphs) {
    bg.node_types.insert(bg.node_types.end(), g.node_types.begin(), g.node_types.end());
    bg.features.middleRows(offset, g.n_nodes()) = g.features;
    for (const Edge& e : g.edges) bg.edges.push_back({e.src + offset, e.dst + offset});
    bg.relations.insert(bg.relations.end(), g.relations.begin(), g.relations.end());
    bg.robot_indices.push_back(g.robot_index + offset);
    bg.labels.push_back(g.label);
    offset += g.n_nodes();
    bg.node_offsets.push_back(offset);
  }
  return bg;
}

EdgeIndex edge_index(const BatchedGraph& bg) {
  return edge_index(bg.n_nodes(), bg.edges, bg.relations);
}

ad::Tensor model_scores(const Model& m, const BatchedGraph& bg, const Forward& fwd) {
  const Tensor features = Tensor::leaf(bg.features);
  return model_scores(m, edge_index(bg), features, bg.robot_indices, fwd);
}

std::vector<Graph> graphize_dataset(std::vector<Scenario> scenarios, GraphVariant variant,
                                    bool require_labels) {
  std::sort(scenarios.begin(), scenarios.end(),
            [](const Scenario& a, const Scenario& b) {
              return serialize_scenario(a) < serialize_scenario(b);
            });
  std::vector<Graph> graphs;
  graphs.reserve(scenarios.size());
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    if (require_labels && !scenarios[i].label)
      throw ValidationError("sample " + std::to_string(i) + " has no label",
                            "sample " + std::to_string(i));
    graphs.push_back(build_graph(scenarios[i], variant));
  }
  return graphs;
}

std::string train_report_json(const TrainReport& r, bool include_wall_clock) {
  nlohmann::ordered_json j;
  j["config"] = config_to_json(r.config);
  j["epochs_run"] = r.train_loss.size();
  j["best_epoch"] = r.best_epoch;
  j["best_dev_loss"] = r.best_dev_loss;
  if (include_wall_clock) j["wall_clock_sec"] = r.wall_clock_sec;
  j["train_loss"] = r.train_loss;
  j["dev_loss"] = r.dev_loss;
  return j.dump();
}

namespace {

double dataset_mse(const Model& m, const std::vector<Graph>& graphs, int chunk) {
  double sse = 0.0;
  std::size_t n = 0;
  for (std::size_t begin = 0; begin < graphs.size(); begin += static_cast<std::size_t>(chunk)) {
    const std::size_t end = std::min(graphs.size(), begin + static_cast<std::size_t>(chunk));
    const std::vector<Graph> part(graphs.begin() + static_cast<std::ptrdiff_t>(begin),
                                  graphs.begin() + static_cast<std::ptrdiff_t>(end));
    const BatchedGraph bg = batch_graphs(part);
    const Tensor scores = model_scores(m, bg);
    for (std::size_t i = 0; i < part.size(); ++i) {
      const double err = scores.value()(static_cast<Eigen::Index>(i), 0) - *part[i].label;
      sse += err * err;
    }
    n += part.size();
  }
  return sse / static_cast<double>(n);
}

}  // namespace

std::pair<Model, TrainReport> train(const TrainConfig& cfg,
                                    const std::vector<Scenario>& train_set,
                                    const std::vector<Scenario>& dev_set) {
  if (train_set.empty() || dev_set.empty())
    throw ConfigError("training needs non-empty train and dev sets", "datasets");
  if (cfg.epochs < 1 || cfg.patience < 1 || cfg.batch_size < 1)
    throw ConfigError("epochs, patience and batch_size must be >= 1", "config");

  const auto t0 = std::chrono::steady_clock::now();
  const ModelSpec spec = spec_for(cfg);
  const std::vector<Graph> train_graphs = graphize_dataset(train_set, spec.variant, true);
  const std::vector<Graph> dev_graphs = graphize_dataset(dev_set, spec.variant, true);

  Rng rng(cfg.seed);
  Model model = assemble_model(spec, rng);
  auto params = model.parameters();
  AdamState state;

  TrainReport report;
  report.config = cfg;
  double best_dev = std::numeric_limits<double>::infinity();
  std::vector<Mat> best_values = export_values(model);
  int best_epoch = 0;
  int bad_streak = 0;

  std::vector<std::size_t> order(train_graphs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double sse = 0.0;
    std::size_t seen = 0;
    for (std::size_t begin = 0; begin < order.size();
         begin += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end =
          std::min(order.size(), begin + static_cast<std::size_t>(cfg.batch_size));
      std::vector<Graph> part;
      std::vector<double> labels;
      part.reserve(end - begin);
      for (std::size_t k = begin; k < end; ++k) {
        part.push_back(train_graphs[order[k]]);
        labels.push_back(*train_graphs[order[k]].label);
      }
      const BatchedGraph bg = batch_graphs(part);
      const Tensor scores = model_scores(model, bg, Forward{true, &rng});
      const Tensor loss = ad::mse_loss(scores, labels);
      const double loss_value = loss.item();
      if (!std::isfinite(loss_value))
        throw DivergenceError("non-finite training loss at epoch " + std::to_string(epoch),
                              train_config_json(cfg));
      sse += loss_value * static_cast<double>(labels.size());
      seen += labels.size();
      for (Param& p : params) p.tensor.zero_grad();
      ad::backward(loss);
      adam_step(params, state, cfg.learning_rate, cfg.weight_decay);
    }
    report.train_loss.push_back(sse / static_cast<double>(seen));

    const double dev = dataset_mse(model, dev_graphs, cfg.batch_size);
    if (!std::isfinite(dev))
      throw DivergenceError("non-finite dev loss at epoch " + std::to_string(epoch),
                            train_config_json(cfg));
    report.dev_loss.push_back(dev);

    if (dev < best_dev) {
      best_dev = dev;
      best_epoch = epoch;
      best_values = export_values(model);
      bad_streak = 0;
    } else if (++bad_streak >= cfg.patience) {
      break;
    }
  }

  import_values(model, best_values);
  report.best_epoch = best_epoch;
  report.best_dev_loss = best_dev;
  report.wall_clock_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(model), std::move(report)};
}

TrainConfig sample_config(Rng& rng, const std::string& preset) {
  TrainConfig cfg;
  cfg.preset = preset;
  cfg.epochs = 1000;
  cfg.patience = 5;
  cfg.batch_size = static_cast<int>(rng.uniform_int(100, 1500));
  cfg.hidden_units = static_cast<int>(rng.uniform_int(50, 320));
  cfg.attention_heads = static_cast<int>(rng.uniform_int(2, 9));
  cfg.final_heads = static_cast<int>(rng.uniform_int(2, 9));
  cfg.learning_rate = rng.log_uniform(1e-6, 1e-4);
  cfg.weight_decay = rng.bernoulli(0.25) ? 0.0 : rng.log_uniform(1e-9, 1e-6);
  cfg.layers = static_cast<int>(rng.uniform_int(2, 8));
  cfg.dropout = rng.uniform(0.0, 1e-6);
  cfg.alpha = rng.uniform(0.1, 0.3);
  cfg.seed = rng.next_u64();
  return cfg;
}

std::vector<SearchResult> random_search(int n_sessions, std::uint64_t seed,
                                        const std::string& preset,
                                        const std::vector<Scenario>& train_set,
                                        const std::vector<Scenario>& dev_set, int jobs) {
  if (n_sessions < 1) throw ConfigError("random_search needs n_sessions >= 1", "sessions");
  if (jobs < 1) throw ConfigError("jobs must be >= 1", "jobs");

  // All configurations are drawn up front; execution order cannot change them.
  Rng rng(seed);
  std::vector<SearchResult> results(static_cast<std::size_t>(n_sessions));
  for (int i = 0; i < n_sessions; ++i) {
    results[static_cast<std::size_t>(i)].session = i;
    results[static_cast<std::size_t>(i)].config = sample_config(rng, preset);
  }

  auto run_session = [&](SearchResult& r) {
    try {
      auto [model, report] = train(r.config, train_set, dev_set);
      r.best_dev_loss = report.best_dev_loss;
      r.best_epoch = report.best_epoch;
      r.status = "ok";
    } catch (const DivergenceError&) {
      r.best_dev_loss = std::numeric_limits<double>::infinity();
      r.best_epoch = 0;
      r.status = "diverged";
    }
  };

  if (jobs == 1) {
    for (auto& r : results) run_session(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const int n_threads = std::min(jobs, n_sessions);
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < results.size(); i = next.fetch_add(1))
          run_session(results[i]);
      });
    }
    for (auto& th : pool) th.join();
  }

  std::stable_sort(results.begin(), results.end(), [](const SearchResult& a, const SearchResult& b) {
    if (a.best_dev_loss != b.best_dev_loss) return a.best_dev_loss < b.best_dev_loss;
    return a.session < b.session;
  });
  return results;
}

std::string search_results_json(const std::vector<SearchResult>& results) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const SearchResult& r : results) {
    nlohmann::ordered_json e;
    e["rank"] = j.size();
    e["session"] = r.session;
    e["status"] = r.status;
    e["best_dev_loss"] = std::isfinite(r.best_dev_loss) ? nlohmann::ordered_json(r.best_dev_loss)
                                                        : nlohmann::ordered_json(nullptr);
    e["best_epoch"] = r.best_epoch;
    e["config"] = nlohmann::ordered_json::parse(train_config_json(r.config));
    j.push_back(std::move(e));
  }
  return j.dump();
}

}  // namespace socnav
