#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "socnav/evaluation.hpp"
#include "socnav/heatmap.hpp"
#include "socnav/training.hpp"

namespace {

using namespace socnav;

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path, path);
  out << content;
  if (!out) throw IoError("write failed for " + path, path);
}

void emit(const std::string& path, const std::string& content, bool newline = true) {
  if (path.empty()) {
    std::cout << content;
    if (newline) std::cout << "\n";
  } else {
    write_text_file(path, newline ? content + "\n" : content);
  }
}

struct SynthArgs {
  std::uint64_t seed = 0;
  int count = 1;
  std::string out;
  SynthConfig cfg;
};

struct GraphizeArgs {
  std::string scenario;
  std::string variant = "unlabelled";
  std::string out;
  std::string dot;
};

struct TrainArgs {
  std::string data, dev, out, report;
  TrainConfig cfg;
};

struct SearchArgs {
  std::string data, dev, out;
  std::string preset = "gat";
  int sessions = 1;
  std::uint64_t seed = 0;
  int jobs = 1;
};

struct EvalArgs {
  std::string model, data, out, histogram_csv;
  int bins = 20;
  bool rescaled = false;
};

struct ScoreArgs {
  std::string model, scenario;
};

struct HeatmapArgs {
  std::string model, scenario, csv, pgm;
  double resolution = 0.1;
  double theta = std::numbers::pi / 2.0;
  std::optional<double> x_min, x_max, y_min, y_max;
  bool mask_outside = false;
  int jobs = 1;
};

int run_synth(const SynthArgs& a) {
  if (a.count < 1) throw ConfigError("--count must be >= 1", "count");
  Rng master(a.seed);
  std::vector<Scenario> scenarios;
  scenarios.reserve(static_cast<std::size_t>(a.count));
  for (int i = 0; i < a.count; ++i) scenarios.push_back(generate_synthetic(master.next_u64(), a.cfg));
  if (a.out.empty()) {
    for (const Scenario& s : scenarios) std::cout << serialize_scenario(s) << "\n";
  } else {
    save_scenario_jsonl(scenarios, a.out);
  }
  return 0;
}

int run_graphize(const GraphizeArgs& a) {
  const Scenario s = load_scenario_file(a.scenario);
  const Graph g = build_graph(s, variant_from_name(a.variant));
  emit(a.out, graph_to_json(g));
  if (!a.dot.empty()) write_text_file(a.dot, graph_to_dot(g));
  return 0;
}

int run_train(const TrainArgs& a) {
  const std::vector<Scenario> train_set = load_scenario_jsonl(a.data);
  const std::vector<Scenario> dev_set = load_scenario_jsonl(a.dev);
  auto [model, report] = train(a.cfg, train_set, dev_set);
  save_checkpoint_file(model, a.out);
  if (!a.report.empty()) emit(a.report, train_report_json(report));
  std::fprintf(stderr, "best dev MSE %.6g at epoch %d (%zu epochs, %.1f s)\n",
               report.best_dev_loss, report.best_epoch, report.train_loss.size(),
               report.wall_clock_sec);
  return 0;
}

int run_search(const SearchArgs& a) {
  const std::vector<Scenario> train_set = load_scenario_jsonl(a.data);
  const std::vector<Scenario> dev_set = load_scenario_jsonl(a.dev);
  const auto results = random_search(a.sessions, a.seed, a.preset, train_set, dev_set, a.jobs);
  emit(a.out, search_results_json(results));
  return 0;
}

int run_eval(const EvalArgs& a) {
  const Model model = load_checkpoint_file(a.model);
  const std::vector<Scenario> dataset = load_scenario_jsonl(a.data);
  const EvalReport report = evaluate(model, dataset, a.bins);
  emit(a.out, eval_report_json(report, a.rescaled));
  if (!a.histogram_csv.empty()) write_text_file(a.histogram_csv, histogram_csv(report.histogram));
  return 0;
}

int run_score(const ScoreArgs& a) {
  const Model model = load_checkpoint_file(a.model);
  const Scenario s = load_scenario_file(a.scenario);
  std::printf("%.17g\n", score_graph(model, build_graph(s, model.spec.variant)));
  return 0;
}

int run_heatmap(const HeatmapArgs& a) {
  const Model model = load_checkpoint_file(a.model);
  const Scenario s = load_scenario_file(a.scenario);

  GridSpec grid = grid_from_room(s, a.resolution, a.theta);
  const int given = static_cast<int>(a.x_min.has_value()) + static_cast<int>(a.x_max.has_value()) +
                    static_cast<int>(a.y_min.has_value()) + static_cast<int>(a.y_max.has_value());
  if (given != 0 && given != 4)
    throw ConfigError("give all of --x-min --x-max --y-min --y-max or none", "grid");
  if (given == 4) {
    grid.x_min = *a.x_min;
    grid.x_max = *a.x_max;
    grid.y_min = *a.y_min;
    grid.y_max = *a.y_max;
  }

  const ScoreGrid result = sweep(model, s, grid, a.mask_outside, a.jobs);
  if (a.csv.empty() && a.pgm.empty()) {
    std::cout << grid_csv(result);
  } else {
    if (!a.csv.empty()) write_text_file(a.csv, grid_csv(result));
    if (!a.pgm.empty()) write_text_file(a.pgm, grid_pgm(result));
  }
  return 0;
}

void add_train_flags(CLI::App* cmd, TrainArgs& a) {
  cmd->add_option("--data", a.data, "training dataset, one scenario JSON per line")->required();
  cmd->add_option("--dev", a.dev, "development dataset, one scenario JSON per line")->required();
  cmd->add_option("--out", a.out, "checkpoint output path (JSON)")->required();
  cmd->add_option("--report", a.report, "training report output path (JSON run log)");
  cmd->add_option("--preset", a.cfg.preset,
                  "architecture: gcn|gat|rgcn|ggnn|rgcn_gat_sequential|rgcn_gat_interleaved|"
                  "rgcn_gat_decreasing");
  cmd->add_option("--layers", a.cfg.layers, "layer count (per half for rgcn_gat presets)");
  cmd->add_option("--hidden", a.cfg.hidden_units, "hidden units per layer");
  cmd->add_option("--heads", a.cfg.attention_heads, "attention heads on hidden GAT layers");
  cmd->add_option("--final-heads", a.cfg.final_heads, "attention heads on the last GAT layer");
  cmd->add_option("--lr", a.cfg.learning_rate, "Adam learning rate");
  cmd->add_option("--wd", a.cfg.weight_decay, "L2 weight decay coefficient");
  cmd->add_option("--alpha", a.cfg.alpha, "LeakyReLU slope inside attention logits");
  cmd->add_option("--dropout", a.cfg.dropout, "dropout rate between layers");
  cmd->add_option("--batch", a.cfg.batch_size, "minibatch size in graphs");
  cmd->add_option("--epochs", a.cfg.epochs, "epoch limit");
  cmd->add_option("--patience", a.cfg.patience, "epochs without dev improvement before stopping");
  cmd->add_option("--seed", a.cfg.seed, "seed for init, shuffling and dropout");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"social-compliance GNN engine: synthetic data, scenario graphs, training, "
               "search, evaluation and heat maps"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "generate synthetic labelled scenarios");
  synth_cmd->add_option("--seed", synth.seed, "generator seed")->required();
  synth_cmd->add_option("--count", synth.count, "number of scenarios");
  synth_cmd->add_option("--out", synth.out, "output .jsonl path (stdout if omitted)");
  synth_cmd->add_option("--min-room", synth.cfg.min_room_side, "min room side, meters");
  synth_cmd->add_option("--max-room", synth.cfg.max_room_side, "max room side, meters");
  synth_cmd->add_option("--max-humans", synth.cfg.max_humans, "max humans per scenario");
  synth_cmd->add_option("--max-objects", synth.cfg.max_objects, "max objects per scenario");
  synth_cmd->add_option("--interaction-rate", synth.cfg.interaction_rate,
                        "chance in [0,1] that a human engages something");

  GraphizeArgs graphize;
  auto* graphize_cmd = app.add_subcommand("graphize", "turn a scenario into its graph");
  graphize_cmd->add_option("--scenario", graphize.scenario, "scenario JSON file")->required();
  graphize_cmd->add_option("--variant", graphize.variant, "unlabelled|labelled");
  graphize_cmd->add_option("--out", graphize.out, "graph JSON output (stdout if omitted)");
  graphize_cmd->add_option("--dot", graphize.dot, "also write Graphviz DOT here");

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "train one configuration");
  add_train_flags(train_cmd, train_args);

  SearchArgs search;
  auto* search_cmd = app.add_subcommand("search", "random hyperparameter search");
  search_cmd->add_option("--data", search.data, "training dataset (.jsonl)")->required();
  search_cmd->add_option("--dev", search.dev, "development dataset (.jsonl)")->required();
  search_cmd->add_option("--out", search.out, "ranked results JSON (stdout if omitted)");
  search_cmd->add_option("--preset", search.preset, "architecture preset for all sessions");
  search_cmd->add_option("--sessions", search.sessions, "number of sampled configurations")->required();
  search_cmd->add_option("--seed", search.seed, "search seed")->required();
  search_cmd->add_option("--jobs", search.jobs, "parallel sessions (result is jobs-independent)");

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "score a checkpoint against a labelled dataset");
  eval_cmd->add_option("--model", eval_args.model, "checkpoint JSON")->required();
  eval_cmd->add_option("--data", eval_args.data, "labelled dataset (.jsonl)")->required();
  eval_cmd->add_option("--out", eval_args.out, "report JSON (stdout if omitted)");
  eval_cmd->add_option("--histogram-csv", eval_args.histogram_csv,
                       "absolute-error histogram CSV (bin_left,count)");
  eval_cmd->add_option("--bins", eval_args.bins, "histogram bin count over [0,1]");
  eval_cmd->add_flag("--rescaled", eval_args.rescaled, "add 0-100 scale columns to the report");

  ScoreArgs score;
  auto* score_cmd = app.add_subcommand("score", "print the score of one scenario in [0,1]");
  score_cmd->add_option("--model", score.model, "checkpoint JSON")->required();
  score_cmd->add_option("--scenario", score.scenario, "scenario JSON file")->required();

  HeatmapArgs heatmap;
  auto* heatmap_cmd = app.add_subcommand("heatmap", "sweep the robot over a grid and map scores");
  heatmap_cmd->add_option("--model", heatmap.model, "checkpoint JSON")->required();
  heatmap_cmd->add_option("--scenario", heatmap.scenario, "scenario JSON file")->required();
  heatmap_cmd->add_option("--csv", heatmap.csv, "x,y,score CSV output");
  heatmap_cmd->add_option("--pgm", heatmap.pgm, "binary PGM output, row 0 = y_max");
  heatmap_cmd->add_option("--resolution", heatmap.resolution, "cell size, meters");
  heatmap_cmd->add_option("--theta", heatmap.theta, "fixed robot orientation, radians CCW from +x");
  heatmap_cmd->add_option("--x-min", heatmap.x_min, "window override, meters");
  heatmap_cmd->add_option("--x-max", heatmap.x_max, "window override, meters");
  heatmap_cmd->add_option("--y-min", heatmap.y_min, "window override, meters");
  heatmap_cmd->add_option("--y-max", heatmap.y_max, "window override, meters");
  heatmap_cmd->add_flag("--mask-outside", heatmap.mask_outside,
                        "write -1 for cells outside the room instead of scoring them");
  heatmap_cmd->add_option("--jobs", heatmap.jobs, "parallel cell evaluation threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    nlohmann::ordered_json err{{"code", "cli"}, {"message", e.what()}, {"context", e.get_name()}};
    std::cerr << err.dump() << "\n";
    return 1;
  }

  try {
    if (synth_cmd->parsed()) return run_synth(synth);
    if (graphize_cmd->parsed()) return run_graphize(graphize);
    if (train_cmd->parsed()) return run_train(train_args);
    if (search_cmd->parsed()) return run_search(search);
    if (eval_cmd->parsed()) return run_eval(eval_args);
    if (score_cmd->parsed()) return run_score(score);
    if (heatmap_cmd->parsed()) return run_heatmap(heatmap);
  } catch (const Error& e) {
    nlohmann::ordered_json err{{"code", e.code()}, {"message", e.what()}, {"context", e.context()}};
    std::cerr << err.dump() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    nlohmann::ordered_json err{{"code", "internal"}, {"message", e.what()}, {"context", ""}};
    std::cerr << err.dump() << "\n";
    return 2;
  }
  return 0;
}
