#include "socnav/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

namespace socnav {

using ad::Mat;
using ad::Tensor;

const char* block_type_name(BlockType t) {
  switch (t) {
    case BlockType::Gcn: return "gcn";
    case BlockType::Gat: return "gat";
    case BlockType::Rgcn: return "rgcn";
    case BlockType::Ggnn: return "ggnn";
  }
  return "?";
}

BlockType block_type_from_name(const std::string& name) {
  if (name == "gcn") return BlockType::Gcn;
  if (name == "gat") return BlockType::Gat;
  if (name == "rgcn") return BlockType::Rgcn;
  if (name == "ggnn") return BlockType::Ggnn;
  throw ConfigError("unknown block type '" + name + "'", "blocks");
}

namespace {

bool needs_relations(BlockType t) { return t == BlockType::Rgcn || t == BlockType::Ggnn; }

int block_out_width(const BlockSpec& b, bool is_last) {
  if (b.type == BlockType::Gat && !is_last) return b.hidden * b.heads;
  return b.hidden;
}

}  // namespace

void validate_spec(const ModelSpec& spec) {
  if (spec.blocks.empty()) throw ConfigError("model needs at least one layer", "blocks");
  if (!(spec.leaky_relu_alpha > 0.0) || !(spec.leaky_relu_alpha < 1.0))
    throw ConfigError("leaky_relu_alpha must be in (0, 1)", "alpha");
  if (spec.dropout_rate < 0.0 || spec.dropout_rate >= 1.0)
    throw ConfigError("dropout_rate must be in [0, 1)", "dropout");
  if (spec.final_heads < 1) throw ConfigError("final_heads must be >= 1", "final_heads");

  int in = feature_width(spec.variant);
  for (std::size_t l = 0; l < spec.blocks.size(); ++l) {
    const BlockSpec& b = spec.blocks[l];
    if (b.hidden < 1) throw ConfigError("hidden units must be >= 1", "blocks");
    if (b.type == BlockType::Gat && b.heads < 1)
      throw ConfigError("attention heads must be >= 1", "blocks");
    if (needs_relations(b.type) && spec.variant != GraphVariant::Labelled)
      throw ConfigError(std::string(block_type_name(b.type)) +
                        " layers need the labelled graph variant", "blocks");
    if (b.type == BlockType::Ggnn && in != b.hidden && l != 0)
      throw ConfigError("ggnn keeps the feature width; layer " + std::to_string(l) +
                        " would change " + std::to_string(in) + " -> " + std::to_string(b.hidden),
                        "blocks");
    in = block_out_width(b, l + 1 == spec.blocks.size());
  }
  if (spec.blocks.back().type == BlockType::Gat &&
      spec.blocks.back().heads != spec.final_heads)
    throw ConfigError("final GAT block must use final_heads (" +
                      std::to_string(spec.final_heads) + "), got " +
                      std::to_string(spec.blocks.back().heads), "final_heads");
}

ModelSpec preset_spec(const std::string& preset, int layers, int hidden, int heads,
                      int final_heads, double alpha, double dropout) {
  if (layers < 1) throw ConfigError("layers must be >= 1", "layers");
  ModelSpec spec;
  spec.leaky_relu_alpha = alpha;
  spec.dropout_rate = dropout;
  spec.final_heads = final_heads;

  auto pure_stack = [&](BlockType type, GraphVariant variant) {
    spec.variant = variant;
    for (int l = 0; l < layers; ++l) {
      BlockSpec b{type, hidden, heads};
      if (type == BlockType::Gat && l == layers - 1) b.heads = final_heads;
      spec.blocks.push_back(b);
    }
  };

  if (preset == "gcn") {
    pure_stack(BlockType::Gcn, GraphVariant::Unlabelled);
  } else if (preset == "gat") {
    pure_stack(BlockType::Gat, GraphVariant::Unlabelled);
  } else if (preset == "rgcn") {
    pure_stack(BlockType::Rgcn, GraphVariant::Labelled);
  } else if (preset == "ggnn") {
    pure_stack(BlockType::Ggnn, GraphVariant::Labelled);
  } else if (preset == "rgcn_gat_sequential" || preset == "rgcn_gat_interleaved" ||
             preset == "rgcn_gat_decreasing") {
    spec.variant = GraphVariant::Labelled;
    const int depth = 2 * layers;
    std::vector<int> widths(static_cast<std::size_t>(depth), hidden);
    if (preset == "rgcn_gat_decreasing") {
      // hidden, hidden - step, ... with step = hidden / depth, floored at 1
      for (int l = 0; l < depth; ++l)
        widths[static_cast<std::size_t>(l)] =
            std::max(1, hidden - (hidden / depth) * l);
    }
    for (int l = 0; l < depth; ++l) {
      const bool gat_slot = preset == "rgcn_gat_interleaved" ? l % 2 == 1 : l >= layers;
      BlockSpec b{gat_slot ? BlockType::Gat : BlockType::Rgcn,
                  widths[static_cast<std::size_t>(l)], heads};
      if (l == depth - 1 && b.type == BlockType::Gat) b.heads = final_heads;
      spec.blocks.push_back(b);
    }
  } else {
    throw ConfigError("unknown preset '" + preset + "'", "preset");
  }
  validate_spec(spec);
  return spec;
}

namespace {

Mat glorot(Rng& rng, Eigen::Index fan_in, Eigen::Index fan_out) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Mat m(fan_in, fan_out);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.uniform(-a, a);
  return m;
}

Tensor weight(Rng& rng, Eigen::Index fan_in, Eigen::Index fan_out) {
  return Tensor::leaf(glorot(rng, fan_in, fan_out), /*requires_grad=*/true);
}

Tensor zero_bias(Eigen::Index width) {
  return Tensor::leaf(Mat::Zero(1, width), /*requires_grad=*/true);
}

}  // namespace

Model assemble_model(const ModelSpec& spec, Rng& rng) {
  validate_spec(spec);
  Model m;
  m.spec = spec;

  int in = feature_width(spec.variant);
  if (spec.blocks.front().type == BlockType::Ggnn && in != spec.blocks.front().hidden) {
    const int hidden = spec.blocks.front().hidden;
    m.input_proj = LinearParams{weight(rng, in, hidden), zero_bias(hidden)};
    in = hidden;
  }

  for (std::size_t l = 0; l < spec.blocks.size(); ++l) {
    const BlockSpec& b = spec.blocks[l];
    const bool is_last = l + 1 == spec.blocks.size();
    switch (b.type) {
      case BlockType::Gcn: {
        m.layers.emplace_back(GcnParams{weight(rng, 2 * in, b.hidden), zero_bias(b.hidden)});
        break;
      }
      case BlockType::Gat: {
        GatParams p;
        for (int h = 0; h < b.heads; ++h)
          p.heads.push_back(
              {weight(rng, in, b.hidden), weight(rng, b.hidden, 1), weight(rng, b.hidden, 1)});
        m.layers.emplace_back(std::move(p));
        break;
      }
      case BlockType::Rgcn: {
        RgcnParams p;
        for (int r = 0; r < kRelationCount; ++r) p.rel_W.push_back(weight(rng, in, b.hidden));
        p.b = zero_bias(b.hidden);
        m.layers.emplace_back(std::move(p));
        break;
      }
      case BlockType::Ggnn: {
        GgnnParams p;
        for (int r = 0; r < kRelationCount; ++r) p.rel_W.push_back(weight(rng, in, b.hidden));
        p.msg_b = zero_bias(b.hidden);
        p.Wz = weight(rng, b.hidden, b.hidden);
        p.Uz = weight(rng, b.hidden, b.hidden);
        p.bz = zero_bias(b.hidden);
        p.Wr = weight(rng, b.hidden, b.hidden);
        p.Ur = weight(rng, b.hidden, b.hidden);
        p.br = zero_bias(b.hidden);
        p.Wh = weight(rng, b.hidden, b.hidden);
        p.Uh = weight(rng, b.hidden, b.hidden);
        p.bh = zero_bias(b.hidden);
        m.layers.emplace_back(std::move(p));
        break;
      }
    }
    in = block_out_width(b, is_last);
  }
  m.readout = {weight(rng, in, 1), zero_bias(1)};
  return m;
}

std::vector<Param> Model::parameters() const {
  std::vector<Param> out;
  if (input_proj) {
    out.push_back({"input_proj.W", input_proj->W});
    out.push_back({"input_proj.b", input_proj->b});
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string base = "layer" + std::to_string(l) + ".";
    std::visit(
        [&](const auto& p) {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, GcnParams>) {
            out.push_back({base + "gcn.W", p.W});
            out.push_back({base + "gcn.b", p.b});
          } else if constexpr (std::is_same_v<P, GatParams>) {
            for (std::size_t h = 0; h < p.heads.size(); ++h) {
              const std::string head = base + "gat.head" + std::to_string(h) + ".";
              out.push_back({head + "W", p.heads[h].W});
              out.push_back({head + "a_src", p.heads[h].a_src});
              out.push_back({head + "a_dst", p.heads[h].a_dst});
            }
          } else if constexpr (std::is_same_v<P, RgcnParams>) {
            for (int r = 0; r < kRelationCount; ++r)
              out.push_back({base + "rgcn." + relation_name(static_cast<Relation>(r)) + ".W",
                             p.rel_W[static_cast<std::size_t>(r)]});
            out.push_back({base + "rgcn.b", p.b});
          } else if constexpr (std::is_same_v<P, GgnnParams>) {
            for (int r = 0; r < kRelationCount; ++r)
              out.push_back({base + "ggnn." + relation_name(static_cast<Relation>(r)) + ".W",
                             p.rel_W[static_cast<std::size_t>(r)]});
            out.push_back({base + "ggnn.msg_b", p.msg_b});
            out.push_back({base + "ggnn.Wz", p.Wz});
            out.push_back({base + "ggnn.Uz", p.Uz});
            out.push_back({base + "ggnn.bz", p.bz});
            out.push_back({base + "ggnn.Wr", p.Wr});
            out.push_back({base + "ggnn.Ur", p.Ur});
            out.push_back({base + "ggnn.br", p.br});
            out.push_back({base + "ggnn.Wh", p.Wh});
            out.push_back({base + "ggnn.Uh", p.Uh});
            out.push_back({base + "ggnn.bh", p.bh});
          }
        },
        layers[l]);
  }
  out.push_back({"readout.W", readout.W});
  out.push_back({"readout.b", readout.b});
  return out;
}

ad::Tensor model_nodes(const Model& m, const EdgeIndex& ei, const Tensor& features,
                       const Forward& fwd) {
  if (features.cols() != feature_width(m.spec.variant))
    throw DimensionError("feature width " + std::to_string(features.cols()) +
                         " does not match the " + variant_name(m.spec.variant) + " layout (" +
                         std::to_string(feature_width(m.spec.variant)) + ")");
  const bool drop = fwd.training && m.spec.dropout_rate > 0.0;
  if (drop && fwd.rng == nullptr)
    throw ConfigError("training forward with dropout needs an rng");

  Tensor H = features;
  if (m.input_proj) H = ad::linear_forward(H, m.input_proj->W, m.input_proj->b);
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    const bool is_last = l + 1 == m.layers.size();
    H = std::visit(
        [&](const auto& p) -> Tensor {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, GcnParams>) {
            return gcn_layer(ei, H, p, /*apply_relu=*/!is_last);
          } else if constexpr (std::is_same_v<P, GatParams>) {
            return gat_layer(ei, H, p, m.spec.leaky_relu_alpha,
                             is_last ? GatMode::Average : GatMode::Concat);
          } else if constexpr (std::is_same_v<P, RgcnParams>) {
            return rgcn_layer(ei, H, p, /*apply_relu=*/!is_last);
          } else {
            return ggnn_step(ei, H, p);
          }
        },
        m.layers[l]);
    if (!is_last && drop) H = ad::dropout(H, m.spec.dropout_rate, *fwd.rng);
  }
  return H;
}

ad::Tensor readout_scores(const Model& m, const Tensor& H_last,
                          const std::vector<int>& robot_indices) {
  return ad::sigmoid(
      ad::linear_forward(ad::gather_rows(H_last, robot_indices), m.readout.W, m.readout.b));
}

double readout_robot(const Model& m, const Graph& g, const Tensor& H_last) {
  return readout_scores(m, H_last, {g.robot_index}).item();
}

ad::Tensor model_scores(const Model& m, const EdgeIndex& ei, const Tensor& features,
                        const std::vector<int>& robot_indices, const Forward& fwd) {
  return readout_scores(m, model_nodes(m, ei, features, fwd), robot_indices);
}

double score_graph(const Model& m, const Graph& g) {
  if (g.variant != m.spec.variant)
    throw ConfigError(std::string("model expects the ") + variant_name(m.spec.variant) +
                      " variant, graph is " + variant_name(g.variant));
  const Tensor features = Tensor::leaf(g.features);
  return model_scores(m, edge_index(g), features, {g.robot_index}).item();
}

std::vector<ad::Mat> export_values(const Model& m) {
  std::vector<Mat> out;
  for (const Param& p : m.parameters()) out.push_back(p.tensor.value());
  return out;
}

void import_values(Model& m, const std::vector<Mat>& values) {
  auto params = m.parameters();
  if (values.size() != params.size())
    throw DimensionError("import_values: expected " + std::to_string(params.size()) +
                         " tensors, got " + std::to_string(values.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (values[i].rows() != params[i].tensor.rows() || values[i].cols() != params[i].tensor.cols())
      throw DimensionError("import_values: shape mismatch", params[i].name);
    params[i].tensor.value_mut() = values[i];
  }
}

// ---- checkpoint ---------------------------------------------------------------

std::string feature_layout_tag(GraphVariant v) {
  return std::string("features-v1-") + variant_name(v) + "-" + std::to_string(feature_width(v));
}

namespace {
constexpr int kCheckpointVersion = 1;
}

std::string save_checkpoint(const Model& m) {
  nlohmann::ordered_json j;
  j["format_version"] = kCheckpointVersion;
  j["feature_layout"] = feature_layout_tag(m.spec.variant);
  j["relations"] = nlohmann::ordered_json::array();
  for (int r = 0; r < kRelationCount; ++r)
    j["relations"].push_back(relation_name(static_cast<Relation>(r)));

  nlohmann::ordered_json spec;
  spec["variant"] = variant_name(m.spec.variant);
  spec["leaky_relu_alpha"] = m.spec.leaky_relu_alpha;
  spec["dropout_rate"] = m.spec.dropout_rate;
  spec["final_heads"] = m.spec.final_heads;
  spec["has_input_proj"] = m.input_proj.has_value();
  spec["blocks"] = nlohmann::ordered_json::array();
  for (const BlockSpec& b : m.spec.blocks)
    spec["blocks"].push_back(
        {{"type", block_type_name(b.type)}, {"hidden", b.hidden}, {"heads", b.heads}});
  j["spec"] = std::move(spec);

  j["params"] = nlohmann::ordered_json::array();
  for (const Param& p : m.parameters()) {
    const Mat& v = p.tensor.value();
    nlohmann::ordered_json e;
    e["name"] = p.name;
    e["shape"] = {v.rows(), v.cols()};
    e["data"] = std::vector<double>(v.data(), v.data() + v.size());
    j["params"].push_back(std::move(e));
  }
  return j.dump();
}

Model load_checkpoint(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid checkpoint JSON: ") + e.what(), "$");
  }

  if (!j.contains("format_version") || !j["format_version"].is_number_integer() ||
      j["format_version"].get<int>() != kCheckpointVersion)
    throw ValidationError("unsupported checkpoint format_version", "format_version");

  ModelSpec spec;
  const auto& js = j.at("spec");
  spec.variant = variant_from_name(js.at("variant").get<std::string>());
  spec.leaky_relu_alpha = js.at("leaky_relu_alpha").get<double>();
  spec.dropout_rate = js.at("dropout_rate").get<double>();
  spec.final_heads = js.at("final_heads").get<int>();
  for (const auto& b : js.at("blocks"))
    spec.blocks.push_back({block_type_from_name(b.at("type").get<std::string>()),
                           b.at("hidden").get<int>(), b.at("heads").get<int>()});

  const std::string expected_layout = feature_layout_tag(spec.variant);
  const std::string layout = j.value("feature_layout", std::string{});
  if (layout != expected_layout)
    throw ValidationError("feature layout mismatch: checkpoint has '" + layout +
                          "', engine expects '" + expected_layout + "'", "feature_layout");

  std::vector<std::string> relations;
  for (const auto& r : j.at("relations")) relations.push_back(r.get<std::string>());
  for (int r = 0; r < kRelationCount; ++r)
    if (r >= static_cast<int>(relations.size()) ||
        relations[static_cast<std::size_t>(r)] != relation_name(static_cast<Relation>(r)))
      throw ValidationError("relation vocabulary mismatch", "relations");

  Rng rng(0);
  Model m = assemble_model(spec, rng);

  std::unordered_map<std::string, const nlohmann::json*> by_name;
  for (const auto& p : j.at("params")) by_name[p.at("name").get<std::string>()] = &p;

  auto params = m.parameters();
  if (by_name.size() != params.size())
    throw ValidationError("checkpoint holds " + std::to_string(by_name.size()) +
                          " tensors, model needs " + std::to_string(params.size()), "params");
  for (Param& p : params) {
    auto it = by_name.find(p.name);
    if (it == by_name.end()) throw ValidationError("checkpoint misses tensor", p.name);
    const auto& e = *it->second;
    const auto shape = e.at("shape").get<std::vector<Eigen::Index>>();
    Mat& v = p.tensor.value_mut();
    if (shape.size() != 2 || shape[0] != v.rows() || shape[1] != v.cols())
      throw ValidationError("checkpoint tensor shape mismatch", p.name);
    const auto data = e.at("data").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(data.size()) != v.size())
      throw ValidationError("checkpoint tensor size mismatch", p.name);
    std::copy(data.begin(), data.end(), v.data());
  }
  return m;
}

void save_checkpoint_file(const Model& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path, path);
  out << save_checkpoint(m) << "\n";
}

Model load_checkpoint_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path, path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return load_checkpoint(buffer.str());
}

}  // namespace socnav
