#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "socnav/adam.hpp"
#include "socnav/layers.hpp"

namespace socnav {

enum class BlockType { Gcn, Gat, Rgcn, Ggnn };

const char* block_type_name(BlockType t);
BlockType block_type_from_name(const std::string& name);

struct BlockSpec {
  BlockType type = BlockType::Gcn;
  int hidden = 64;
  int heads = 1;  // GAT only
  bool operator==(const BlockSpec&) const = default;
};

// Architecture description. The input width is fixed by the variant's
// feature layout; the last block feeds a 1-unit sigmoid readout.
struct ModelSpec {
  GraphVariant variant = GraphVariant::Unlabelled;
  std::vector<BlockSpec> blocks;
  double leaky_relu_alpha = 0.2;
  double dropout_rate = 0.0;
  int final_heads = 1;  // heads of the last block when it is GAT

  bool operator==(const ModelSpec&) const = default;
};

void validate_spec(const ModelSpec& spec);

// Named stack plans. `layers` counts total layers for the pure stacks and
// layers per half for the rgcn_gat hybrids (so the hybrid depth is 2*layers).
// The decreasing hybrid shrinks widths linearly by hidden/depth per layer.
// Known presets: gcn, gat, rgcn, ggnn, rgcn_gat_sequential,
// rgcn_gat_interleaved, rgcn_gat_decreasing.
ModelSpec preset_spec(const std::string& preset, int layers, int hidden, int heads,
                      int final_heads, double alpha, double dropout);

struct LinearParams {
  ad::Tensor W;
  ad::Tensor b;
};

using LayerParams = std::variant<GcnParams, GatParams, RgcnParams, GgnnParams>;

struct Model {
  ModelSpec spec;
  std::optional<LinearParams> input_proj;  // width adapter when GG-NN opens the stack
  std::vector<LayerParams> layers;
  LinearParams readout;

  // Stable-order named views of every learnable tensor.
  std::vector<Param> parameters() const;
};

// Glorot-uniform initialization of every weight, zero biases, shapes from the
// spec. Draws from rng in a fixed order, so a seed pins the whole model.
Model assemble_model(const ModelSpec& spec, Rng& rng);

struct Forward {
  bool training = false;
  Rng* rng = nullptr;  // required when training with dropout_rate > 0
};

// Node embeddings after the full stack.
ad::Tensor model_nodes(const Model& m, const EdgeIndex& ei, const ad::Tensor& features,
                       const Forward& fwd = {});

// sigmoid(linear(H_last[robot])) per listed robot row; one score per entry.
ad::Tensor readout_scores(const Model& m, const ad::Tensor& H_last,
                          const std::vector<int>& robot_indices);
double readout_robot(const Model& m, const Graph& g, const ad::Tensor& H_last);

// End-to-end scores for a batched topology.
ad::Tensor model_scores(const Model& m, const EdgeIndex& ei, const ad::Tensor& features,
                        const std::vector<int>& robot_indices, const Forward& fwd = {});

// Inference on one graph; deterministic, no reverse graph is built.
double score_graph(const Model& m, const Graph& g);

// Parameter payload snapshot (for best-epoch bookkeeping).
std::vector<ad::Mat> export_values(const Model& m);
void import_values(Model& m, const std::vector<ad::Mat>& values);

// Versioned JSON checkpoint: spec, relation vocabulary, feature-layout tag
// and every parameter tensor. Loading refuses layout or version mismatches.
std::string feature_layout_tag(GraphVariant v);
std::string save_checkpoint(const Model& m);
Model load_checkpoint(const std::string& text);
void save_checkpoint_file(const Model& m, const std::string& path);
Model load_checkpoint_file(const std::string& path);

}  // namespace socnav
