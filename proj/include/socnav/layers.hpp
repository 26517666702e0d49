#pragma once

#include <vector>

#include "socnav/autodiff.hpp"
#include "socnav/graph.hpp"

namespace socnav {

// Edge endpoints split into index columns, the shape every layer consumes.
// Works for a single graph or for a batched disjoint union.
struct EdgeIndex {
  int n_nodes = 0;
  std::vector<int> src;
  std::vector<int> dst;
  std::vector<int> relations;  // aligned with src/dst; empty when unlabelled
};

EdgeIndex edge_index(const Graph& g);
EdgeIndex edge_index(int n_nodes, const std::vector<Edge>& edges,
                     const std::vector<int>& relations);

// ---- parameter bundles ------------------------------------------------------

struct GcnParams {
  ad::Tensor W;  // (2 * d_in) x d_out, applied to [aggregated, self]
  ad::Tensor b;  // 1 x d_out
};

struct GatHeadParams {
  ad::Tensor W;      // d_in x d_head projection
  ad::Tensor a_src;  // d_head x 1 attention vector, source half
  ad::Tensor a_dst;  // d_head x 1 attention vector, destination half
};

struct GatParams {
  std::vector<GatHeadParams> heads;
};

struct RgcnParams {
  // One transform per vocabulary relation; rel_W[Relation::Self] is the
  // self transform, applied through each node's self-loop.
  std::vector<ad::Tensor> rel_W;  // kRelationCount matrices, d_in x d_out
  ad::Tensor b;                   // 1 x d_out
};

struct GgnnParams {
  std::vector<ad::Tensor> rel_W;  // kRelationCount matrices, d x d
  ad::Tensor msg_b;               // 1 x d
  // GRU gates: z (update), r (reset), candidate h~. W* act on the message,
  // U* on the node state.
  ad::Tensor Wz, Uz, bz;
  ad::Tensor Wr, Ur, br;
  ad::Tensor Wh, Uh, bh;
};

enum class GatMode { Concat, Average };

// ---- layer cores (single or batched topology) -------------------------------

// Aggregate incoming source features by sum, update via one linear over
// [aggregated, self]. No degree normalization. ReLU when apply_relu.
ad::Tensor gcn_layer(const EdgeIndex& ei, const ad::Tensor& H, const GcnParams& p,
                     bool apply_relu);

// Per-head attention: logit(s->r) = LeakyReLU_alpha(a_src . z_s + a_dst . z_r),
// normalized per destination, output = attention-weighted sum of projected
// sources. Heads concatenated or averaged by mode.
ad::Tensor gat_layer(const EdgeIndex& ei, const ad::Tensor& H, const GatParams& p, double alpha,
                     GatMode mode);

// Relation-typed aggregation with relation-wise mean normalization
// (1 / count of incoming edges of that relation at the destination);
// normalization can be disabled for algebraic comparisons.
ad::Tensor rgcn_layer(const EdgeIndex& ei, const ad::Tensor& H, const RgcnParams& p,
                      bool apply_relu, bool normalize = true);

// One propagation step: per-relation message sum, then a GRU update with the
// message as input and the node feature as state. Width is preserved.
ad::Tensor ggnn_step(const EdgeIndex& ei, const ad::Tensor& H, const GgnnParams& p);

// Graph-level conveniences.
ad::Tensor gcn_layer(const Graph& g, const ad::Tensor& H, const GcnParams& p, bool apply_relu);
ad::Tensor gat_layer(const Graph& g, const ad::Tensor& H, const GatParams& p, double alpha,
                     GatMode mode);
ad::Tensor rgcn_layer(const Graph& g, const ad::Tensor& H, const RgcnParams& p, bool apply_relu,
                      bool normalize = true);
ad::Tensor ggnn_step(const Graph& g, const ad::Tensor& H, const GgnnParams& p);

}  // namespace socnav
