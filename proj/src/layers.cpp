#include "socnav/layers.hpp"

#include <unordered_map>

namespace socnav {

using ad::Mat;
using ad::Tensor;

EdgeIndex edge_index(int n_nodes, const std::vector<Edge>& edges,
                     const std::vector<int>& relations) {
  if (!relations.empty() && relations.size() != edges.size())
    throw DimensionError("edge_index: " + std::to_string(relations.size()) + " relations for " +
                         std::to_string(edges.size()) + " edges");
  EdgeIndex ei;
  ei.n_nodes = n_nodes;
  ei.src.reserve(edges.size());
  ei.dst.reserve(edges.size());
  for (const Edge& e : edges) {
    ei.src.push_back(e.src);
    ei.dst.push_back(e.dst);
  }
  ei.relations = relations;
  return ei;
}

EdgeIndex edge_index(const Graph& g) { return edge_index(g.n_nodes(), g.edges, g.relations); }

namespace {

// Splits the edge list by relation id; validates ids against the vocabulary.
std::vector<std::vector<int>> edges_by_relation(const EdgeIndex& ei) {
  if (ei.relations.empty())
    throw ConfigError("relation-typed layer on a graph without edge relations");
  std::vector<std::vector<int>> buckets(kRelationCount);
  for (std::size_t k = 0; k < ei.relations.size(); ++k) {
    const int r = ei.relations[k];
    if (r < 0 || r >= kRelationCount)
      throw ValidationError("unknown relation id " + std::to_string(r), "relations");
    buckets[static_cast<std::size_t>(r)].push_back(static_cast<int>(k));
  }
  return buckets;
}

}  // namespace

ad::Tensor gcn_layer(const EdgeIndex& ei, const Tensor& H, const GcnParams& p, bool apply_relu) {
  const Tensor msgs = ad::gather_rows(H, ei.src);
  const Tensor agg = ad::scatter_sum(msgs, ei.dst, ei.n_nodes);
  Tensor y = ad::linear_forward(ad::concat_cols(agg, H), p.W, p.b);
  return apply_relu ? ad::relu(y) : y;
}

ad::Tensor gat_layer(const EdgeIndex& ei, const Tensor& H, const GatParams& p, double alpha,
                     GatMode mode) {
  if (p.heads.empty()) throw ConfigError("gat_layer: needs at least one head");
  if (!(alpha > 0.0) || !(alpha < 1.0)) throw ConfigError("gat_layer: alpha must be in (0, 1)");

  Tensor combined;
  for (std::size_t h = 0; h < p.heads.size(); ++h) {
    const GatHeadParams& head = p.heads[h];
    const Tensor z = ad::matmul(H, head.W);
    const Tensor s_src = ad::matmul(z, head.a_src);
    const Tensor s_dst = ad::matmul(z, head.a_dst);
    const Tensor logits =
        ad::add(ad::gather_rows(s_src, ei.src), ad::gather_rows(s_dst, ei.dst));
    const Tensor attn =
        ad::segment_softmax(ad::leaky_relu(logits, alpha), ei.dst, ei.n_nodes);
    const Tensor weighted = ad::scale_rows(ad::gather_rows(z, ei.src), attn);
    const Tensor out = ad::scatter_sum(weighted, ei.dst, ei.n_nodes);
    if (!combined.defined()) {
      combined = out;
    } else {
      combined = mode == GatMode::Concat ? ad::concat_cols(combined, out)
                                         : ad::add(combined, out);
    }
  }
  if (mode == GatMode::Average && p.heads.size() > 1)
    combined = ad::scale(combined, 1.0 / static_cast<double>(p.heads.size()));
  return combined;
}

ad::Tensor rgcn_layer(const EdgeIndex& ei, const Tensor& H, const RgcnParams& p, bool apply_relu,
                      bool normalize) {
  if (p.rel_W.size() != static_cast<std::size_t>(kRelationCount))
    throw DimensionError("rgcn_layer: expected " + std::to_string(kRelationCount) +
                         " relation transforms, got " + std::to_string(p.rel_W.size()));
  const auto buckets = edges_by_relation(ei);
  const Eigen::Index d_out = p.rel_W[0].cols();

  Tensor acc = Tensor::leaf(Mat::Zero(ei.n_nodes, d_out));
  for (int r = 0; r < kRelationCount; ++r) {
    const auto& bucket = buckets[static_cast<std::size_t>(r)];
    if (bucket.empty()) continue;
    std::vector<int> src_sub, dst_sub;
    src_sub.reserve(bucket.size());
    dst_sub.reserve(bucket.size());
    for (int k : bucket) {
      src_sub.push_back(ei.src[static_cast<std::size_t>(k)]);
      dst_sub.push_back(ei.dst[static_cast<std::size_t>(k)]);
    }
    Tensor z = ad::matmul(ad::gather_rows(H, src_sub), p.rel_W[static_cast<std::size_t>(r)]);
    if (normalize) {
      // 1 / c_{i,r}: count of incoming relation-r edges at each destination
      std::unordered_map<int, double> count;
      for (int d : dst_sub) count[d] += 1.0;
      Mat coef(static_cast<Eigen::Index>(dst_sub.size()), 1);
      for (std::size_t k = 0; k < dst_sub.size(); ++k)
        coef(static_cast<Eigen::Index>(k), 0) = 1.0 / count[dst_sub[k]];
      z = ad::scale_rows(z, Tensor::leaf(std::move(coef)));
    }
    acc = ad::add(acc, ad::scatter_sum(z, dst_sub, ei.n_nodes));
  }
  Tensor y = ad::add_rowwise(acc, p.b);
  return apply_relu ? ad::relu(y) : y;
}

ad::Tensor ggnn_step(const EdgeIndex& ei, const Tensor& H, const GgnnParams& p) {
  if (p.rel_W.size() != static_cast<std::size_t>(kRelationCount))
    throw DimensionError("ggnn_step: expected " + std::to_string(kRelationCount) +
                         " relation transforms, got " + std::to_string(p.rel_W.size()));
  const Eigen::Index d = H.cols();
  if (p.rel_W[0].rows() != d || p.rel_W[0].cols() != d)
    throw ConfigError("ggnn_step keeps the feature width; project the input before step 1");

  const auto buckets = edges_by_relation(ei);
  Tensor acc = Tensor::leaf(Mat::Zero(ei.n_nodes, d));
  for (int r = 0; r < kRelationCount; ++r) {
    const auto& bucket = buckets[static_cast<std::size_t>(r)];
    if (bucket.empty()) continue;
    std::vector<int> src_sub, dst_sub;
    src_sub.reserve(bucket.size());
    dst_sub.reserve(bucket.size());
    for (int k : bucket) {
      src_sub.push_back(ei.src[static_cast<std::size_t>(k)]);
      dst_sub.push_back(ei.dst[static_cast<std::size_t>(k)]);
    }
    const Tensor z = ad::matmul(ad::gather_rows(H, src_sub), p.rel_W[static_cast<std::size_t>(r)]);
    acc = ad::add(acc, ad::scatter_sum(z, dst_sub, ei.n_nodes));
  }
  const Tensor m = ad::add_rowwise(acc, p.msg_b);

  const Tensor z_gate = ad::sigmoid(ad::add(ad::linear_forward(m, p.Wz, p.bz), ad::matmul(H, p.Uz)));
  const Tensor r_gate = ad::sigmoid(ad::add(ad::linear_forward(m, p.Wr, p.br), ad::matmul(H, p.Ur)));
  const Tensor h_cand =
      ad::tanh(ad::add(ad::linear_forward(m, p.Wh, p.bh), ad::matmul(ad::mul(r_gate, H), p.Uh)));
  const Tensor keep = ad::add_scalar(ad::scale(z_gate, -1.0), 1.0);  // 1 - z
  return ad::add(ad::mul(keep, H), ad::mul(z_gate, h_cand));
}

ad::Tensor gcn_layer(const Graph& g, const Tensor& H, const GcnParams& p, bool apply_relu) {
  return gcn_layer(edge_index(g), H, p, apply_relu);
}

ad::Tensor gat_layer(const Graph& g, const Tensor& H, const GatParams& p, double alpha,
                     GatMode mode) {
  return gat_layer(edge_index(g), H, p, alpha, mode);
}

ad::Tensor rgcn_layer(const Graph& g, const Tensor& H, const RgcnParams& p, bool apply_relu,
                      bool normalize) {
  return rgcn_layer(edge_index(g), H, p, apply_relu, normalize);
}

ad::Tensor ggnn_step(const Graph& g, const Tensor& H, const GgnnParams& p) {
  return ggnn_step(edge_index(g), H, p);
}

}  // namespace socnav
