#pragma once

#include <vector>

#include "socnav/graph.hpp"
#include "socnav/model.hpp"
#include "socnav/rng.hpp"
#include "socnav/scenario.hpp"

namespace socnav::testutil {

// The reference layout: four walls, four humans, one object, one
// human-to-human and one human-to-object engagement.
inline Scenario reference_scenario(bool with_label = true) {
  Scenario s;
  s.robot = {0.0, 0.0, 1.5707963267948966};
  const Vec2 a{-4.0, -3.0}, b{4.0, -3.0}, c{4.0, 3.0}, d{-4.0, 3.0};
  s.walls = {{a, b}, {b, c}, {c, d}, {d, a}};
  s.humans = {{1, EntityKind::Human, {-2.0, 1.0, 0.0}},
              {2, EntityKind::Human, {-2.0, -1.0, 1.0}},
              {3, EntityKind::Human, {2.0, 1.0, 3.0}},
              {4, EntityKind::Human, {0.0, -2.0, -1.5}}};
  s.objects = {{5, EntityKind::Object, {2.0, -1.0, 0.5}}};
  s.interactions = {{1, 2}, {3, 5}};
  if (with_label) s.label = 50.0;
  return s;
}

inline Scenario empty_room_scenario() {
  Scenario s;
  s.robot = {0.0, 0.0, 0.0};
  const Vec2 a{-3.0, -3.0}, b{3.0, -3.0}, c{3.0, 3.0}, d{-3.0, 3.0};
  s.walls = {{a, b}, {b, c}, {c, d}, {d, a}};
  return s;
}

// Random graph with self-loops on every node plus `extra_edges` random
// directed edges; random features; relations filled uniformly (labelled).
inline Graph random_raw_graph(Rng& rng, int n_nodes, GraphVariant variant, int extra_edges) {
  Graph g;
  g.variant = variant;
  g.node_types.assign(static_cast<std::size_t>(n_nodes), NodeKind::Human);
  g.node_types[0] = NodeKind::Robot;
  g.robot_index = 0;
  const int width = feature_width(variant);
  g.features.resize(n_nodes, width);
  for (int i = 0; i < n_nodes; ++i)
    for (int j = 0; j < width; ++j) g.features(i, j) = rng.uniform(-1.0, 1.0);
  for (int i = 0; i < n_nodes; ++i) {
    g.edges.push_back({i, i});
    if (variant == GraphVariant::Labelled) g.relations.push_back(static_cast<int>(Relation::Self));
  }
  for (int k = 0; k < extra_edges; ++k) {
    const int src = static_cast<int>(rng.uniform_int(0, n_nodes - 1));
    const int dst = static_cast<int>(rng.uniform_int(0, n_nodes - 1));
    g.edges.push_back({src, dst});
    if (variant == GraphVariant::Labelled)
      g.relations.push_back(static_cast<int>(rng.uniform_int(1, kRelationCount - 1)));
  }
  g.label = rng.uniform();
  return g;
}

inline std::vector<int> random_permutation(Rng& rng, int n) {
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  rng.shuffle(perm);
  return perm;
}

// Max grad_check error over every model parameter for a recomputable loss.
inline double grad_check_params(const std::function<ad::Tensor()>& loss_fn, Model& model,
                                double eps) {
  double worst = 0.0;
  auto params = model.parameters();
  for (Param& p : params) {
    for (Param& q : params) q.tensor.zero_grad();
    const double err = ad::grad_check([&](const ad::Tensor&) { return loss_fn(); }, p.tensor, eps);
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace socnav::testutil
