#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "socnav/autodiff.hpp"
#include "socnav/scenario.hpp"

namespace socnav {

enum class NodeKind : int { Robot = 0, Room = 1, Wall = 2, Human = 3, Object = 4, InteractionNode = 5 };

const char* node_kind_name(NodeKind k);

// Unlabelled graphs carry interaction nodes; labelled graphs instead link the
// interacting entities directly and tag every edge with a relation id.
enum class GraphVariant { Unlabelled, Labelled };

const char* variant_name(GraphVariant v);
GraphVariant variant_from_name(const std::string& name);

// Closed edge-label vocabulary of the labelled variant. Relations are the
// concatenation of the endpoint node types, plus self for self-loops.
enum class Relation : int {
  Self = 0,
  WallRoom = 1,
  RoomRobot = 2,
  HumanRobot = 3,
  ObjectRobot = 4,
  HumanHuman = 5,
  HumanObject = 6,
  ObjectHuman = 7,
};

inline constexpr int kRelationCount = 8;

const char* relation_name(Relation r);
Relation relation_between(NodeKind src, NodeKind dst);  // throws ValidationError off-vocabulary

struct Edge {
  int src = 0;
  int dst = 0;
  bool operator==(const Edge&) const = default;
};

// Feature width of one node row: 24 unlabelled, 20 labelled.
int feature_width(GraphVariant v);

struct Graph {
  GraphVariant variant = GraphVariant::Unlabelled;
  std::vector<NodeKind> node_types;
  ad::Mat features;            // n_nodes x feature_width(variant)
  std::vector<Edge> edges;     // directed src -> dst, self-loops included
  std::vector<int> relations;  // labelled variant: one Relation id per edge
  int robot_index = 0;
  std::optional<double> label;  // scenario label / 100, in [0, 1]

  int n_nodes() const { return static_cast<int>(node_types.size()); }
  int n_edges() const { return static_cast<int>(edges.size()); }
};

// (sin, cos) of an angle.
std::pair<double, double> encode_angle(double alpha);

// Which scenario element a graph node stands for. index selects into
// s.walls / s.humans / s.objects / s.interactions; unused for robot and room.
struct NodeRef {
  NodeKind kind = NodeKind::Robot;
  int index = -1;
};

// One feature row. Layout is fixed per variant: the type one-hot first, then
// disjoint per-type slots (human, object, room, wall, interaction); slots of
// other types stay zero. All geometry is taken in the robot frame.
Eigen::RowVectorXd node_features(const NodeRef& node, const Scenario& s, GraphVariant variant);

// With no humans present, the room's distance-to-closest-human feature.
inline constexpr double kNoHumanDistanceSentinel = 10.0;

Graph build_graph_unlabelled(const Scenario& s);
Graph build_graph_labelled(const Scenario& s);
Graph build_graph(const Scenario& s, GraphVariant variant);

// Relabels nodes: perm[old_index] = new_index. Types, features, edges,
// relations and robot_index move together, so the result is isomorphic.
Graph permute_graph(const Graph& g, const std::vector<int>& perm);

std::string graph_to_json(const Graph& g);
std::string graph_to_dot(const Graph& g);

}  // namespace socnav
