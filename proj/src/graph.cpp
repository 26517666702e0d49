#include "socnav/graph.hpp"

#include <cmath>
#include <unordered_map>

#include <json.hpp>

namespace socnav {

const char* node_kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::Robot: return "robot";
    case NodeKind::Room: return "room";
    case NodeKind::Wall: return "wall";
    case NodeKind::Human: return "human";
    case NodeKind::Object: return "object";
    case NodeKind::InteractionNode: return "interaction";
  }
  return "?";
}

const char* variant_name(GraphVariant v) {
  return v == GraphVariant::Unlabelled ? "unlabelled" : "labelled";
}

GraphVariant variant_from_name(const std::string& name) {
  if (name == "unlabelled") return GraphVariant::Unlabelled;
  if (name == "labelled") return GraphVariant::Labelled;
  throw ConfigError("unknown graph variant '" + name + "'", "variant");
}

const char* relation_name(Relation r) {
  switch (r) {
    case Relation::Self: return "self";
    case Relation::WallRoom: return "wall-room";
    case Relation::RoomRobot: return "room-robot";
    case Relation::HumanRobot: return "human-robot";
    case Relation::ObjectRobot: return "object-robot";
    case Relation::HumanHuman: return "human-human";
    case Relation::HumanObject: return "human-object";
    case Relation::ObjectHuman: return "object-human";
  }
  return "?";
}

Relation relation_between(NodeKind src, NodeKind dst) {
  if (src == NodeKind::Wall && dst == NodeKind::Room) return Relation::WallRoom;
  if (src == NodeKind::Room && dst == NodeKind::Robot) return Relation::RoomRobot;
  if (src == NodeKind::Human && dst == NodeKind::Robot) return Relation::HumanRobot;
  if (src == NodeKind::Object && dst == NodeKind::Robot) return Relation::ObjectRobot;
  if (src == NodeKind::Human && dst == NodeKind::Human) return Relation::HumanHuman;
  if (src == NodeKind::Human && dst == NodeKind::Object) return Relation::HumanObject;
  if (src == NodeKind::Object && dst == NodeKind::Human) return Relation::ObjectHuman;
  throw ValidationError(std::string("no relation between ") + node_kind_name(src) + " and " +
                        node_kind_name(dst), "relations");
}

int feature_width(GraphVariant v) { return v == GraphVariant::Unlabelled ? 24 : 20; }

std::pair<double, double> encode_angle(double alpha) { return {std::sin(alpha), std::cos(alpha)}; }

namespace {

struct Layout {
  int one_hot;      // number of one-hot slots (== first per-type offset)
  int human;        // 5 slots: dist, sin/cos bearing, sin/cos orientation
  int object;       // 5 slots
  int room;         // 2 slots: dist to closest human, human count
  int wall;         // 3 slots: dist, sin/cos tangent
  int interaction;  // 3 slots: dist, sin/cos connecting line (unlabelled only)
};

Layout layout_for(GraphVariant v) {
  const int base = v == GraphVariant::Unlabelled ? 6 : 5;
  return {base, base, base + 5, base + 10, base + 12, base + 15};
}

double dist2d(const Vec2& a, const Vec2& b) { return std::hypot(a.x - b.x, a.y - b.y); }

Vec2 entity_pos(const Entity& e) { return {e.pose.x, e.pose.y}; }

// dist, bearing and orientation of a posed entity, all in the robot frame.
void fill_entity_slots(Eigen::RowVectorXd& row, int offset, const Pose2D& pose,
                       const Pose2D& robot) {
  const Vec2 p = to_robot_frame({pose.x, pose.y}, robot);
  const double d = std::hypot(p.x, p.y);
  const auto [sb, cb] = encode_angle(std::atan2(p.y, p.x));
  const auto [so, co] = encode_angle(normalize_angle(pose.theta - robot.theta));
  row[offset] = d;
  row[offset + 1] = sb;
  row[offset + 2] = cb;
  row[offset + 3] = so;
  row[offset + 4] = co;
}

}  // namespace

Eigen::RowVectorXd node_features(const NodeRef& node, const Scenario& s, GraphVariant variant) {
  if (variant == GraphVariant::Labelled && node.kind == NodeKind::InteractionNode)
    throw ValidationError("labelled graphs have no interaction nodes", "node_features");

  const Layout lay = layout_for(variant);
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(feature_width(variant));
  row[static_cast<int>(node.kind)] = 1.0;

  switch (node.kind) {
    case NodeKind::Robot:
      break;  // the robot is its own origin; one-hot only
    case NodeKind::Room: {
      double closest = kNoHumanDistanceSentinel;
      for (const Entity& h : s.humans)
        closest = std::min(closest, dist2d({s.robot.x, s.robot.y}, entity_pos(h)));
      row[lay.room] = closest;
      row[lay.room + 1] = static_cast<double>(s.humans.size());
      break;
    }
    case NodeKind::Wall: {
      const WallSegment& w = s.walls.at(static_cast<std::size_t>(node.index));
      const Vec2 center{(w.p1.x + w.p2.x) / 2.0, (w.p1.y + w.p2.y) / 2.0};
      const Vec2 c = to_robot_frame(center, s.robot);
      const double tangent = std::atan2(w.p2.y - w.p1.y, w.p2.x - w.p1.x);
      const auto [st, ct] = encode_angle(normalize_angle(tangent - s.robot.theta));
      row[lay.wall] = std::hypot(c.x, c.y);
      row[lay.wall + 1] = st;
      row[lay.wall + 2] = ct;
      break;
    }
    case NodeKind::Human:
      fill_entity_slots(row, lay.human, s.humans.at(static_cast<std::size_t>(node.index)).pose,
                        s.robot);
      break;
    case NodeKind::Object:
      fill_entity_slots(row, lay.object, s.objects.at(static_cast<std::size_t>(node.index)).pose,
                        s.robot);
      break;
    case NodeKind::InteractionNode: {
      const Interaction& it = s.interactions.at(static_cast<std::size_t>(node.index));
      auto find_pos = [&](int id) -> Vec2 {
        for (const Entity& h : s.humans)
          if (h.id == id) return entity_pos(h);
        for (const Entity& o : s.objects)
          if (o.id == id) return entity_pos(o);
        throw ValidationError("unknown id " + std::to_string(id), "interactions");
      };
      const Vec2 a = find_pos(it.src_id);
      const Vec2 b = find_pos(it.dst_id);
      const Vec2 mid = to_robot_frame({(a.x + b.x) / 2.0, (a.y + b.y) / 2.0}, s.robot);
      // Connecting line taken src -> dst; sin flips with direction.
      const double line = std::atan2(b.y - a.y, b.x - a.x);
      const auto [sl, cl] = encode_angle(normalize_angle(line - s.robot.theta));
      row[lay.interaction] = std::hypot(mid.x, mid.y);
      row[lay.interaction + 1] = sl;
      row[lay.interaction + 2] = cl;
      break;
    }
  }
  return row;
}

namespace {

struct Builder {
  Graph g;
  std::vector<NodeRef> refs;

  int add_node(NodeKind kind, int index = -1) {
    g.node_types.push_back(kind);
    refs.push_back({kind, index});
    return static_cast<int>(g.node_types.size()) - 1;
  }

  void add_edge(int src, int dst) {
    g.edges.push_back({src, dst});
    if (g.variant == GraphVariant::Labelled) {
      const Relation r = src == dst ? Relation::Self
                                    : relation_between(g.node_types[static_cast<std::size_t>(src)],
                                                       g.node_types[static_cast<std::size_t>(dst)]);
      g.relations.push_back(static_cast<int>(r));
    }
  }

  Graph finish(const Scenario& s) {
    for (int i = 0; i < g.n_nodes(); ++i) add_edge(i, i);  // self-loops, every node
    g.features.resize(g.n_nodes(), feature_width(g.variant));
    for (int i = 0; i < g.n_nodes(); ++i)
      g.features.row(i) = node_features(refs[static_cast<std::size_t>(i)], s, g.variant);
    if (s.label) g.label = *s.label / 100.0;
    return std::move(g);
  }
};

}  // namespace

Graph build_graph_unlabelled(const Scenario& s) {
  validate_scenario(s);
  Builder b;
  b.g.variant = GraphVariant::Unlabelled;

  const int robot = b.add_node(NodeKind::Robot);
  const int room = b.add_node(NodeKind::Room);
  b.g.robot_index = robot;

  std::unordered_map<int, int> by_id;
  for (std::size_t i = 0; i < s.walls.size(); ++i) {
    const int wall = b.add_node(NodeKind::Wall, static_cast<int>(i));
    b.add_edge(wall, room);
  }
  b.add_edge(room, robot);
  for (std::size_t i = 0; i < s.humans.size(); ++i) {
    const int human = b.add_node(NodeKind::Human, static_cast<int>(i));
    by_id[s.humans[i].id] = human;
    b.add_edge(human, robot);
  }
  for (std::size_t i = 0; i < s.objects.size(); ++i) {
    const int object = b.add_node(NodeKind::Object, static_cast<int>(i));
    by_id[s.objects[i].id] = object;
    b.add_edge(object, robot);
  }
  for (std::size_t i = 0; i < s.interactions.size(); ++i) {
    const int inode = b.add_node(NodeKind::InteractionNode, static_cast<int>(i));
    const int src = by_id.at(s.interactions[i].src_id);
    const int dst = by_id.at(s.interactions[i].dst_id);
    b.add_edge(src, inode);
    b.add_edge(dst, inode);
    b.add_edge(inode, src);
    b.add_edge(inode, dst);
  }
  return b.finish(s);
}

Graph build_graph_labelled(const Scenario& s) {
  validate_scenario(s);
  Builder b;
  b.g.variant = GraphVariant::Labelled;

  const int robot = b.add_node(NodeKind::Robot);
  const int room = b.add_node(NodeKind::Room);
  b.g.robot_index = robot;

  std::unordered_map<int, int> by_id;
  for (std::size_t i = 0; i < s.walls.size(); ++i) {
    const int wall = b.add_node(NodeKind::Wall, static_cast<int>(i));
    b.add_edge(wall, room);
  }
  b.add_edge(room, robot);
  for (std::size_t i = 0; i < s.humans.size(); ++i) {
    const int human = b.add_node(NodeKind::Human, static_cast<int>(i));
    by_id[s.humans[i].id] = human;
    b.add_edge(human, robot);
  }
  for (std::size_t i = 0; i < s.objects.size(); ++i) {
    const int object = b.add_node(NodeKind::Object, static_cast<int>(i));
    by_id[s.objects[i].id] = object;
    b.add_edge(object, robot);
  }
  // Interacting elements link to each other directly, both ways.
  for (const Interaction& it : s.interactions) {
    const int src = by_id.at(it.src_id);
    const int dst = by_id.at(it.dst_id);
    b.add_edge(src, dst);
    b.add_edge(dst, src);
  }
  return b.finish(s);
}

Graph build_graph(const Scenario& s, GraphVariant variant) {
  return variant == GraphVariant::Unlabelled ? build_graph_unlabelled(s) : build_graph_labelled(s);
}

Graph permute_graph(const Graph& g, const std::vector<int>& perm) {
  if (static_cast<int>(perm.size()) != g.n_nodes())
    throw DimensionError("permutation size " + std::to_string(perm.size()) + " != node count " +
                         std::to_string(g.n_nodes()));
  std::vector<bool> hit(perm.size(), false);
  for (int p : perm) {
    if (p < 0 || p >= g.n_nodes() || hit[static_cast<std::size_t>(p)])
      throw ValidationError("not a permutation", "perm");
    hit[static_cast<std::size_t>(p)] = true;
  }

  Graph out;
  out.variant = g.variant;
  out.node_types.resize(g.node_types.size());
  out.features.resize(g.features.rows(), g.features.cols());
  for (int i = 0; i < g.n_nodes(); ++i) {
    out.node_types[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] =
        g.node_types[static_cast<std::size_t>(i)];
    out.features.row(perm[static_cast<std::size_t>(i)]) = g.features.row(i);
  }
  out.edges.reserve(g.edges.size());
  for (const Edge& e : g.edges)
    out.edges.push_back({perm[static_cast<std::size_t>(e.src)], perm[static_cast<std::size_t>(e.dst)]});
  out.relations = g.relations;
  out.robot_index = perm[static_cast<std::size_t>(g.robot_index)];
  out.label = g.label;
  return out;
}

std::string graph_to_json(const Graph& g) {
  nlohmann::ordered_json j;
  j["variant"] = variant_name(g.variant);
  j["n_nodes"] = g.n_nodes();
  j["feature_width"] = feature_width(g.variant);
  j["robot_index"] = g.robot_index;
  j["nodes"] = nlohmann::ordered_json::array();
  for (int i = 0; i < g.n_nodes(); ++i) {
    nlohmann::ordered_json n;
    n["index"] = i;
    n["type"] = node_kind_name(g.node_types[static_cast<std::size_t>(i)]);
    n["features"] = std::vector<double>(g.features.row(i).begin(), g.features.row(i).end());
    j["nodes"].push_back(std::move(n));
  }
  j["edges"] = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < g.edges.size(); ++k) {
    nlohmann::ordered_json e;
    e["src"] = g.edges[k].src;
    e["dst"] = g.edges[k].dst;
    if (g.variant == GraphVariant::Labelled)
      e["relation"] = relation_name(static_cast<Relation>(g.relations[k]));
    j["edges"].push_back(std::move(e));
  }
  if (g.label) j["label"] = *g.label;
  return j.dump();
}

std::string graph_to_dot(const Graph& g) {
  std::string out = "digraph scenario {\n";
  for (int i = 0; i < g.n_nodes(); ++i) {
    out += "  n" + std::to_string(i) + " [label=\"" +
           node_kind_name(g.node_types[static_cast<std::size_t>(i)]) + std::to_string(i) + "\"];\n";
  }
  for (std::size_t k = 0; k < g.edges.size(); ++k) {
    const Edge& e = g.edges[k];
    if (e.src == e.dst) continue;  // self-loops clutter the drawing
    out += "  n" + std::to_string(e.src) + " -> n" + std::to_string(e.dst);
    if (g.variant == GraphVariant::Labelled)
      out += " [label=\"" + std::string(relation_name(static_cast<Relation>(g.relations[k]))) + "\"]";
    out += ";\n";
  }
  out += "}\n";
  return out;
}

}  // namespace socnav
