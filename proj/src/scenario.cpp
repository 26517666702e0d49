#include "socnav/scenario.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

namespace socnav {

using ordered_json = nlohmann::ordered_json;

double normalize_angle(double theta) {
  double t = std::fmod(theta + std::numbers::pi, 2.0 * std::numbers::pi);
  if (t <= 0.0) t += 2.0 * std::numbers::pi;
  return t - std::numbers::pi;
}

Vec2 to_robot_frame(const Vec2& p, const Pose2D& robot) {
  const double dx = p.x - robot.x;
  const double dy = p.y - robot.y;
  const double c = std::cos(robot.theta);
  const double s = std::sin(robot.theta);
  return {c * dx + s * dy, -s * dx + c * dy};
}

void validate_scenario(const Scenario& s) {
  if (s.walls.size() < 3)
    throw ValidationError("room needs at least 3 wall segments, got " +
                          std::to_string(s.walls.size()), "walls");
  for (std::size_t i = 0; i < s.walls.size(); ++i) {
    if (s.walls[i].p1 == s.walls[i].p2)
      throw ValidationError("degenerate wall segment " + std::to_string(i), "walls");
    const WallSegment& next = s.walls[(i + 1) % s.walls.size()];
    if (!(s.walls[i].p2 == next.p1))
      throw ValidationError("walls do not close: segment " + std::to_string(i) +
                            " ends away from segment " + std::to_string((i + 1) % s.walls.size()),
                            "walls");
  }

  std::unordered_set<int> human_ids, all_ids;
  for (const Entity& h : s.humans) {
    if (h.id < 0) throw ValidationError("negative id " + std::to_string(h.id), "humans");
    if (!all_ids.insert(h.id).second)
      throw ValidationError("duplicate id " + std::to_string(h.id), "humans");
    human_ids.insert(h.id);
  }
  for (const Entity& o : s.objects) {
    if (o.id < 0) throw ValidationError("negative id " + std::to_string(o.id), "objects");
    if (!all_ids.insert(o.id).second)
      throw ValidationError("duplicate id " + std::to_string(o.id), "objects");
  }

  for (const Interaction& it : s.interactions) {
    if (!all_ids.count(it.src_id))
      throw ValidationError("unknown id " + std::to_string(it.src_id), "interactions");
    if (!all_ids.count(it.dst_id))
      throw ValidationError("unknown id " + std::to_string(it.dst_id), "interactions");
    if (!human_ids.count(it.src_id))
      throw ValidationError("interaction source " + std::to_string(it.src_id) + " is not a human",
                            "interactions");
    if (it.src_id == it.dst_id)
      throw ValidationError("self-interaction on id " + std::to_string(it.src_id), "interactions");
  }

  if (s.label && (!(*s.label >= 0.0) || !(*s.label <= 100.0)))
    throw ValidationError("label " + std::to_string(*s.label) + " outside [0, 100]", "label");
}

namespace {

double get_num(const ordered_json& j, const char* key, const std::string& path) {
  if (!j.contains(key) || !j[key].is_number())
    throw ParseError("expected number at " + path + "." + key, path + "." + key);
  return j[key].get<double>();
}

int get_int(const ordered_json& j, const char* key, const std::string& path) {
  if (!j.contains(key) || !j[key].is_number_integer())
    throw ParseError("expected integer at " + path + "." + key, path + "." + key);
  return j[key].get<int>();
}

const ordered_json& get_array(const ordered_json& j, const char* key, const std::string& path) {
  if (!j.contains(key) || !j[key].is_array())
    throw ParseError("expected array at " + path + "." + key, path + "." + key);
  return j[key];
}

Entity parse_entity(const ordered_json& j, EntityKind kind, const std::string& path) {
  if (!j.is_object()) throw ParseError("expected object at " + path, path);
  Entity e;
  e.kind = kind;
  e.id = get_int(j, "id", path);
  e.pose = {get_num(j, "x", path), get_num(j, "y", path),
            normalize_angle(get_num(j, "theta", path))};
  return e;
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), "$");
  }
  if (!j.is_object()) throw ParseError("document is not an object", "$");

  Scenario s;
  if (!j.contains("robot") || !j["robot"].is_object())
    throw ParseError("expected object at robot", "robot");
  s.robot = {get_num(j["robot"], "x", "robot"), get_num(j["robot"], "y", "robot"),
             normalize_angle(get_num(j["robot"], "theta", "robot"))};

  std::size_t i = 0;
  for (const auto& w : get_array(j, "walls", "$")) {
    const std::string path = "walls[" + std::to_string(i++) + "]";
    if (!w.is_object()) throw ParseError("expected object at " + path, path);
    s.walls.push_back({{get_num(w, "x1", path), get_num(w, "y1", path)},
                       {get_num(w, "x2", path), get_num(w, "y2", path)}});
  }
  i = 0;
  for (const auto& h : get_array(j, "humans", "$"))
    s.humans.push_back(parse_entity(h, EntityKind::Human, "humans[" + std::to_string(i++) + "]"));
  i = 0;
  for (const auto& o : get_array(j, "objects", "$"))
    s.objects.push_back(parse_entity(o, EntityKind::Object, "objects[" + std::to_string(i++) + "]"));
  i = 0;
  for (const auto& it : get_array(j, "interactions", "$")) {
    const std::string path = "interactions[" + std::to_string(i++) + "]";
    if (!it.is_object()) throw ParseError("expected object at " + path, path);
    s.interactions.push_back({get_int(it, "src", path), get_int(it, "dst", path)});
  }
  if (j.contains("label")) {
    if (!j["label"].is_number()) throw ParseError("expected number at label", "label");
    s.label = j["label"].get<double>();
  }

  validate_scenario(s);
  return s;
}

std::string serialize_scenario(const Scenario& s) {
  ordered_json j;
  j["robot"] = {{"x", s.robot.x}, {"y", s.robot.y}, {"theta", s.robot.theta}};
  j["walls"] = ordered_json::array();
  for (const WallSegment& w : s.walls)
    j["walls"].push_back({{"x1", w.p1.x}, {"y1", w.p1.y}, {"x2", w.p2.x}, {"y2", w.p2.y}});
  j["humans"] = ordered_json::array();
  for (const Entity& h : s.humans)
    j["humans"].push_back(
        {{"id", h.id}, {"x", h.pose.x}, {"y", h.pose.y}, {"theta", h.pose.theta}});
  j["objects"] = ordered_json::array();
  for (const Entity& o : s.objects)
    j["objects"].push_back(
        {{"id", o.id}, {"x", o.pose.x}, {"y", o.pose.y}, {"theta", o.pose.theta}});
  j["interactions"] = ordered_json::array();
  for (const Interaction& it : s.interactions)
    j["interactions"].push_back({{"src", it.src_id}, {"dst", it.dst_id}});
  if (s.label) j["label"] = *s.label;
  return j.dump();
}

namespace {

double dist(const Vec2& a, const Vec2& b) { return std::hypot(a.x - b.x, a.y - b.y); }

Vec2 entity_position(const Scenario& s, int id) {
  for (const Entity& h : s.humans)
    if (h.id == id) return {h.pose.x, h.pose.y};
  for (const Entity& o : s.objects)
    if (o.id == id) return {o.pose.x, o.pose.y};
  throw ValidationError("unknown id " + std::to_string(id), "interactions");
}

}  // namespace

double synthetic_proxy_label(const Scenario& s) {
  if (s.humans.empty()) return 100.0;
  const Vec2 robot{s.robot.x, s.robot.y};
  double d_min = std::numeric_limits<double>::infinity();
  for (const Entity& h : s.humans) d_min = std::min(d_min, dist(robot, {h.pose.x, h.pose.y}));
  for (const Interaction& it : s.interactions) {
    const Vec2 a = entity_position(s, it.src_id);
    const Vec2 b = entity_position(s, it.dst_id);
    d_min = std::min(d_min, dist(robot, {(a.x + b.x) / 2.0, (a.y + b.y) / 2.0}));
  }
  return 100.0 * std::min(1.0, d_min / 2.0);
}

Scenario generate_synthetic(std::uint64_t seed, const SynthConfig& cfg) {
  if (!(cfg.min_room_side > 0.0) || cfg.max_room_side < cfg.min_room_side)
    throw ConfigError("room side range must satisfy 0 < min <= max");
  if (cfg.max_humans < 0 || cfg.max_objects < 0)
    throw ConfigError("entity counts must be non-negative");
  if (!(cfg.margin >= 0.0) || !(cfg.min_separation >= 0.0))
    throw ConfigError("margin and separation must be non-negative");

  Rng rng(seed);
  Scenario s;

  const double w = rng.uniform(cfg.min_room_side, cfg.max_room_side);
  const double h = rng.uniform(cfg.min_room_side, cfg.max_room_side);
  const Vec2 c00{-w / 2.0, -h / 2.0}, c10{w / 2.0, -h / 2.0};
  const Vec2 c11{w / 2.0, h / 2.0}, c01{-w / 2.0, h / 2.0};
  s.walls = {{c00, c10}, {c10, c11}, {c11, c01}, {c01, c00}};

  std::vector<Vec2> placed;
  auto place = [&](const char* what) -> Vec2 {
    for (int attempt = 0; attempt < 100; ++attempt) {
      Vec2 p{rng.uniform(-w / 2.0 + cfg.margin, w / 2.0 - cfg.margin),
             rng.uniform(-h / 2.0 + cfg.margin, h / 2.0 - cfg.margin)};
      bool clear = true;
      for (const Vec2& q : placed)
        if (dist(p, q) < cfg.min_separation) {
          clear = false;
          break;
        }
      if (clear) {
        placed.push_back(p);
        return p;
      }
    }
    throw GenerationError(std::string("could not place ") + what + " after 100 attempts", what);
  };

  const Vec2 rp = place("robot");
  s.robot = {rp.x, rp.y, normalize_angle(rng.uniform(-std::numbers::pi, std::numbers::pi))};

  const int n_humans = static_cast<int>(rng.uniform_int(0, cfg.max_humans));
  const int n_objects = static_cast<int>(rng.uniform_int(0, cfg.max_objects));
  for (int i = 0; i < n_humans; ++i) {
    const Vec2 p = place("human");
    s.humans.push_back(
        {i + 1, EntityKind::Human,
         {p.x, p.y, normalize_angle(rng.uniform(-std::numbers::pi, std::numbers::pi))}});
  }
  for (int i = 0; i < n_objects; ++i) {
    const Vec2 p = place("object");
    s.objects.push_back(
        {n_humans + i + 1, EntityKind::Object,
         {p.x, p.y, normalize_angle(rng.uniform(-std::numbers::pi, std::numbers::pi))}});
  }

  // Each human may engage one other entity, chosen uniformly.
  for (const Entity& human : s.humans) {
    if (!rng.bernoulli(cfg.interaction_rate)) continue;
    std::vector<int> candidates;
    for (const Entity& other : s.humans)
      if (other.id != human.id) candidates.push_back(other.id);
    for (const Entity& obj : s.objects) candidates.push_back(obj.id);
    if (candidates.empty()) continue;
    const int dst =
        candidates[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(candidates.size()) - 1))];
    s.interactions.push_back({human.id, dst});
  }

  s.label = synthetic_proxy_label(s);
  validate_scenario(s);
  return s;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path, path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str());
}

std::vector<Scenario> load_scenario_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path, path);
  std::vector<Scenario> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_scenario(line));
    } catch (const Error& e) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what(), e.context());
    }
  }
  return out;
}

void save_scenario_jsonl(const std::vector<Scenario>& scenarios, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path, path);
  for (const Scenario& s : scenarios) out << serialize_scenario(s) << "\n";
}

}  // namespace socnav
