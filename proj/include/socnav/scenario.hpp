#pragma once

#include <optional>
#include <string>
#include <vector>

#include "socnav/errors.hpp"
#include "socnav/rng.hpp"

namespace socnav {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Vec2&) const = default;
};

// Pose in the world frame: meters, radians CCW from +x, theta in (-pi, pi].
struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  bool operator==(const Pose2D&) const = default;
};

double normalize_angle(double theta);  // into (-pi, pi]

enum class EntityKind { Human, Object };

struct Entity {
  int id = 0;
  EntityKind kind = EntityKind::Human;
  Pose2D pose;
  bool operator==(const Entity&) const = default;
};

struct WallSegment {
  Vec2 p1;
  Vec2 p2;
  bool operator==(const WallSegment&) const = default;
};

// src must name a human; dst a human or an object; no self-interaction.
struct Interaction {
  int src_id = 0;
  int dst_id = 0;
  bool operator==(const Interaction&) const = default;
};

// World-frame description of one labelled sample: a robot in a closed room
// with standing humans and objects, some of which are engaged with each
// other. The label, when present, is the 0-100 social compliance score.
struct Scenario {
  Pose2D robot;
  std::vector<WallSegment> walls;  // ordered, closed polygon
  std::vector<Entity> humans;
  std::vector<Entity> objects;
  std::vector<Interaction> interactions;
  std::optional<double> label;

  bool operator==(const Scenario&) const = default;
};

// Checks all Scenario invariants; throws ValidationError naming the offender.
void validate_scenario(const Scenario& s);

// Canonical JSON document <-> Scenario. parse(serialize(s)) == s for every
// valid s. Keys are emitted in the fixed order: robot, walls, humans,
// objects, interactions, label; empty lists stay present, an absent label
// omits the key.
Scenario parse_scenario(const std::string& text);
std::string serialize_scenario(const Scenario& s);

// World point into the robot frame: translate by -(robot.x, robot.y), then
// rotate by -robot.theta. Robot forward is +x in its own frame.
Vec2 to_robot_frame(const Vec2& p, const Pose2D& robot);

struct SynthConfig {
  double min_room_side = 4.0;
  double max_room_side = 10.0;
  int max_humans = 4;
  int max_objects = 3;
  double interaction_rate = 0.5;  // chance each human engages something
  double margin = 0.4;            // keep entities off the walls
  double min_separation = 0.5;    // pairwise clearance between placements
};

// Deterministic synthetic scenario: rectangular room, uniformly placed robot
// and entities, random interactions. The label is the analytic proxy
// 100 * min(1, d_min / 2) where d_min is the robot's distance to the nearest
// human or interaction midpoint (100 when there are no humans). The proxy is
// a smooth learnable target for dataset-free runs, not a claim about human
// judgments.
Scenario generate_synthetic(std::uint64_t seed, const SynthConfig& cfg = {});

double synthetic_proxy_label(const Scenario& s);

// File I/O. Dataset files hold one scenario document per line (.jsonl).
Scenario load_scenario_file(const std::string& path);
std::vector<Scenario> load_scenario_jsonl(const std::string& path);
void save_scenario_jsonl(const std::vector<Scenario>& scenarios, const std::string& path);

}  // namespace socnav
