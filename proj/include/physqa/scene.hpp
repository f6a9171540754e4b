#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "physqa/common.hpp"
#include "physqa/rope_types.hpp"

namespace physqa::scene {

// ---------------------------------------------------------------------------
// Vocabulary types

enum class Color {
  Blue, Black, Brown, Cyan, Gray, Green, Pink, Orange, Purple, Red, Yellow,
  LightBlue, White,
};
inline constexpr int kColorCount = 13;

std::string to_string(Color c);
Color color_from_string(const std::string& s);
std::vector<Color> all_colors();

enum class Category {
  Cube, Sphere, Pulley, Rope, FixedPoint, Fluid, Container, Stick, Emitter,
  Cloth, Pillar, Plate, Ball, Pit, FloatingWall,
};

std::string to_string(Category c);
Category category_from_string(const std::string& s);

enum class SceneKind { Fluid, Rope, Cloth, Ball };

std::string to_string(SceneKind k);
SceneKind kind_from_string(const std::string& s);

// Legal object categories per scenario kind. Sampling rejects anything else.
const std::vector<Category>& legal_categories(SceneKind kind);
bool category_legal(SceneKind kind, Category c);

enum class ShapeModifier { Solid, Hollow };
std::string to_string(ShapeModifier m);
ShapeModifier shape_from_string(const std::string& s);

enum class PositionSlot { Left, Right };
std::string to_string(PositionSlot p);
PositionSlot slot_from_string(const std::string& s);

// ---------------------------------------------------------------------------
// Physical properties. Fields irrelevant to a category stay unset.

struct PhysicalProperties {
  std::optional<double> mass;
  std::optional<double> density;
  std::optional<double> viscosity;
  std::optional<double> bulk_modulus;
  std::optional<double> surface_tension;
  std::optional<double> youngs_modulus;
  std::optional<double> poisson_ratio;
  std::optional<double> yield_stress;
  std::optional<double> stretching_compliance;
  std::optional<double> bending_compliance;
  std::optional<double> friction;

  bool operator==(const PhysicalProperties&) const = default;
};

// Configured value pools the sampler draws from. Any two distinct levels in
// the comparison-bearing pools differ by a ratio >= 2 so that "much
// greater/less" questions are never ambiguous.
struct PropertyPools {
  std::vector<double> density{500.0, 1000.0, 2000.0};
  std::vector<double> viscosity{0.01, 0.3};
  std::vector<double> youngs_modulus{0.05, 0.1, 0.4};
  std::vector<double> yield_stress{0.003, 0.03, 1e6};  // 1e6 == effectively elastic
  std::vector<double> poisson_ratio{0.1, 0.3};
  std::vector<double> mass{1.0, 2.0, 4.0};
  std::vector<double> stretching_compliance{1e-5, 4e-5};
  std::vector<double> bending_compliance{5e-3, 2e-2};
  std::vector<double> cloth_friction{0.05, 0.6};
  std::vector<double> rigid_mass{0.05, 0.2, 0.8};

  void validate(SceneKind kind) const;  // throws Config error naming the empty pool
};

// ---------------------------------------------------------------------------
// Scene objects

struct Pose {
  double x = 0, y = 0, z = 0;
  double rotation = 0;  // radians
  double scale = 1;

  bool operator==(const Pose&) const = default;
};

struct SceneObject {
  int id = -1;
  Category category{};
  Color color{};
  std::optional<ShapeModifier> shape_modifier;  // pulleys only
  std::optional<PositionSlot> position_slot;    // cloths and pits only
  bool movable = false;
  Pose pose;
  std::string property_ref;  // key into Scenario::properties, may be empty

  bool operator==(const SceneObject&) const = default;
};

// ---------------------------------------------------------------------------
// Per-kind layout payloads. These carry the geometry the simulators consume;
// every entry references a SceneObject by id.

struct EmitterSpec {
  int object_id = -1;
  int group = -1;          // particle material group fed by this emitter
  Vec2 position;
  Vec2 velocity{0.0, -0.05};
  int start_frame = 0;
  int end_frame = 90;      // exclusive
  int period_frames = 5;   // one particle block per period
  bool operator==(const EmitterSpec&) const = default;
};

struct FluidSpec {
  int object_id = -1;
  int group = -1;
  bool operator==(const FluidSpec&) const = default;
};

struct StickSpec {
  int object_id = -1;
  Vec2 a, b;  // capsule endpoints
  bool operator==(const StickSpec&) const = default;
};

struct ContainerSpec {
  int object_id = -1;
  double x_center = 0;
  double width = 0.05;
  double wall_height = 0.035;
  bool operator==(const ContainerSpec&) const = default;
};

struct FluidLayout {
  std::vector<FluidSpec> fluids;
  std::vector<EmitterSpec> emitters;
  std::vector<StickSpec> sticks;
  std::vector<ContainerSpec> containers;
  double floor_y = 0;
  bool operator==(const FluidLayout&) const = default;
};

struct BallSpec {
  int object_id = -1;
  int group = -1;
  Vec2 center;
  double radius = 0.004;
  Vec2 velocity;
  bool operator==(const BallSpec&) const = default;
};

struct WallSpec {
  int object_id = -1;
  Vec2 a, b;
  bool operator==(const WallSpec&) const = default;
};

struct PitSpec {
  int object_id = -1;
  double x0 = 0, x1 = 0;  // gap interval in the floor
  bool operator==(const PitSpec&) const = default;
};

struct BallLayout {
  std::vector<BallSpec> balls;
  std::vector<WallSpec> walls;
  std::vector<PitSpec> pits;
  double floor_y = 0;         // top surface of the floor slab
  double floor_thickness = 0.015;
  bool operator==(const BallLayout&) const = default;
};

struct TabletopSpec {
  int object_id = -1;
  double base_halfwidth = 0.03;
  double height = 0.12;
  bool operator==(const TabletopSpec&) const = default;
};

struct ClothSpec {
  int object_id = -1;
  int resolution = 24;     // particles per side
  double size = 0.4;       // edge length, metres
  double z_center = 0;
  bool operator==(const ClothSpec&) const = default;
};

// Prescribed grip motion: the leading cloth edge is driven from
// (start_x, start_y) along +x, lifting to peak_y and descending to end_y.
struct GripPath {
  int start_frame = 15;
  int end_frame = 145;
  double start_x = -0.05, end_x = 0.75;
  double start_y = 0.01, peak_y = 0.32, end_y = 0.12;
  bool operator==(const GripPath&) const = default;
};

struct ClothLayout {
  std::vector<ClothSpec> cloths;       // exactly two, slots left/right
  std::vector<TabletopSpec> objects;   // pillars and plates
  GripPath grip;
  bool operator==(const ClothLayout&) const = default;
};

// ---------------------------------------------------------------------------
// Scenario

int frame_count_for(SceneKind kind);  // fluid 250, rope 150, cloth 145, ball 120

// How far past the observed window the forecast rollout may run.
int extended_frame_count_for(SceneKind kind);

struct Scenario {
  SceneKind kind{};
  std::uint64_t rng_seed = 0;
  int frame_count = 0;
  double frame_dt = 1.0 / 60.0;
  std::vector<SceneObject> objects;
  std::map<std::string, PhysicalProperties> properties;

  // world-to-sim rescale (simulators run in the rescaled unit square)
  double world_scale = 1.0;

  // exactly one layout is populated, matching `kind`
  std::optional<FluidLayout> fluid;
  std::optional<rope::RopeSystem> rope_system;
  std::optional<ClothLayout> cloth;
  std::optional<BallLayout> ball;

  // camera placeholder: rendering is out of scope, the record keeps the slot
  std::map<std::string, double> camera;

  // unknown JSON fields from a read file, preserved verbatim on write
  std::string extra_json;

  bool operator==(const Scenario&) const = default;

  const SceneObject* find_object(int id) const;
  const SceneObject& object(int id) const;
  const PhysicalProperties& props_of(int id) const;
  std::optional<double> property_value(int id, const std::string& name) const;
};

// ---------------------------------------------------------------------------
// Annotation record (ground-truth perception substitute)

struct TimedEvent {
  std::string type;   // "object_cloth_contact", "object_object_collision", "ball_collision", ...
  int frame = 0;
  int a = -1;         // object ids
  int b = -1;
  bool operator==(const TimedEvent&) const = default;
};

struct FluidAnnotation {
  // container object id -> fluid group -> particle count
  std::map<int, std::map<int, int>> container_counts;
  std::map<int, std::map<int, int>> container_counts_extended;
  // stick object id -> fluid group -> number of particles that touched it
  std::map<int, std::map<int, int>> stick_contacts;
  std::map<int, std::map<int, int>> stick_contacts_extended;
  // per particle: ordered list of stick object ids touched (extended horizon)
  std::vector<std::vector<int>> particle_paths;
  // fluid group -> particle count at the end of the observed window
  std::map<int, int> group_counts;
  bool operator==(const FluidAnnotation&) const = default;
};

struct RopeAnnotation {
  std::vector<std::vector<int>> groups;       // connected components, object ids
  std::map<int, std::string> motion;          // movable body id -> move up/move down/static
  std::map<int, std::string> rotation;        // pulley id -> clockwise/anticlockwise/static
  std::map<int, double> tension;              // rope id -> tension (single value per rope)
  std::map<int, double> acceleration;         // movable body id -> signed, + up
  bool operator==(const RopeAnnotation&) const = default;
};

struct ClothAnnotation {
  std::vector<TimedEvent> events;
  std::map<int, std::string> final_state;     // object id -> upright/displaced/fallen
  std::map<int, double> drift;                // object id -> horizontal drift (m)
  std::vector<std::pair<int, int>> final_touch_pairs;
  double final_edge_tension_max = 0;          // final-frame per-edge constraint force, max
  double final_edge_tension_mean = 0;
  bool operator==(const ClothAnnotation&) const = default;
};

struct BallAnnotation {
  std::map<int, int> settled_pit;             // ball id -> pit id (observed window), -1 = none
  std::map<int, int> settled_pit_extended;    // same over the forecast horizon
  std::map<int, int> first_collision_frame;   // ball id -> frame, -1 = none in window
  std::vector<TimedEvent> collisions;         // observed window only
  bool operator==(const BallAnnotation&) const = default;
};

struct AnnotationRecord {
  Scenario scenario;
  std::optional<FluidAnnotation> fluid;
  std::optional<RopeAnnotation> rope;
  std::optional<ClothAnnotation> cloth;
  std::optional<BallAnnotation> ball;

  // unknown JSON fields from a read file, preserved verbatim on write
  std::string extra_json;

  bool operator==(const AnnotationRecord&) const = default;
};

// ---------------------------------------------------------------------------
// Operations

struct Violation {
  std::string field;
  int object_id = -1;
  std::string message;
};

Scenario sample_scenario(SceneKind kind, std::uint64_t seed, const PropertyPools& pools = {});

std::vector<Violation> validate_scenario(const Scenario& s);
std::vector<Violation> validate_annotation(const AnnotationRecord& a);

// JSON persistence. Unknown fields in a read file are preserved opaquely and
// written back on the next write.
inline constexpr int kSchemaVersion = 1;

std::string scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const std::string& text);

std::string annotation_to_json(const AnnotationRecord& a);
AnnotationRecord annotation_from_json(const std::string& text);

void write_annotation(const std::string& path, const AnnotationRecord& a);
AnnotationRecord read_annotation(const std::string& path);
void write_scenario(const std::string& path, const Scenario& s);
Scenario read_scenario(const std::string& path);

}  // namespace physqa::scene
