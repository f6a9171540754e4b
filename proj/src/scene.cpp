#include "physqa/scene.hpp"

#include <algorithm>
#include <array>
#include <set>

namespace physqa {

void svd2(const Mat2& f, Mat2& u, Vec2& sig, Mat2& v) {
  // Closed-form decomposition via the two Givens angles of F = U S V^T.
  double e = (f.m00 + f.m11) * 0.5;
  double g = (f.m00 - f.m11) * 0.5;
  double k = (f.m10 + f.m01) * 0.5;
  double h = (f.m10 - f.m01) * 0.5;
  double q = std::sqrt(e * e + h * h);
  double r = std::sqrt(g * g + k * k);
  double a1 = std::atan2(k, g);
  double a2 = std::atan2(h, e);
  sig = {q + r, q - r};
  u = rotation2((a2 + a1) * 0.5);
  v = rotation2((a1 - a2) * 0.5);
}

std::uint64_t derive_seed(std::uint64_t master, const std::string& tag, std::uint64_t counter) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a over the tag
  for (unsigned char c : tag) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return splitmix64(master ^ splitmix64(h ^ (counter * 0x9e3779b97f4a7c15ULL)));
}

namespace rope {

const Body* RopeSystem::find_body(int object_id) const {
  for (const auto& b : bodies)
    if (b.object_id == object_id) return &b;
  return nullptr;
}

}  // namespace rope

namespace scene {

namespace {

const std::array<std::pair<Color, const char*>, kColorCount> kColorNames{{
    {Color::Blue, "blue"}, {Color::Black, "black"}, {Color::Brown, "brown"},
    {Color::Cyan, "cyan"}, {Color::Gray, "gray"}, {Color::Green, "green"},
    {Color::Pink, "pink"}, {Color::Orange, "orange"}, {Color::Purple, "purple"},
    {Color::Red, "red"}, {Color::Yellow, "yellow"}, {Color::LightBlue, "light blue"},
    {Color::White, "white"},
}};

const std::array<std::pair<Category, const char*>, 15> kCategoryNames{{
    {Category::Cube, "cube"}, {Category::Sphere, "sphere"}, {Category::Pulley, "pulley"},
    {Category::Rope, "rope"}, {Category::FixedPoint, "fixed point"}, {Category::Fluid, "fluid"},
    {Category::Container, "container"}, {Category::Stick, "stick"}, {Category::Emitter, "emitter"},
    {Category::Cloth, "cloth"}, {Category::Pillar, "pillar"}, {Category::Plate, "plate"},
    {Category::Ball, "ball"}, {Category::Pit, "pit"}, {Category::FloatingWall, "floating wall"},
}};

}  // namespace

std::string to_string(Color c) {
  for (auto& [v, n] : kColorNames)
    if (v == c) return n;
  fail(ErrorCode::Parse, "unknown color enum value");
}

Color color_from_string(const std::string& s) {
  for (auto& [v, n] : kColorNames)
    if (s == n) return v;
  fail(ErrorCode::Parse, "unknown color: '" + s + "'");
}

std::vector<Color> all_colors() {
  std::vector<Color> out;
  for (auto& [v, n] : kColorNames) out.push_back(v);
  return out;
}

std::string to_string(Category c) {
  for (auto& [v, n] : kCategoryNames)
    if (v == c) return n;
  fail(ErrorCode::Parse, "unknown category enum value");
}

Category category_from_string(const std::string& s) {
  for (auto& [v, n] : kCategoryNames)
    if (s == n) return v;
  fail(ErrorCode::Parse, "unknown category: '" + s + "'");
}

std::string to_string(SceneKind k) {
  switch (k) {
    case SceneKind::Fluid: return "fluid";
    case SceneKind::Rope: return "rope";
    case SceneKind::Cloth: return "cloth";
    case SceneKind::Ball: return "ball";
  }
  fail(ErrorCode::Parse, "unknown scene kind enum value");
}

SceneKind kind_from_string(const std::string& s) {
  if (s == "fluid") return SceneKind::Fluid;
  if (s == "rope") return SceneKind::Rope;
  if (s == "cloth") return SceneKind::Cloth;
  if (s == "ball") return SceneKind::Ball;
  fail(ErrorCode::Parse, "unknown scene kind: '" + s + "'");
}

const std::vector<Category>& legal_categories(SceneKind kind) {
  static const std::vector<Category> rope{Category::Cube, Category::Sphere, Category::Pulley,
                                          Category::Rope, Category::FixedPoint};
  static const std::vector<Category> fluid{Category::Fluid, Category::Container, Category::Stick,
                                           Category::Emitter};
  static const std::vector<Category> cloth{Category::Cloth, Category::Pillar, Category::Plate};
  static const std::vector<Category> ball{Category::Ball, Category::FloatingWall, Category::Pit};
  switch (kind) {
    case SceneKind::Rope: return rope;
    case SceneKind::Fluid: return fluid;
    case SceneKind::Cloth: return cloth;
    case SceneKind::Ball: return ball;
  }
  fail(ErrorCode::Parse, "unknown scene kind enum value");
}

bool category_legal(SceneKind kind, Category c) {
  const auto& legal = legal_categories(kind);
  return std::find(legal.begin(), legal.end(), c) != legal.end();
}

std::string to_string(ShapeModifier m) { return m == ShapeModifier::Solid ? "solid" : "hollow"; }

ShapeModifier shape_from_string(const std::string& s) {
  if (s == "solid") return ShapeModifier::Solid;
  if (s == "hollow") return ShapeModifier::Hollow;
  fail(ErrorCode::Parse, "unknown shape modifier: '" + s + "'");
}

std::string to_string(PositionSlot p) { return p == PositionSlot::Left ? "left" : "right"; }

PositionSlot slot_from_string(const std::string& s) {
  if (s == "left") return PositionSlot::Left;
  if (s == "right") return PositionSlot::Right;
  fail(ErrorCode::Parse, "unknown position slot: '" + s + "'");
}

void PropertyPools::validate(SceneKind kind) const {
  auto need = [](const std::vector<double>& pool, const char* name) {
    if (pool.empty()) fail(ErrorCode::Config, std::string("empty property pool: ") + name);
  };
  switch (kind) {
    case SceneKind::Fluid:
      need(density, "density");
      need(viscosity, "viscosity");
      break;
    case SceneKind::Rope:
      need(mass, "mass");
      break;
    case SceneKind::Cloth:
      need(stretching_compliance, "stretching_compliance");
      need(bending_compliance, "bending_compliance");
      need(cloth_friction, "cloth_friction");
      need(rigid_mass, "rigid_mass");
      break;
    case SceneKind::Ball:
      need(youngs_modulus, "youngs_modulus");
      need(yield_stress, "yield_stress");
      need(poisson_ratio, "poisson_ratio");
      break;
  }
}

int frame_count_for(SceneKind kind) {
  switch (kind) {
    case SceneKind::Fluid: return 250;
    case SceneKind::Rope: return 150;
    case SceneKind::Cloth: return 145;
    case SceneKind::Ball: return 120;
  }
  fail(ErrorCode::Parse, "unknown scene kind enum value");
}

int extended_frame_count_for(SceneKind kind) {
  switch (kind) {
    case SceneKind::Fluid: return 400;
    case SceneKind::Rope: return 180;   // 150 + 30-frame forecast
    case SceneKind::Cloth: return 145;  // the episode is its own forecast target
    case SceneKind::Ball: return 180;
  }
  fail(ErrorCode::Parse, "unknown scene kind enum value");
}

const SceneObject* Scenario::find_object(int id) const {
  for (const auto& o : objects)
    if (o.id == id) return &o;
  return nullptr;
}

const SceneObject& Scenario::object(int id) const {
  const SceneObject* o = find_object(id);
  if (!o) fail(ErrorCode::Validation, "no object with id " + std::to_string(id));
  return *o;
}

const PhysicalProperties& Scenario::props_of(int id) const {
  const SceneObject& o = object(id);
  auto it = properties.find(o.property_ref);
  if (it == properties.end())
    fail(ErrorCode::Validation, "object " + std::to_string(id) + " has no properties entry");
  return it->second;
}

std::optional<double> Scenario::property_value(int id, const std::string& name) const {
  const SceneObject* o = find_object(id);
  if (!o) return std::nullopt;
  auto it = properties.find(o->property_ref);
  if (it == properties.end()) return std::nullopt;
  const PhysicalProperties& p = it->second;
  if (name == "mass") return p.mass;
  if (name == "density") return p.density;
  if (name == "viscosity") return p.viscosity;
  if (name == "elasticity") {
    // elasticity: deformation resistance for balls, inverse stretching
    // compliance for cloths
    if (o->category == Category::Cloth) {
      if (p.stretching_compliance && *p.stretching_compliance > 0)
        return 1.0 / *p.stretching_compliance;
      return std::nullopt;
    }
    return p.youngs_modulus;
  }
  if (name == "plasticity") {
    // plasticity grows as yield stress shrinks
    if (p.yield_stress && *p.yield_stress > 0) return 1.0 / *p.yield_stress;
    return std::nullopt;
  }
  if (name == "bending") {
    // "harder to bend" compares inverse bending compliance
    if (p.bending_compliance && *p.bending_compliance > 0) return 1.0 / *p.bending_compliance;
    return std::nullopt;
  }
  if (name == "friction") return p.friction;
  if (name == "yield_stress") return p.yield_stress;
  if (name == "youngs_modulus") return p.youngs_modulus;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

void check_ids_exist(const Scenario& s, int id, const char* field,
                     std::vector<Violation>& out) {
  if (!s.find_object(id))
    out.push_back({field, id, std::string(field) + " references missing object id " +
                                  std::to_string(id)});
}

}  // namespace

std::vector<Violation> validate_scenario(const Scenario& s) {
  std::vector<Violation> out;
  std::set<int> seen;
  for (const auto& o : s.objects) {
    if (!seen.insert(o.id).second)
      out.push_back({"objects.id", o.id, "duplicate object id"});
    if (!category_legal(s.kind, o.category))
      out.push_back({"objects.category", o.id,
                     "category '" + to_string(o.category) + "' illegal in " + to_string(s.kind) +
                         " scenario"});
    if (o.shape_modifier && o.category != Category::Pulley)
      out.push_back({"objects.shape_modifier", o.id, "shape modifier on non-pulley"});
    if (o.position_slot && o.category != Category::Cloth && o.category != Category::Pit)
      out.push_back({"objects.position_slot", o.id, "position slot on non-cloth, non-pit"});
    if (!o.property_ref.empty() && !s.properties.count(o.property_ref))
      out.push_back({"objects.property_ref", o.id, "dangling property ref '" + o.property_ref + "'"});
  }
  if (s.frame_count != frame_count_for(s.kind))
    out.push_back({"frame_count", -1,
                   "frame_count " + std::to_string(s.frame_count) + " != " +
                       std::to_string(frame_count_for(s.kind)) + " for " + to_string(s.kind)});
  for (const auto& [ref, p] : s.properties) {
    auto nonneg = [&](const std::optional<double>& v, const char* name) {
      if (v && *v < 0)
        out.push_back({std::string("properties.") + name, -1,
                       "negative " + std::string(name) + " in '" + ref + "'"});
    };
    nonneg(p.mass, "mass");
    nonneg(p.density, "density");
    nonneg(p.viscosity, "viscosity");
    nonneg(p.youngs_modulus, "youngs_modulus");
    nonneg(p.yield_stress, "yield_stress");
    nonneg(p.friction, "friction");
    if (p.poisson_ratio && (*p.poisson_ratio < 0 || *p.poisson_ratio >= 0.5))
      out.push_back({"properties.poisson_ratio", -1, "poisson ratio outside [0, 0.5) in '" + ref + "'"});
  }

  // layout payload consistency
  if (s.fluid) {
    for (const auto& f : s.fluid->fluids) check_ids_exist(s, f.object_id, "fluid.fluids", out);
    for (const auto& e : s.fluid->emitters) check_ids_exist(s, e.object_id, "fluid.emitters", out);
    for (const auto& st : s.fluid->sticks) check_ids_exist(s, st.object_id, "fluid.sticks", out);
    for (const auto& c : s.fluid->containers) check_ids_exist(s, c.object_id, "fluid.containers", out);
  }
  if (s.ball) {
    for (const auto& b : s.ball->balls) check_ids_exist(s, b.object_id, "ball.balls", out);
    for (const auto& w : s.ball->walls) check_ids_exist(s, w.object_id, "ball.walls", out);
    for (const auto& p : s.ball->pits) check_ids_exist(s, p.object_id, "ball.pits", out);
  }
  if (s.cloth) {
    for (const auto& c : s.cloth->cloths) check_ids_exist(s, c.object_id, "cloth.cloths", out);
    for (const auto& o : s.cloth->objects) check_ids_exist(s, o.object_id, "cloth.objects", out);
    if (s.cloth->cloths.size() != 2)
      out.push_back({"cloth.cloths", -1, "cloth scenario requires exactly two cloths"});
  }
  if (s.rope_system) {
    for (const auto& b : s.rope_system->bodies) check_ids_exist(s, b.object_id, "rope.bodies", out);
    for (const auto& r : s.rope_system->ropes) {
      check_ids_exist(s, r.object_id, "rope.ropes", out);
      if (r.path.size() < 2)
        out.push_back({"rope.ropes.path", r.object_id, "rope with fewer than 2 visits"});
    }
  }
  return out;
}

std::vector<Violation> validate_annotation(const AnnotationRecord& a) {
  std::vector<Violation> out = validate_scenario(a.scenario);
  const Scenario& s = a.scenario;
  auto check = [&](int id, const char* field) { check_ids_exist(s, id, field, out); };
  auto check_frame = [&](int frame, const char* field) {
    if (frame < 0 || frame >= s.frame_count)
      out.push_back({field, -1,
                     std::string(field) + " frame " + std::to_string(frame) +
                         " outside [0, " + std::to_string(s.frame_count) + ")"});
  };

  if (a.fluid) {
    for (const auto& [cid, counts] : a.fluid->container_counts) check(cid, "fluid.container_counts");
    for (const auto& [sid, counts] : a.fluid->stick_contacts) check(sid, "fluid.stick_contacts");
    for (const auto& path : a.fluid->particle_paths)
      for (int sid : path) check(sid, "fluid.particle_paths");
  }
  if (a.rope) {
    for (const auto& grp : a.rope->groups)
      for (int id : grp) check(id, "rope.groups");
    for (const auto& [id, m] : a.rope->motion) check(id, "rope.motion");
    for (const auto& [id, r] : a.rope->rotation) check(id, "rope.rotation");
    for (const auto& [id, t] : a.rope->tension) check(id, "rope.tension");
  }
  if (a.cloth) {
    for (const auto& ev : a.cloth->events) {
      if (ev.a >= 0) check(ev.a, "cloth.events");
      if (ev.b >= 0) check(ev.b, "cloth.events");
      check_frame(ev.frame, "cloth.events");
    }
    for (const auto& [id, st] : a.cloth->final_state) check(id, "cloth.final_state");
    for (const auto& [x, y] : a.cloth->final_touch_pairs) {
      check(x, "cloth.final_touch_pairs");
      check(y, "cloth.final_touch_pairs");
    }
  }
  if (a.ball) {
    for (const auto& [bid, pid] : a.ball->settled_pit) {
      check(bid, "ball.settled_pit");
      if (pid >= 0) check(pid, "ball.settled_pit");
    }
    for (const auto& [bid, f] : a.ball->first_collision_frame) {
      check(bid, "ball.first_collision_frame");
      if (f >= 0) check_frame(f, "ball.first_collision_frame");
    }
    for (const auto& ev : a.ball->collisions) {
      if (ev.a >= 0) check(ev.a, "ball.collisions");
      if (ev.b >= 0) check(ev.b, "ball.collisions");
      check_frame(ev.frame, "ball.collisions");
    }
  }
  return out;
}

}  // namespace scene
}  // namespace physqa
