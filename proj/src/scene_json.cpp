#include <fstream>
#include <set>

#include "json.hpp"
#include "physqa/scene.hpp"

namespace physqa::scene {

using nlohmann::json;

namespace {

json vec2_json(const Vec2& v) { return json{{"x", v.x}, {"y", v.y}}; }
Vec2 vec2_from(const json& j) { return {j.at("x").get<double>(), j.at("y").get<double>()}; }

json pose_json(const Pose& p) {
  return json{{"x", p.x}, {"y", p.y}, {"z", p.z}, {"rotation", p.rotation}, {"scale", p.scale}};
}

Pose pose_from(const json& j) {
  Pose p;
  p.x = j.at("x").get<double>();
  p.y = j.at("y").get<double>();
  p.z = j.value("z", 0.0);
  p.rotation = j.value("rotation", 0.0);
  p.scale = j.value("scale", 1.0);
  return p;
}

json props_json(const PhysicalProperties& p) {
  json j = json::object();
  auto put = [&](const char* k, const std::optional<double>& v) {
    if (v) j[k] = *v;
  };
  put("mass", p.mass);
  put("density", p.density);
  put("viscosity", p.viscosity);
  put("bulk_modulus", p.bulk_modulus);
  put("surface_tension", p.surface_tension);
  put("youngs_modulus", p.youngs_modulus);
  put("poisson_ratio", p.poisson_ratio);
  put("yield_stress", p.yield_stress);
  put("stretching_compliance", p.stretching_compliance);
  put("bending_compliance", p.bending_compliance);
  put("friction", p.friction);
  return j;
}

PhysicalProperties props_from(const json& j) {
  PhysicalProperties p;
  auto get = [&](const char* k, std::optional<double>& v) {
    if (j.contains(k)) v = j.at(k).get<double>();
  };
  get("mass", p.mass);
  get("density", p.density);
  get("viscosity", p.viscosity);
  get("bulk_modulus", p.bulk_modulus);
  get("surface_tension", p.surface_tension);
  get("youngs_modulus", p.youngs_modulus);
  get("poisson_ratio", p.poisson_ratio);
  get("yield_stress", p.yield_stress);
  get("stretching_compliance", p.stretching_compliance);
  get("bending_compliance", p.bending_compliance);
  get("friction", p.friction);
  return p;
}

json object_json(const SceneObject& o) {
  json j{{"id", o.id},
         {"category", to_string(o.category)},
         {"color", to_string(o.color)},
         {"movable", o.movable},
         {"pose", pose_json(o.pose)}};
  if (o.shape_modifier) j["shape_modifier"] = to_string(*o.shape_modifier);
  if (o.position_slot) j["position_slot"] = to_string(*o.position_slot);
  if (!o.property_ref.empty()) j["property_ref"] = o.property_ref;
  return j;
}

SceneObject object_from(const json& j) {
  SceneObject o;
  o.id = j.at("id").get<int>();
  o.category = category_from_string(j.at("category").get<std::string>());
  o.color = color_from_string(j.at("color").get<std::string>());
  o.movable = j.at("movable").get<bool>();
  o.pose = pose_from(j.at("pose"));
  if (j.contains("shape_modifier")) o.shape_modifier = shape_from_string(j.at("shape_modifier"));
  if (j.contains("position_slot")) o.position_slot = slot_from_string(j.at("position_slot"));
  o.property_ref = j.value("property_ref", std::string{});
  return o;
}

json fluid_layout_json(const FluidLayout& f) {
  json emitters = json::array();
  for (const auto& e : f.emitters)
    emitters.push_back({{"object_id", e.object_id},
                        {"group", e.group},
                        {"position", vec2_json(e.position)},
                        {"velocity", vec2_json(e.velocity)},
                        {"start_frame", e.start_frame},
                        {"end_frame", e.end_frame},
                        {"period_frames", e.period_frames}});
  json fluids = json::array();
  for (const auto& fs : f.fluids)
    fluids.push_back({{"object_id", fs.object_id}, {"group", fs.group}});
  json sticks = json::array();
  for (const auto& st : f.sticks)
    sticks.push_back({{"object_id", st.object_id}, {"a", vec2_json(st.a)}, {"b", vec2_json(st.b)}});
  json containers = json::array();
  for (const auto& c : f.containers)
    containers.push_back({{"object_id", c.object_id},
                          {"x_center", c.x_center},
                          {"width", c.width},
                          {"wall_height", c.wall_height}});
  return json{{"fluids", fluids},      {"emitters", emitters}, {"sticks", sticks},
              {"containers", containers}, {"floor_y", f.floor_y}};
}

FluidLayout fluid_layout_from(const json& j) {
  FluidLayout f;
  f.floor_y = j.at("floor_y").get<double>();
  for (const auto& e : j.at("emitters")) {
    EmitterSpec es;
    es.object_id = e.at("object_id").get<int>();
    es.group = e.at("group").get<int>();
    es.position = vec2_from(e.at("position"));
    es.velocity = vec2_from(e.at("velocity"));
    es.start_frame = e.at("start_frame").get<int>();
    es.end_frame = e.at("end_frame").get<int>();
    es.period_frames = e.at("period_frames").get<int>();
    f.emitters.push_back(es);
  }
  for (const auto& x : j.at("fluids"))
    f.fluids.push_back({x.at("object_id").get<int>(), x.at("group").get<int>()});
  for (const auto& x : j.at("sticks"))
    f.sticks.push_back({x.at("object_id").get<int>(), vec2_from(x.at("a")), vec2_from(x.at("b"))});
  for (const auto& x : j.at("containers")) {
    ContainerSpec c;
    c.object_id = x.at("object_id").get<int>();
    c.x_center = x.at("x_center").get<double>();
    c.width = x.at("width").get<double>();
    c.wall_height = x.at("wall_height").get<double>();
    f.containers.push_back(c);
  }
  return f;
}

json ball_layout_json(const BallLayout& b) {
  json balls = json::array();
  for (const auto& x : b.balls)
    balls.push_back({{"object_id", x.object_id},
                     {"group", x.group},
                     {"center", vec2_json(x.center)},
                     {"radius", x.radius},
                     {"velocity", vec2_json(x.velocity)}});
  json walls = json::array();
  for (const auto& x : b.walls)
    walls.push_back({{"object_id", x.object_id}, {"a", vec2_json(x.a)}, {"b", vec2_json(x.b)}});
  json pits = json::array();
  for (const auto& x : b.pits)
    pits.push_back({{"object_id", x.object_id}, {"x0", x.x0}, {"x1", x.x1}});
  return json{{"balls", balls},
              {"walls", walls},
              {"pits", pits},
              {"floor_y", b.floor_y},
              {"floor_thickness", b.floor_thickness}};
}

BallLayout ball_layout_from(const json& j) {
  BallLayout b;
  b.floor_y = j.at("floor_y").get<double>();
  b.floor_thickness = j.at("floor_thickness").get<double>();
  for (const auto& x : j.at("balls")) {
    BallSpec s;
    s.object_id = x.at("object_id").get<int>();
    s.group = x.at("group").get<int>();
    s.center = vec2_from(x.at("center"));
    s.radius = x.at("radius").get<double>();
    s.velocity = vec2_from(x.at("velocity"));
    b.balls.push_back(s);
  }
  for (const auto& x : j.at("walls"))
    b.walls.push_back({x.at("object_id").get<int>(), vec2_from(x.at("a")), vec2_from(x.at("b"))});
  for (const auto& x : j.at("pits"))
    b.pits.push_back({x.at("object_id").get<int>(), x.at("x0").get<double>(), x.at("x1").get<double>()});
  return b;
}

json rope_system_json(const rope::RopeSystem& r) {
  json bodies = json::array();
  for (const auto& b : r.bodies) {
    const char* kind = b.kind == rope::BodyKind::Anchor ? "anchor"
                       : b.kind == rope::BodyKind::Load ? "load"
                                                        : "pulley";
    bodies.push_back({{"object_id", b.object_id},
                      {"kind", kind},
                      {"mass", b.mass},
                      {"movable", b.movable},
                      {"height", b.height}});
  }
  json ropes = json::array();
  for (const auto& rp : r.ropes) {
    json path = json::array();
    for (const auto& v : rp.path)
      path.push_back({{"type", v.type == rope::Visit::Type::End ? "end" : "rim"},
                      {"body_id", v.body_id},
                      {"winding", v.winding}});
    ropes.push_back({{"object_id", rp.object_id}, {"path", path}});
  }
  return json{{"bodies", bodies}, {"ropes", ropes}, {"gravity", r.gravity}};
}

rope::RopeSystem rope_system_from(const json& j) {
  rope::RopeSystem r;
  r.gravity = j.at("gravity").get<double>();
  for (const auto& x : j.at("bodies")) {
    rope::Body b;
    b.object_id = x.at("object_id").get<int>();
    std::string kind = x.at("kind").get<std::string>();
    b.kind = kind == "anchor" ? rope::BodyKind::Anchor
             : kind == "load" ? rope::BodyKind::Load
                              : rope::BodyKind::Pulley;
    b.mass = x.at("mass").get<double>();
    b.movable = x.at("movable").get<bool>();
    b.height = x.at("height").get<double>();
    r.bodies.push_back(b);
  }
  for (const auto& x : j.at("ropes")) {
    rope::Rope rp;
    rp.object_id = x.at("object_id").get<int>();
    for (const auto& v : x.at("path")) {
      rope::Visit vis;
      vis.type = v.at("type").get<std::string>() == "end" ? rope::Visit::Type::End
                                                          : rope::Visit::Type::Rim;
      vis.body_id = v.at("body_id").get<int>();
      vis.winding = v.at("winding").get<int>();
      rp.path.push_back(vis);
    }
    r.ropes.push_back(rp);
  }
  return r;
}

json cloth_layout_json(const ClothLayout& c) {
  json cloths = json::array();
  for (const auto& x : c.cloths)
    cloths.push_back({{"object_id", x.object_id},
                      {"resolution", x.resolution},
                      {"size", x.size},
                      {"z_center", x.z_center}});
  json objects = json::array();
  for (const auto& x : c.objects)
    objects.push_back({{"object_id", x.object_id},
                       {"base_halfwidth", x.base_halfwidth},
                       {"height", x.height}});
  json grip{{"start_frame", c.grip.start_frame}, {"end_frame", c.grip.end_frame},
            {"start_x", c.grip.start_x},         {"end_x", c.grip.end_x},
            {"start_y", c.grip.start_y},         {"peak_y", c.grip.peak_y},
            {"end_y", c.grip.end_y}};
  return json{{"cloths", cloths}, {"objects", objects}, {"grip", grip}};
}

ClothLayout cloth_layout_from(const json& j) {
  ClothLayout c;
  for (const auto& x : j.at("cloths")) {
    ClothSpec s;
    s.object_id = x.at("object_id").get<int>();
    s.resolution = x.at("resolution").get<int>();
    s.size = x.at("size").get<double>();
    s.z_center = x.at("z_center").get<double>();
    c.cloths.push_back(s);
  }
  for (const auto& x : j.at("objects")) {
    TabletopSpec t;
    t.object_id = x.at("object_id").get<int>();
    t.base_halfwidth = x.at("base_halfwidth").get<double>();
    t.height = x.at("height").get<double>();
    c.objects.push_back(t);
  }
  const json& g = j.at("grip");
  c.grip.start_frame = g.at("start_frame").get<int>();
  c.grip.end_frame = g.at("end_frame").get<int>();
  c.grip.start_x = g.at("start_x").get<double>();
  c.grip.end_x = g.at("end_x").get<double>();
  c.grip.start_y = g.at("start_y").get<double>();
  c.grip.peak_y = g.at("peak_y").get<double>();
  c.grip.end_y = g.at("end_y").get<double>();
  return c;
}

// int-keyed maps are serialized as string-keyed JSON objects
template <typename V, typename Fn>
json int_map_json(const std::map<int, V>& m, Fn value_json) {
  json j = json::object();
  for (const auto& [k, v] : m) j[std::to_string(k)] = value_json(v);
  return j;
}

json counts_json(const std::map<int, std::map<int, int>>& m) {
  return int_map_json(m, [](const std::map<int, int>& inner) {
    return int_map_json(inner, [](int v) { return json(v); });
  });
}

std::map<int, std::map<int, int>> counts_from(const json& j) {
  std::map<int, std::map<int, int>> m;
  for (auto it = j.begin(); it != j.end(); ++it) {
    std::map<int, int>& inner = m[std::stoi(it.key())];
    for (auto it2 = it.value().begin(); it2 != it.value().end(); ++it2)
      inner[std::stoi(it2.key())] = it2.value().get<int>();
  }
  return m;
}

json events_json(const std::vector<TimedEvent>& evs) {
  json j = json::array();
  for (const auto& e : evs)
    j.push_back({{"type", e.type}, {"frame", e.frame}, {"a", e.a}, {"b", e.b}});
  return j;
}

std::vector<TimedEvent> events_from(const json& j) {
  std::vector<TimedEvent> out;
  for (const auto& e : j)
    out.push_back({e.at("type").get<std::string>(), e.at("frame").get<int>(),
                   e.at("a").get<int>(), e.at("b").get<int>()});
  return out;
}

// Splits a parsed object into known handling plus an opaque remainder that
// round-trips untouched (forward compatibility).
std::string collect_extra(const json& j, const std::set<std::string>& known) {
  json extra = json::object();
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) extra[it.key()] = it.value();
  return extra.empty() ? std::string{} : extra.dump();
}

void merge_extra(json& j, const std::string& extra) {
  if (extra.empty()) return;
  json e = json::parse(extra);
  for (auto it = e.begin(); it != e.end(); ++it) j[it.key()] = it.value();
}

json parse_file_or_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::Parse, "JSON parse error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

void check_schema_version(const json& j, const char* what) {
  if (!j.contains("schema_version"))
    fail(ErrorCode::Parse, std::string(what) + ": missing schema_version");
  int v = j.at("schema_version").get<int>();
  if (v != kSchemaVersion)
    fail(ErrorCode::Parse, std::string(what) + ": schema_version mismatch, file has " +
                               std::to_string(v) + ", this build supports " +
                               std::to_string(kSchemaVersion));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open for reading: " + path);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot open for writing: " + path);
  out << text;
  if (!out) fail(ErrorCode::Io, "write failed: " + path);
}

const std::set<std::string> kScenarioKeys = {
    "schema_version", "kind", "rng_seed", "frame_count", "frame_dt", "objects",
    "properties",     "world_scale", "fluid_layout", "rope_system", "cloth_layout",
    "ball_layout",    "camera"};

const std::set<std::string> kAnnotationKeys = {"schema_version", "scenario", "fluid", "rope",
                                               "cloth", "ball"};

}  // namespace

std::string scenario_to_json(const Scenario& s) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = to_string(s.kind);
  j["rng_seed"] = s.rng_seed;
  j["frame_count"] = s.frame_count;
  j["frame_dt"] = s.frame_dt;
  j["world_scale"] = s.world_scale;
  json objs = json::array();
  for (const auto& o : s.objects) objs.push_back(object_json(o));
  j["objects"] = objs;
  json props = json::object();
  for (const auto& [k, v] : s.properties) props[k] = props_json(v);
  j["properties"] = props;
  if (s.fluid) j["fluid_layout"] = fluid_layout_json(*s.fluid);
  if (s.rope_system) j["rope_system"] = rope_system_json(*s.rope_system);
  if (s.cloth) j["cloth_layout"] = cloth_layout_json(*s.cloth);
  if (s.ball) j["ball_layout"] = ball_layout_json(*s.ball);
  j["camera"] = s.camera;
  merge_extra(j, s.extra_json);
  return j.dump(2);
}

Scenario scenario_from_json(const std::string& text) {
  json j = parse_file_or_text(text);
  check_schema_version(j, "scenario");
  Scenario s;
  s.kind = kind_from_string(j.at("kind").get<std::string>());
  s.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  s.frame_count = j.at("frame_count").get<int>();
  s.frame_dt = j.at("frame_dt").get<double>();
  s.world_scale = j.value("world_scale", 1.0);
  for (const auto& o : j.at("objects")) s.objects.push_back(object_from(o));
  for (auto it = j.at("properties").begin(); it != j.at("properties").end(); ++it)
    s.properties[it.key()] = props_from(it.value());
  if (j.contains("fluid_layout")) s.fluid = fluid_layout_from(j.at("fluid_layout"));
  if (j.contains("rope_system")) s.rope_system = rope_system_from(j.at("rope_system"));
  if (j.contains("cloth_layout")) s.cloth = cloth_layout_from(j.at("cloth_layout"));
  if (j.contains("ball_layout")) s.ball = ball_layout_from(j.at("ball_layout"));
  if (j.contains("camera"))
    for (auto it = j.at("camera").begin(); it != j.at("camera").end(); ++it)
      s.camera[it.key()] = it.value().get<double>();
  s.extra_json = collect_extra(j, kScenarioKeys);
  return s;
}

std::string annotation_to_json(const AnnotationRecord& a) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["scenario"] = json::parse(scenario_to_json(a.scenario));
  if (a.fluid) {
    const auto& f = *a.fluid;
    json paths = json::array();
    for (const auto& p : f.particle_paths) paths.push_back(p);
    j["fluid"] = json{{"container_counts", counts_json(f.container_counts)},
                      {"container_counts_extended", counts_json(f.container_counts_extended)},
                      {"stick_contacts", counts_json(f.stick_contacts)},
                      {"stick_contacts_extended", counts_json(f.stick_contacts_extended)},
                      {"particle_paths", paths},
                      {"group_counts", int_map_json(f.group_counts, [](int v) { return json(v); })}};
  }
  if (a.rope) {
    const auto& r = *a.rope;
    j["rope"] = json{{"groups", r.groups},
                     {"motion", int_map_json(r.motion, [](const std::string& v) { return json(v); })},
                     {"rotation", int_map_json(r.rotation, [](const std::string& v) { return json(v); })},
                     {"tension", int_map_json(r.tension, [](double v) { return json(v); })},
                     {"acceleration", int_map_json(r.acceleration, [](double v) { return json(v); })}};
  }
  if (a.cloth) {
    const auto& c = *a.cloth;
    json pairs = json::array();
    for (const auto& [x, y] : c.final_touch_pairs) pairs.push_back(json::array({x, y}));
    j["cloth"] = json{{"events", events_json(c.events)},
                      {"final_state", int_map_json(c.final_state, [](const std::string& v) { return json(v); })},
                      {"drift", int_map_json(c.drift, [](double v) { return json(v); })},
                      {"final_touch_pairs", pairs},
                      {"final_edge_tension_max", c.final_edge_tension_max},
                      {"final_edge_tension_mean", c.final_edge_tension_mean}};
  }
  if (a.ball) {
    const auto& b = *a.ball;
    j["ball"] = json{{"settled_pit", int_map_json(b.settled_pit, [](int v) { return json(v); })},
                     {"settled_pit_extended",
                      int_map_json(b.settled_pit_extended, [](int v) { return json(v); })},
                     {"first_collision_frame",
                      int_map_json(b.first_collision_frame, [](int v) { return json(v); })},
                     {"collisions", events_json(b.collisions)}};
  }
  merge_extra(j, a.extra_json);
  return j.dump(2);
}

namespace {

template <typename V>
std::map<int, V> int_map_from(const json& j) {
  std::map<int, V> m;
  for (auto it = j.begin(); it != j.end(); ++it) m[std::stoi(it.key())] = it.value().get<V>();
  return m;
}

}  // namespace

AnnotationRecord annotation_from_json(const std::string& text) {
  json j = parse_file_or_text(text);
  check_schema_version(j, "annotation");
  AnnotationRecord a;
  a.scenario = scenario_from_json(j.at("scenario").dump());
  if (j.contains("fluid")) {
    const json& f = j.at("fluid");
    FluidAnnotation fa;
    fa.container_counts = counts_from(f.at("container_counts"));
    fa.container_counts_extended = counts_from(f.at("container_counts_extended"));
    fa.stick_contacts = counts_from(f.at("stick_contacts"));
    fa.stick_contacts_extended = counts_from(f.at("stick_contacts_extended"));
    for (const auto& p : f.at("particle_paths"))
      fa.particle_paths.push_back(p.get<std::vector<int>>());
    fa.group_counts = int_map_from<int>(f.at("group_counts"));
    a.fluid = std::move(fa);
  }
  if (j.contains("rope")) {
    const json& r = j.at("rope");
    RopeAnnotation ra;
    ra.groups = r.at("groups").get<std::vector<std::vector<int>>>();
    ra.motion = int_map_from<std::string>(r.at("motion"));
    ra.rotation = int_map_from<std::string>(r.at("rotation"));
    ra.tension = int_map_from<double>(r.at("tension"));
    ra.acceleration = int_map_from<double>(r.at("acceleration"));
    a.rope = std::move(ra);
  }
  if (j.contains("cloth")) {
    const json& c = j.at("cloth");
    ClothAnnotation ca;
    ca.events = events_from(c.at("events"));
    ca.final_state = int_map_from<std::string>(c.at("final_state"));
    ca.drift = int_map_from<double>(c.at("drift"));
    for (const auto& p : c.at("final_touch_pairs"))
      ca.final_touch_pairs.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
    ca.final_edge_tension_max = c.at("final_edge_tension_max").get<double>();
    ca.final_edge_tension_mean = c.at("final_edge_tension_mean").get<double>();
    a.cloth = std::move(ca);
  }
  if (j.contains("ball")) {
    const json& b = j.at("ball");
    BallAnnotation ba;
    ba.settled_pit = int_map_from<int>(b.at("settled_pit"));
    ba.settled_pit_extended = int_map_from<int>(b.at("settled_pit_extended"));
    ba.first_collision_frame = int_map_from<int>(b.at("first_collision_frame"));
    ba.collisions = events_from(b.at("collisions"));
    a.ball = std::move(ba);
  }
  a.extra_json = collect_extra(j, kAnnotationKeys);
  return a;
}

void write_annotation(const std::string& path, const AnnotationRecord& a) {
  write_file(path, annotation_to_json(a));
}

AnnotationRecord read_annotation(const std::string& path) {
  return annotation_from_json(read_file(path));
}

void write_scenario(const std::string& path, const Scenario& s) {
  write_file(path, scenario_to_json(s));
}

Scenario read_scenario(const std::string& path) {
  return scenario_from_json(read_file(path));
}

}  // namespace physqa::scene
