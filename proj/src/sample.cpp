#include <algorithm>
#include <cmath>

#include "physqa/scene.hpp"

namespace physqa::scene {

namespace {

// Draw `n` distinct colors, consuming from a shuffled deck so repeated calls
// on one deck never collide.
struct ColorDeck {
  std::vector<Color> deck;
  std::size_t next = 0;

  explicit ColorDeck(Rng& rng) : deck(all_colors()) { rng.shuffle(deck); }

  Color draw() {
    if (next >= deck.size()) fail(ErrorCode::Config, "color deck exhausted");
    return deck[next++];
  }
};

std::string add_props(Scenario& s, PhysicalProperties p) {
  std::string ref = "p" + std::to_string(s.properties.size());
  s.properties.emplace(ref, std::move(p));
  return ref;
}

int add_object(Scenario& s, Category cat, Color color, Pose pose, bool movable,
               std::string property_ref = {}) {
  SceneObject o;
  o.id = static_cast<int>(s.objects.size());
  o.category = cat;
  o.color = color;
  o.pose = pose;
  o.movable = movable;
  o.property_ref = std::move(property_ref);
  s.objects.push_back(o);
  return o.id;
}

// ---------------------------------------------------------------------------
// Fluid: emitters up top, slanted sticks mid-air, open containers on the
// floor. Two early fluids with distinct colors and densities; one late
// emitter re-uses an early color so "the other <color> emitter" questions
// have a referent.

void sample_fluid(Scenario& s, Rng& rng, const PropertyPools& pools) {
  FluidLayout fl;
  const double dx = 0.0008;
  fl.floor_y = 1.0 + 4 * dx;

  ColorDeck fluid_colors(rng);
  ColorDeck stick_colors(rng);
  ColorDeck container_colors(rng);

  // containers, three across the floor
  const double slots[3] = {-0.064, 0.0, 0.064};
  for (int i = 0; i < 3; ++i) {
    ContainerSpec c;
    c.x_center = slots[i] + rng.uniform(-0.004, 0.004);
    c.width = rng.uniform(0.046, 0.056);
    c.wall_height = rng.uniform(0.030, 0.038);
    Color col = container_colors.draw();
    c.object_id = add_object(s, Category::Container, col, {c.x_center, fl.floor_y, 0, 0, 1}, false,
                             add_props(s, {.friction = 0.0}));
    fl.containers.push_back(c);
  }

  // sticks, rejection-sampled for spacing
  int n_sticks = rng.range(3, 4);
  for (int i = 0; i < n_sticks; ++i) {
    for (int attempt = 0; attempt < 40; ++attempt) {
      Vec2 mid{rng.uniform(-0.07, 0.07), rng.uniform(1.065, 1.150)};
      double half = rng.uniform(0.020, 0.034);
      double angle = rng.uniform(0.25, 0.65) * (rng.chance(0.5) ? 1 : -1);
      Vec2 dir{std::cos(angle), std::sin(angle)};
      bool ok = true;
      for (const auto& other : fl.sticks) {
        Vec2 omid = (other.a + other.b) * 0.5;
        if ((omid - mid).norm() < 0.042) { ok = false; break; }
      }
      if (!ok) continue;
      StickSpec st;
      st.a = mid - dir * half;
      st.b = mid + dir * half;
      Color col = stick_colors.draw();
      st.object_id = add_object(s, Category::Stick, col, {mid.x, mid.y, 0, angle, 1}, false,
                                add_props(s, {.friction = 0.0}));
      fl.sticks.push_back(st);
      break;
    }
  }

  // two early fluids with distinct density levels, one late duplicate color
  std::vector<double> density_levels = pools.density;
  rng.shuffle(density_levels);
  Color early_colors[2] = {fluid_colors.draw(), fluid_colors.draw()};
  double early_density[2] = {density_levels[0], density_levels[1 % density_levels.size()]};
  int late_sibling = rng.range(0, 1);

  double emitter_x[3];
  // keep emitters separated: shuffled thirds of the emitter band
  std::vector<double> bands{-0.06, 0.0, 0.06};
  rng.shuffle(bands);
  for (int i = 0; i < 3; ++i) emitter_x[i] = bands[i] + rng.uniform(-0.012, 0.012);

  for (int i = 0; i < 3; ++i) {
    bool late = (i == 2);
    Color col = late ? early_colors[late_sibling] : early_colors[i];
    double density = late ? early_density[late_sibling] : early_density[i];
    double visc = rng.pick(pools.viscosity);

    PhysicalProperties fp;
    fp.density = density;
    fp.viscosity = visc;
    fp.bulk_modulus = 1e3;
    fp.surface_tension = 0.0;
    std::string ref = add_props(s, fp);

    Vec2 pos{emitter_x[i], 1.182};
    int emitter_id = add_object(s, Category::Emitter, col, {pos.x, pos.y, 0, 0, 1}, false);
    int fluid_id = add_object(s, Category::Fluid, col, {pos.x, pos.y, 0, 0, 1}, true, ref);

    EmitterSpec e;
    e.object_id = emitter_id;
    e.group = i;
    e.position = pos;
    e.velocity = {rng.uniform(-0.01, 0.01), -0.05};
    if (late) {
      e.start_frame = 232;
      e.end_frame = 320;
    } else {
      e.start_frame = i * 8;
      e.end_frame = e.start_frame + 85;
    }
    e.period_frames = 5;
    fl.emitters.push_back(e);

    FluidSpec f;
    f.object_id = fluid_id;
    f.group = i;
    fl.fluids.push_back(f);
  }

  s.fluid = std::move(fl);
  s.world_scale = 0.1;  // 2 m apparatus rescaled to the 0.2 sim square
}

// ---------------------------------------------------------------------------
// Ball: a floor slab with two pit gaps, floating walls mid-air, two
// plastoelastic balls launched from the top.

void sample_ball(Scenario& s, Rng& rng, const PropertyPools& pools) {
  BallLayout bl;
  bl.floor_y = 1.020;
  bl.floor_thickness = 0.014;

  ColorDeck colors(rng);

  // pits: one gap in each half
  double lw = rng.uniform(0.026, 0.036);
  double lc = rng.uniform(-0.062, -0.028);
  double rw = rng.uniform(0.026, 0.036);
  double rc = rng.uniform(0.028, 0.062);
  for (int i = 0; i < 2; ++i) {
    PitSpec p;
    p.x0 = (i == 0 ? lc - lw / 2 : rc - rw / 2);
    p.x1 = (i == 0 ? lc + lw / 2 : rc + rw / 2);
    p.object_id = add_object(s, Category::Pit, colors.draw(),
                             {(p.x0 + p.x1) / 2, bl.floor_y, 0, 0, 1}, false);
    s.objects.back().position_slot = (i == 0 ? PositionSlot::Left : PositionSlot::Right);
    bl.pits.push_back(p);
  }

  // floating walls
  int n_walls = rng.range(2, 3);
  for (int i = 0; i < n_walls; ++i) {
    for (int attempt = 0; attempt < 40; ++attempt) {
      Vec2 mid{rng.uniform(-0.06, 0.06), rng.uniform(1.055, 1.125)};
      double half = rng.uniform(0.016, 0.028);
      double angle = rng.uniform(0.2, 0.6) * (rng.chance(0.5) ? 1 : -1);
      Vec2 dir{std::cos(angle), std::sin(angle)};
      bool ok = true;
      for (const auto& other : bl.walls) {
        Vec2 omid = (other.a + other.b) * 0.5;
        if ((omid - mid).norm() < 0.04) { ok = false; break; }
      }
      if (!ok) continue;
      WallSpec w;
      w.a = mid - dir * half;
      w.b = mid + dir * half;
      w.object_id = add_object(s, Category::FloatingWall, colors.draw(),
                               {mid.x, mid.y, 0, angle, 1}, false, add_props(s, {.friction = 0.0}));
      bl.walls.push_back(w);
      break;
    }
  }

  // two balls with distinct elasticity and yield levels
  std::vector<double> e_levels = pools.youngs_modulus;
  std::vector<double> y_levels = pools.yield_stress;
  rng.shuffle(e_levels);
  rng.shuffle(y_levels);

  for (int i = 0; i < 2; ++i) {
    PhysicalProperties bp;
    bp.density = 0.2;  // sets E/rho so impact strains straddle the yield pool
    bp.youngs_modulus = e_levels[i % e_levels.size()];
    bp.poisson_ratio = rng.pick(pools.poisson_ratio);
    bp.yield_stress = y_levels[i % y_levels.size()];
    std::string ref = add_props(s, bp);

    BallSpec b;
    b.group = i;
    b.radius = rng.uniform(0.0038, 0.0046);
    b.center = {(i == 0 ? rng.uniform(-0.07, -0.015) : rng.uniform(0.015, 0.07)),
                rng.uniform(1.135, 1.168)};
    b.velocity = {rng.uniform(0.02, 0.10) * (b.center.x < 0 ? 1 : -1), rng.uniform(-0.05, 0.0)};
    b.object_id = add_object(s, Category::Ball, colors.draw(),
                             {b.center.x, b.center.y, 0, 0, 1}, true, ref);
    bl.balls.push_back(b);
  }

  s.ball = std::move(bl);
  s.world_scale = 0.1;
}

// ---------------------------------------------------------------------------
// Rope: pre-set archetype groups placed side by side on the wall. Heights
// orient the rope segments; the statics solver does the rest.

struct RopeBuild {
  Scenario& s;
  rope::RopeSystem& sys;
  Rng& rng;
  // uniqueness is per (category, color), so each category gets its own deck
  ColorDeck load_colors, pulley_colors, rope_colors, anchor_colors;
  const PropertyPools& pools;
  double x = 0;  // current group's horizontal slot

  RopeBuild(Scenario& s_, rope::RopeSystem& sys_, Rng& rng_, const PropertyPools& pools_)
      : s(s_), sys(sys_), rng(rng_), load_colors(rng_), pulley_colors(rng_),
        rope_colors(rng_), anchor_colors(rng_), pools(pools_) {}

  int anchor(double dx, double y) {
    int id = add_object(s, Category::FixedPoint, anchor_colors.draw(), {x + dx, y, 0, 0, 1}, false);
    sys.bodies.push_back({id, rope::BodyKind::Anchor, 0.0, false, y});
    return id;
  }

  int load(double dx, double y, bool force_movable = false) {
    double m = rng.pick(pools.mass);
    bool movable = force_movable || rng.chance(0.85);
    Category cat = rng.chance(0.5) ? Category::Cube : Category::Sphere;
    int id = add_object(s, cat, load_colors.draw(), {x + dx, y, 0, 0, 1}, movable,
                        add_props(s, {.mass = m}));
    sys.bodies.push_back({id, rope::BodyKind::Load, m, movable, y});
    return id;
  }

  int pulley(double dx, double y, bool movable) {
    int id = add_object(s, Category::Pulley, pulley_colors.draw(), {x + dx, y, 0, 0, 1}, movable);
    s.objects.back().shape_modifier =
        rng.chance(0.5) ? ShapeModifier::Solid : ShapeModifier::Hollow;
    sys.bodies.push_back({id, rope::BodyKind::Pulley, 0.0, movable, y});
    return id;
  }

  int rope_obj(std::vector<rope::Visit> path) {
    int id = add_object(s, Category::Rope, rope_colors.draw(), {x, 1.4, 0, 0, 1}, true);
    sys.ropes.push_back({id, std::move(path)});
    return id;
  }

  static rope::Visit end(int body) { return {rope::Visit::Type::End, body, +1}; }
  static rope::Visit rim(int body, int winding = +1) {
    return {rope::Visit::Type::Rim, body, winding};
  }
};

void sample_rope(Scenario& s, Rng& rng, const PropertyPools& pools) {
  rope::RopeSystem sys;
  sys.gravity = 9.81;
  RopeBuild b(s, sys, rng, pools);

  int n_groups = rng.chance(0.55) ? 2 : 1;
  for (int gi = 0; gi < n_groups; ++gi) {
    b.x = -0.6 + 1.2 * gi;
    int arch = rng.range(0, 4);
    switch (arch) {
      case 0: {  // hanging load
        int a = b.anchor(0.0, 1.85);
        int l = b.load(0.0, 1.25);
        b.rope_obj({RopeBuild::end(a), RopeBuild::end(l)});
        break;
      }
      case 1: {  // atwood
        int p = b.pulley(0.0, 1.7, false);
        int l1 = b.load(-0.18, 1.05, true);
        int l2 = b.load(0.18, 1.0, true);
        b.rope_obj({RopeBuild::end(l1), RopeBuild::rim(p), RopeBuild::end(l2)});
        break;
      }
      case 2: {  // anchored redirect
        int a = b.anchor(-0.25, 1.05);
        int p = b.pulley(0.0, 1.75, false);
        int l = b.load(0.2, 1.1);
        b.rope_obj({RopeBuild::end(a), RopeBuild::rim(p), RopeBuild::end(l)});
        break;
      }
      case 3: {  // movable pulley carrying a load, both rope ends anchored
        int a1 = b.anchor(-0.16, 1.85);
        int a2 = b.anchor(0.16, 1.85);
        int q = b.pulley(0.0, 1.35, true);
        int l = b.load(0.0, 0.9, true);
        b.rope_obj({RopeBuild::end(a1), RopeBuild::rim(q), RopeBuild::end(a2)});
        b.rope_obj({RopeBuild::end(q), RopeBuild::end(l)});
        break;
      }
      case 4: {  // compound: anchored line under a movable pulley, over a fixed one
        int a = b.anchor(-0.3, 1.85);
        int q = b.pulley(-0.15, 1.3, true);
        int p = b.pulley(0.1, 1.75, false);
        int la = b.load(0.25, 1.0, true);
        int lb = b.load(-0.15, 0.85, true);
        b.rope_obj({RopeBuild::end(a), RopeBuild::rim(q), RopeBuild::rim(p), RopeBuild::end(la)});
        b.rope_obj({RopeBuild::end(q), RopeBuild::end(lb)});
        break;
      }
    }
  }

  s.rope_system = std::move(sys);
  s.world_scale = 1.0;
}

// ---------------------------------------------------------------------------
// Cloth: two cloths over a tabletop of pillars and plates.

void sample_cloth(Scenario& s, Rng& rng, const PropertyPools& pools) {
  ClothLayout cl;
  ColorDeck colors(rng);

  for (int i = 0; i < 2; ++i) {
    // resample until the two cloths differ in stretch or bend level
    PhysicalProperties cp;
    for (int attempt = 0; attempt < 20; ++attempt) {
      cp.stretching_compliance = rng.pick(pools.stretching_compliance);
      cp.bending_compliance = rng.pick(pools.bending_compliance);
      cp.friction = rng.pick(pools.cloth_friction);
      if (i == 0) break;
      const auto& other = s.properties.at(s.object(cl.cloths[0].object_id).property_ref);
      if (cp.stretching_compliance != other.stretching_compliance ||
          cp.bending_compliance != other.bending_compliance)
        break;
    }
    ClothSpec c;
    c.resolution = 24;
    c.size = 0.42;
    c.z_center = (i == 0 ? -0.28 : 0.28);
    c.object_id = add_object(s, Category::Cloth, colors.draw(),
                             {-0.26, 0.0, c.z_center, 0, 1}, true, add_props(s, cp));
    s.objects.back().position_slot = (i == 0 ? PositionSlot::Left : PositionSlot::Right);
    cl.cloths.push_back(c);
  }

  int n_objects = rng.range(3, 4);
  for (int i = 0; i < n_objects; ++i) {
    for (int attempt = 0; attempt < 40; ++attempt) {
      bool pillar = rng.chance(0.5);
      TabletopSpec t;
      t.base_halfwidth = pillar ? rng.uniform(0.020, 0.034) : rng.uniform(0.05, 0.085);
      t.height = pillar ? rng.uniform(0.12, 0.20) : rng.uniform(0.022, 0.038);
      double x = rng.uniform(0.06, 0.42);
      double z = (i % 2 == 0 ? -1 : 1) * rng.uniform(0.18, 0.36);
      bool ok = true;
      for (std::size_t j = 0; j < cl.objects.size(); ++j) {
        const auto& o = cl.objects[j];
        const Pose& po = s.object(o.object_id).pose;
        double min_gap = t.base_halfwidth + o.base_halfwidth + 0.015;
        if (std::abs(po.x - x) < min_gap && std::abs(po.z - z) < min_gap) { ok = false; break; }
      }
      if (!ok) continue;
      double m = rng.pick(pools.rigid_mass);
      t.object_id = add_object(s, pillar ? Category::Pillar : Category::Plate, colors.draw(),
                               {x, 0.0, z, 0, 1}, false,
                               add_props(s, {.mass = m, .friction = 0.45}));
      cl.objects.push_back(t);
      break;
    }
  }

  cl.grip.start_frame = 15;
  cl.grip.end_frame = 145;
  cl.grip.start_x = -0.05;
  cl.grip.end_x = rng.uniform(0.68, 0.80);
  cl.grip.peak_y = rng.uniform(0.28, 0.35);
  cl.grip.end_y = rng.uniform(0.10, 0.14);

  s.cloth = std::move(cl);
  s.world_scale = 1.0;
}

}  // namespace

Scenario sample_scenario(SceneKind kind, std::uint64_t seed, const PropertyPools& pools) {
  pools.validate(kind);

  Scenario s;
  s.kind = kind;
  s.rng_seed = seed;
  s.frame_count = frame_count_for(kind);
  s.frame_dt = 1.0 / 60.0;

  Rng rng(derive_seed(seed, "sample"));
  switch (kind) {
    case SceneKind::Fluid: sample_fluid(s, rng, pools); break;
    case SceneKind::Ball: sample_ball(s, rng, pools); break;
    case SceneKind::Rope: sample_rope(s, rng, pools); break;
    case SceneKind::Cloth: sample_cloth(s, rng, pools); break;
  }
  return s;
}

}  // namespace physqa::scene
