#include <set>

#include "doctest.h"
#include "physqa/rope.hpp"
#include "physqa/scene.hpp"

using namespace physqa;
using namespace physqa::scene;

TEST_CASE("color names round-trip the closed 13-value set") {
  auto colors = all_colors();
  CHECK(colors.size() == 13);
  std::set<std::string> names;
  for (Color c : colors) {
    CHECK(color_from_string(to_string(c)) == c);
    names.insert(to_string(c));
  }
  CHECK(names.size() == 13);
  CHECK(names.count("light blue") == 1);
  CHECK_THROWS_AS((void)color_from_string("mauve"), Error);
}

TEST_CASE("category legality per scenario kind") {
  CHECK(category_legal(SceneKind::Rope, Category::Pulley));
  CHECK(category_legal(SceneKind::Fluid, Category::Emitter));
  CHECK(category_legal(SceneKind::Cloth, Category::Plate));
  CHECK(category_legal(SceneKind::Ball, Category::FloatingWall));
  CHECK_FALSE(category_legal(SceneKind::Rope, Category::Fluid));
  CHECK_FALSE(category_legal(SceneKind::Ball, Category::Cloth));
}

TEST_CASE("svd2 reconstructs arbitrary matrices") {
  Rng rng(42);
  for (int i = 0; i < 200; ++i) {
    Mat2 f{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
    Mat2 u, v;
    Vec2 sig;
    svd2(f, u, sig, v);
    Mat2 r = u * Mat2{sig.x, 0, 0, sig.y} * v.transposed();
    CHECK(std::abs(r.m00 - f.m00) < 1e-12);
    CHECK(std::abs(r.m01 - f.m01) < 1e-12);
    CHECK(std::abs(r.m10 - f.m10) < 1e-12);
    CHECK(std::abs(r.m11 - f.m11) < 1e-12);
    CHECK(std::abs(u.det() - 1.0) < 1e-12);
    CHECK(std::abs(v.det() - 1.0) < 1e-12);
    CHECK(sig.x >= sig.y);
  }
}

TEST_CASE("sampled scenarios are valid and deterministic across all kinds") {
  for (SceneKind kind :
       {SceneKind::Fluid, SceneKind::Rope, SceneKind::Cloth, SceneKind::Ball}) {
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
      Scenario s = sample_scenario(kind, seed);
      auto violations = validate_scenario(s);
      for (const auto& v : violations) {
        CAPTURE(v.field);
        CAPTURE(v.message);
        CHECK(violations.empty());
        break;
      }
      CHECK(s.frame_count == frame_count_for(kind));
    }
    Scenario a = sample_scenario(kind, 7);
    Scenario b = sample_scenario(kind, 7);
    CHECK(scenario_to_json(a) == scenario_to_json(b));
    CHECK(a == b);
  }
}

TEST_CASE("rope scenarios always contain a rope, pulley and load family member") {
  int with_pulley = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    Scenario s = sample_scenario(SceneKind::Rope, seed);
    REQUIRE(s.rope_system.has_value());
    CHECK(!s.rope_system->ropes.empty());
    bool has_load = false;
    for (const auto& b : s.rope_system->bodies)
      if (b.kind == rope::BodyKind::Load) has_load = true;
    CHECK(has_load);
    for (const auto& o : s.objects)
      if (o.category == Category::Pulley) {
        ++with_pulley;
        break;
      }
  }
  // archetype 0 has no pulley; all others do
  CHECK(with_pulley > 50);
}

TEST_CASE("comparison-bearing pools keep ratio >= 2 between levels") {
  PropertyPools pools;
  for (const auto* pool : {&pools.density, &pools.youngs_modulus, &pools.yield_stress,
                           &pools.stretching_compliance, &pools.bending_compliance}) {
    for (std::size_t i = 0; i < pool->size(); ++i)
      for (std::size_t j = 0; j < pool->size(); ++j) {
        if (i == j) continue;
        double hi = std::max((*pool)[i], (*pool)[j]);
        double lo = std::min((*pool)[i], (*pool)[j]);
        CHECK(hi / lo >= 2.0);
      }
  }
}

TEST_CASE("empty pool is reported by name") {
  PropertyPools pools;
  pools.density.clear();
  CHECK_THROWS_WITH_AS((void)sample_scenario(SceneKind::Fluid, 1, pools),
                       "empty property pool: density", Error);
}

TEST_CASE("validate_annotation flags dangling ids and frame range") {
  Scenario s = sample_scenario(SceneKind::Ball, 3);
  AnnotationRecord a;
  a.scenario = s;
  BallAnnotation ba;
  ba.settled_pit[s.ball->balls[0].object_id] = -1;
  a.ball = ba;
  CHECK(validate_annotation(a).empty());

  SUBCASE("dangling reference") {
    a.ball->settled_pit[99] = -1;
    auto v = validate_annotation(a);
    REQUIRE(v.size() == 1);
    CHECK(v[0].object_id == 99);
  }
  SUBCASE("event frame at frame_count is out of range") {
    a.ball->collisions.push_back(
        {"ball_collision", s.frame_count, s.ball->balls[0].object_id, -1});
    auto v = validate_annotation(a);
    REQUIRE(v.size() == 1);
    CHECK(v[0].field == std::string("ball.collisions"));
  }
}

TEST_CASE("annotation JSON round-trip is the identity") {
  Rng rng(99);
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    SceneKind kind = static_cast<SceneKind>(seed % 4);
    AnnotationRecord a;
    a.scenario = sample_scenario(kind, seed);
    // synthetic per-kind payloads with draws from the generator
    if (kind == SceneKind::Fluid) {
      FluidAnnotation f;
      const auto& fl = *a.scenario.fluid;
      for (const auto& c : fl.containers)
        for (const auto& g : fl.fluids)
          f.container_counts[c.object_id][g.group] = rng.range(0, 500);
      f.container_counts_extended = f.container_counts;
      for (const auto& st : fl.sticks) f.stick_contacts[st.object_id][0] = rng.range(0, 99);
      f.stick_contacts_extended = f.stick_contacts;
      f.particle_paths = {{fl.sticks[0].object_id}, {}};
      f.group_counts[0] = 123;
      a.fluid = f;
    } else if (kind == SceneKind::Rope) {
      RopeAnnotation r;
      for (const auto& b : a.scenario.rope_system->bodies) {
        r.motion[b.object_id] = "static";
        r.acceleration[b.object_id] = rng.uniform(-1, 1);
      }
      for (const auto& rp : a.scenario.rope_system->ropes)
        r.tension[rp.object_id] = rng.uniform(0, 50);
      r.groups = rope::constraint_groups(*a.scenario.rope_system);
      a.rope = r;
    } else if (kind == SceneKind::Cloth) {
      ClothAnnotation c;
      const auto& cl = *a.scenario.cloth;
      c.events.push_back({"object_cloth_contact", 20, cl.objects[0].object_id,
                          cl.cloths[0].object_id});
      c.final_state[cl.objects[0].object_id] = "upright in place";
      c.drift[cl.objects[0].object_id] = 0.01;
      c.final_edge_tension_max = 2.5;
      a.cloth = c;
    } else {
      BallAnnotation b;
      const auto& bl = *a.scenario.ball;
      b.settled_pit[bl.balls[0].object_id] = bl.pits[0].object_id;
      b.settled_pit_extended = b.settled_pit;
      b.first_collision_frame[bl.balls[0].object_id] = 17;
      b.collisions.push_back({"ball_collision", 17, bl.balls[0].object_id, -1});
      a.ball = b;
    }

    std::string text = annotation_to_json(a);
    AnnotationRecord back = annotation_from_json(text);
    CHECK(back == a);
  }
}

TEST_CASE("unknown JSON fields are preserved opaquely") {
  AnnotationRecord a;
  a.scenario = sample_scenario(SceneKind::Rope, 5);
  std::string text = annotation_to_json(a);
  // splice a field this build does not know about
  REQUIRE(text.front() == '{');
  std::string patched = "{\n  \"future_field\": {\"x\": 1.5}," + text.substr(1);
  AnnotationRecord read = annotation_from_json(patched);
  CHECK(read.extra_json.find("future_field") != std::string::npos);
  std::string rewritten = annotation_to_json(read);
  CHECK(rewritten.find("future_field") != std::string::npos);
  CHECK(annotation_from_json(rewritten) == read);
}

TEST_CASE("truncated annotation reports a byte offset") {
  AnnotationRecord a;
  a.scenario = sample_scenario(SceneKind::Rope, 5);
  std::string text = annotation_to_json(a);
  std::string truncated = text.substr(0, text.size() / 2);
  try {
    (void)annotation_from_json(truncated);
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Parse);
    CHECK(std::string(e.what()).find("byte") != std::string::npos);
  }
}

TEST_CASE("schema version mismatch reports both versions") {
  AnnotationRecord a;
  a.scenario = sample_scenario(SceneKind::Rope, 5);
  std::string text = annotation_to_json(a);
  auto pos = text.find("\"schema_version\": 1");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, std::string("\"schema_version\": 1").size(), "\"schema_version\": 99");
  try {
    (void)annotation_from_json(text);
    FAIL("expected version error");
  } catch (const Error& e) {
    std::string msg = e.what();
    CHECK(msg.find("99") != std::string::npos);
    CHECK(msg.find("1") != std::string::npos);
  }
}
