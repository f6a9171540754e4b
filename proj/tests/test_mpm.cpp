#include <cmath>
#include <set>

#include "doctest.h"
#include "physqa/mpm.hpp"

using namespace physqa;
using namespace physqa::mpm;

namespace {

MpmConfig tall_fluid_config() {
  MpmConfig c = MpmConfig::fluid_defaults();
  c.xmin = -0.02;
  c.xmax = 0.02;
  c.ymin = 0.0;
  c.ymax = 2.0;
  return c;
}

MaterialParams water() {
  MaterialParams m;
  m.model = MaterialParams::Model::Fluid;
  m.density = 1000;
  m.viscosity = 0.01;
  m.bulk_modulus = 1e3;
  return m;
}

MaterialParams ball_material(double E, double nu, double sigma_y) {
  MaterialParams m;
  m.model = MaterialParams::Model::Elastoplastic;
  m.density = 0.2;
  m.youngs_modulus = E;
  m.poisson_ratio = nu;
  m.yield_stress = sigma_y;
  return m;
}

}  // namespace

TEST_CASE("free fall matches 1/2 g t^2 within 1e-3 over one second") {
  MpmConfig c = tall_fluid_config();
  Simulator sim(c, {water()}, {});
  sim.state().add_particle({0.0, 1.5}, {0.0, 0.0}, 0);
  int substeps = c.substeps_per_frame() * 60;  // one second
  for (int i = 0; i < substeps; ++i) sim.substep();
  double dy = sim.state().py[0] - 1.5;
  CHECK(std::abs(dy - (-0.2)) < 1e-3);
}

TEST_CASE("zero gravity leaves a still block unchanged to machine precision") {
  MpmConfig c = tall_fluid_config();
  c.gravity = 0.0;
  Simulator sim(c, {water()}, {});
  sim.seed_block({-0.01, 1.0}, {0.01, 1.02}, {0, 0}, 0);
  std::vector<double> px = sim.state().px, py = sim.state().py;
  for (int i = 0; i < 200; ++i) sim.substep();
  for (std::size_t i = 0; i < px.size(); ++i) {
    CHECK(sim.state().px[i] == px[i]);
    CHECK(sim.state().py[i] == py[i]);
    CHECK(sim.state().vx[i] == 0.0);
    CHECK(sim.state().vy[i] == 0.0);
  }
}

TEST_CASE("gravity-only momentum changes by m g dt per substep") {
  MpmConfig c = tall_fluid_config();
  Simulator sim(c, {water()}, {});
  sim.seed_block({-0.012, 1.4}, {0.012, 1.43}, {0.03, 0.0}, 0);
  double p_mass = c.particle_spacing * c.particle_spacing * 1000.0;
  double total_mass = p_mass * sim.state().count();

  auto momentum_y = [&]() {
    double m = 0;
    for (std::size_t i = 0; i < sim.state().count(); ++i) m += p_mass * sim.state().vy[i];
    return m;
  };

  for (int i = 0; i < 50; ++i) {
    double before = momentum_y();
    sim.substep();
    double after = momentum_y();
    double expected = total_mass * c.gravity * c.sim_dt;
    CHECK(std::abs((after - before) - expected) <= 1e-6 * std::abs(expected));
  }
}

TEST_CASE("elastic ball rebounds higher than a plastic ball") {
  MpmConfig c = MpmConfig::ball_defaults();
  c.xmin = -0.04;
  c.xmax = 0.04;
  c.ymin = 1.0;
  c.ymax = 1.12;

  auto apex_after_bounce = [&](double sigma_y) {
    Obstacle floor;
    floor.type = Obstacle::Type::Box;
    floor.a = {c.xmin, 1.004};
    floor.b = {c.xmax, 1.016};
    Simulator sim(c, {ball_material(0.1, 0.2, sigma_y)}, {floor});
    sim.seed_disc({0.0, 1.045}, 0.004, {0, 0}, 0);
    int steps = c.substeps_per_frame();
    double floor_top = 1.016;
    double apex = 0;
    double lowest = 1e9;
    for (int f = 0; f < 70; ++f) {
      for (int s = 0; s < steps; ++s) sim.substep();
      double cy = 0;
      for (std::size_t i = 0; i < sim.state().count(); ++i) cy += sim.state().py[i];
      cy /= sim.state().count();
      lowest = std::min(lowest, cy);
      // apex of any rebound: highest centroid after first touching down
      if (lowest < floor_top + 0.006) apex = std::max(apex, cy);
    }
    REQUIRE(lowest < floor_top + 0.006);  // it did reach the floor
    return apex - floor_top;
  };

  double elastic_apex = apex_after_bounce(1e6);
  double plastic_apex = apex_after_bounce(0.003);
  CAPTURE(elastic_apex);
  CAPTURE(plastic_apex);
  CHECK(elastic_apex > plastic_apex);
}

TEST_CASE("fluid rollout records exactly frame_count frames") {
  scene::Scenario s = scene::sample_scenario(scene::SceneKind::Fluid, 11);
  ParticleTrajectory t = rollout(s);
  CHECK(t.frames.size() == 250);
}

TEST_CASE("ball rollout records exactly frame_count frames") {
  scene::Scenario s = scene::sample_scenario(scene::SceneKind::Ball, 11);
  ParticleTrajectory t = rollout(s);
  CHECK(t.frames.size() == 120);
}

TEST_CASE("horizon 0 yields only the initial frame") {
  scene::Scenario s = scene::sample_scenario(scene::SceneKind::Ball, 2);
  RolloutOptions opts;
  opts.horizon_frames = 0;
  ParticleTrajectory t = rollout(s, opts);
  CHECK(t.frames.size() == 1);
}

TEST_CASE("particle count is conserved without emitters and positions stay in domain") {
  scene::Scenario s = scene::sample_scenario(scene::SceneKind::Ball, 4);
  RolloutOptions opts;
  opts.horizon_frames = 30;
  ParticleTrajectory t = rollout(s, opts);
  MpmConfig c = MpmConfig::ball_defaults();
  std::size_t n0 = t.frames.front().px.size();
  for (const auto& f : t.frames) {
    CHECK(f.px.size() == n0);
    for (std::size_t i = 0; i < f.px.size(); ++i) {
      CHECK(f.px[i] >= c.xmin);
      CHECK(f.px[i] <= c.xmax);
      CHECK(f.py[i] >= c.ymin);
      CHECK(f.py[i] <= c.ymax);
    }
  }
}

TEST_CASE("emitters only add particles, never remove") {
  scene::Scenario s = scene::sample_scenario(scene::SceneKind::Fluid, 5);
  RolloutOptions opts;
  opts.horizon_frames = 40;
  ParticleTrajectory t = rollout(s, opts);
  for (std::size_t i = 1; i < t.frames.size(); ++i)
    CHECK(t.frames[i].px.size() >= t.frames[i - 1].px.size());
  CHECK(t.frames.back().px.size() > 0);
}

TEST_CASE("CFL violation aborts with particle index and speed") {
  MpmConfig c = tall_fluid_config();
  Simulator sim(c, {water()}, {});
  sim.state().add_particle({0.0, 1.0}, {0.0, 5.0}, 0);  // 5 units/s >> dx/dt = 2.4
  try {
    sim.substep();
    FAIL("expected CFL abort");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Simulation);
    CHECK(std::string(e.what()).find("particle 0") != std::string::npos);
    CHECK(std::string(e.what()).find("speed") != std::string::npos);
  }
}

TEST_CASE("resample: identity, determinism, size and distinctness") {
  Rng rng(3);
  std::vector<Vec2> pts;
  for (int i = 0; i < 200; ++i) pts.push_back({rng.uniform(0, 1), rng.uniform(0, 1)});

  SUBCASE("n == count returns the same set") {
    auto out = resample(pts, pts.size(), 7);
    std::multiset<std::pair<double, double>> a, b;
    for (auto& p : pts) a.insert({p.x, p.y});
    for (auto& p : out) b.insert({p.x, p.y});
    CHECK(a == b);
  }
  SUBCASE("n = 30 yields 30 pairwise-distinct points") {
    auto out = resample(pts, 30, 7);
    CHECK(out.size() == 30);
    for (std::size_t i = 0; i < out.size(); ++i)
      for (std::size_t j = i + 1; j < out.size(); ++j)
        CHECK((out[i] - out[j]).norm() > 0);
  }
  SUBCASE("same seed, same subsample; n > count errors") {
    auto a = resample(pts, 100, 9);
    auto b = resample(pts, 100, 9);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].x == b[i].x);
      CHECK(a[i].y == b[i].y);
    }
    CHECK_THROWS_AS((void)resample(pts, 201, 1), Error);
  }
}

TEST_CASE("trajectory binary round-trip") {
  scene::Scenario s = scene::sample_scenario(scene::SceneKind::Ball, 8);
  RolloutOptions opts;
  opts.horizon_frames = 5;
  ParticleTrajectory t = rollout(s, opts);
  write_trajectory("/tmp/pq_test_traj.bin", "/tmp/pq_test_traj.json", t);
  ParticleTrajectory r = read_trajectory("/tmp/pq_test_traj.bin", "/tmp/pq_test_traj.json");
  REQUIRE(r.frames.size() == t.frames.size());
  CHECK(r.state_doubles == t.state_doubles);
  for (std::size_t f = 0; f < t.frames.size(); ++f) {
    REQUIRE(r.frames[f].px.size() == t.frames[f].px.size());
    for (std::size_t i = 0; i < t.frames[f].px.size(); ++i) {
      CHECK(r.frames[f].px[i] == t.frames[f].px[i]);
      CHECK(r.frames[f].vy[i] == t.frames[f].vy[i]);
      CHECK(r.frames[f].group[i] == t.frames[f].group[i]);
    }
    CHECK(r.frames[f].state == t.frames[f].state);
  }
}

TEST_CASE("rollout determinism: identical scenario gives identical bytes") {
  scene::Scenario s = scene::sample_scenario(scene::SceneKind::Fluid, 21);
  RolloutOptions opts;
  opts.horizon_frames = 12;
  ParticleTrajectory a = rollout(s, opts);
  ParticleTrajectory b = rollout(s, opts);
  REQUIRE(a.frames.size() == b.frames.size());
  for (std::size_t f = 0; f < a.frames.size(); ++f) {
    CHECK(a.frames[f].px == b.frames[f].px);
    CHECK(a.frames[f].vy == b.frames[f].vy);
  }
}
