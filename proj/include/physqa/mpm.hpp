#pragma once

#include <string>
#include <vector>

#include "physqa/common.hpp"
#include "physqa/scene.hpp"

namespace physqa::mpm {

// ---------------------------------------------------------------------------
// Configuration

struct MpmConfig {
  double grid_dx = 0.0008;
  double frame_dt = 1.0 / 60.0;
  double sim_dt = 1.0 / 3000.0;
  double gravity = -0.4;
  double xmin = -0.1, xmax = 0.1, ymin = 1.0, ymax = 1.2;
  double rigid_friction = 0.0;
  double particle_spacing = 0.0005;  // emission / seeding spacing

  int substeps_per_frame() const;

  static MpmConfig fluid_defaults();
  static MpmConfig ball_defaults();
};

struct MaterialParams {
  enum class Model { Fluid, Elastoplastic };
  Model model = Model::Fluid;
  double density = 1000.0;
  // fluid
  double bulk_modulus = 1e3;
  double viscosity = 0.01;
  // elastoplastic (von Mises on the deviatoric Hencky strain)
  double youngs_modulus = 0.1;
  double poisson_ratio = 0.1;
  double yield_stress = 3e-2;
};

struct Obstacle {
  enum class Type { Capsule, Box };
  Type type = Type::Capsule;
  int object_id = -1;
  // capsule: segment a-b with radius r; box: [a.x,b.x]x[a.y,b.y]
  Vec2 a, b;
  double radius = 0.001;

  double sdf(const Vec2& p, Vec2* normal = nullptr) const;
};

// ---------------------------------------------------------------------------
// State and trajectories

struct MpmState {
  std::vector<double> px, py, vx, vy;
  std::vector<double> c00, c01, c10, c11;  // APIC affine velocity field
  std::vector<double> f00, f01, f10, f11;  // deformation gradient (elastoplastic)
  std::vector<double> jp;                  // volume ratio (fluid)
  std::vector<int> group;

  std::size_t count() const { return px.size(); }
  void add_particle(Vec2 x, Vec2 v, int g);
};

struct TrajFrame {
  std::vector<double> px, py, vx, vy;
  std::vector<int> group;
  std::vector<double> state;  // per particle: 1 double (fluid J) or 4 (ball F)
};

struct ParticleTrajectory {
  double frame_dt = 1.0 / 60.0;
  int state_doubles = 1;
  std::vector<TrajFrame> frames;
};

struct EmitterRuntime {
  int group = 0;
  Vec2 position;
  Vec2 velocity;
  int start_frame = 0;
  int end_frame = 0;
  int period_frames = 5;
  int block_w = 10, block_h = 5;
};

// ---------------------------------------------------------------------------
// Simulator: owns the grid and one scene's particle state. Single threaded;
// run several simulators in parallel over immutable scenarios instead.

class Simulator {
public:
  Simulator(MpmConfig config, std::vector<MaterialParams> materials,
            std::vector<Obstacle> obstacles);

  // axis-aligned particle block at configured spacing
  void seed_block(Vec2 lo, Vec2 hi, Vec2 velocity, int group);
  void seed_disc(Vec2 center, double radius, Vec2 velocity, int group);
  void set_state(const MpmState& s) { state_ = s; }
  void load_frame(const TrajFrame& f);  // restart from a recorded frame (C is reset)

  const MpmState& state() const { return state_; }
  MpmState& state() { return state_; }
  const MpmConfig& config() const { return config_; }

  void substep();        // one sim_dt advance
  void advance_frame(int frame_index, const std::vector<EmitterRuntime>& emitters);

  TrajFrame record() const;
  int state_doubles() const;

private:
  void p2g();
  void grid_update();
  void g2p();
  void emit(const EmitterRuntime& e, int frame_index);

  MpmConfig config_;
  std::vector<MaterialParams> materials_;
  std::vector<Obstacle> obstacles_;
  MpmState state_;

  int nx_ = 0, ny_ = 0;
  double inv_dx_ = 0;
  std::vector<double> grid_mass_, grid_mx_, grid_my_;
  std::vector<int> grid_stamp_;
  std::vector<int> touched_;  // base cell index per particle
  int stamp_ = 0;

  // precomputed static boundary: 0 free, 1 obstacle (normal stored), 2 border
  std::vector<std::uint8_t> node_bc_;
  std::vector<double> node_nx_, node_ny_;
  double p_vol_ = 0;

  int emit_counter_ = 0;
};

// ---------------------------------------------------------------------------
// Scenario-level operations

struct RolloutOptions {
  int horizon_frames = -1;      // advances past frame 0; -1 = frame_count - 1
  bool stop_when_settled = false;  // ball scenes: stop once every ball rests
  MpmConfig const* config_override = nullptr;
};

ParticleTrajectory rollout(const scene::Scenario& s, const RolloutOptions& opts = {});

scene::FluidAnnotation detect_fluid_events(const ParticleTrajectory& t, const scene::Scenario& s);
scene::BallAnnotation detect_ball_events(const ParticleTrajectory& t, const scene::Scenario& s);
scene::AnnotationRecord detect_events(const ParticleTrajectory& t, const scene::Scenario& s);

// Deterministic farthest-point subsample. n must not exceed the set size.
std::vector<Vec2> resample(const std::vector<Vec2>& points, std::size_t n, std::uint64_t seed);

std::vector<Vec2> frame_points(const TrajFrame& f, int group = -1);

// helpers shared with the executor / inference
MpmConfig config_for(const scene::Scenario& s);
std::vector<MaterialParams> materials_for(const scene::Scenario& s);
std::vector<Obstacle> obstacles_for(const scene::Scenario& s);
std::vector<EmitterRuntime> emitters_for(const scene::Scenario& s);

// container interior test used by event detection and the executor
bool inside_container(const scene::ContainerSpec& c, double floor_y, const Vec2& p);

// ---------------------------------------------------------------------------
// Trajectory persistence: little-endian f64 frame blocks plus a JSON sidecar.

void write_trajectory(const std::string& bin_path, const std::string& header_path,
                      const ParticleTrajectory& t);
ParticleTrajectory read_trajectory(const std::string& bin_path, const std::string& header_path);

// debug rendering, excluded from determinism guarantees
void render_frame_svg(const std::string& path, const ParticleTrajectory& t, std::size_t frame,
                      const scene::Scenario& s);

}  // namespace physqa::mpm
