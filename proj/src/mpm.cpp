#include "physqa/mpm.hpp"

#include <algorithm>
#include <cmath>

namespace physqa::mpm {

int MpmConfig::substeps_per_frame() const {
  double ratio = frame_dt / sim_dt;
  int n = static_cast<int>(std::lround(ratio));
  if (n < 1 || std::abs(ratio - n) > 1e-6 * ratio)
    fail(ErrorCode::Config, "sim_dt must divide frame_dt to within one substep");
  return n;
}

MpmConfig MpmConfig::fluid_defaults() {
  MpmConfig c;
  c.grid_dx = 0.0008;
  c.sim_dt = 1.0 / 3000.0;
  c.particle_spacing = 0.0005;
  return c;
}

MpmConfig MpmConfig::ball_defaults() {
  MpmConfig c;
  c.grid_dx = 0.0016;
  c.sim_dt = 1.0 / 6000.0 / 32.0;
  c.particle_spacing = 0.0008;
  return c;
}

double Obstacle::sdf(const Vec2& p, Vec2* normal) const {
  if (type == Type::Capsule) {
    Vec2 ab = b - a;
    double t = ab.norm2() > 0 ? std::clamp((p - a).dot(ab) / ab.norm2(), 0.0, 1.0) : 0.0;
    Vec2 closest = a + ab * t;
    Vec2 d = p - closest;
    double dist = d.norm();
    if (normal) *normal = dist > 1e-12 ? d / dist : Vec2{0, 1};
    return dist - radius;
  }
  // box: a = min corner, b = max corner
  Vec2 c{(a.x + b.x) * 0.5, (a.y + b.y) * 0.5};
  Vec2 h{(b.x - a.x) * 0.5, (b.y - a.y) * 0.5};
  Vec2 q{std::abs(p.x - c.x) - h.x, std::abs(p.y - c.y) - h.y};
  double outside = Vec2{std::max(q.x, 0.0), std::max(q.y, 0.0)}.norm();
  double inside = std::min(std::max(q.x, q.y), 0.0);
  if (normal) {
    if (q.x > q.y)
      *normal = {p.x > c.x ? 1.0 : -1.0, 0.0};
    else
      *normal = {0.0, p.y > c.y ? 1.0 : -1.0};
  }
  return outside + inside;
}

void MpmState::add_particle(Vec2 x, Vec2 v, int g) {
  px.push_back(x.x);
  py.push_back(x.y);
  vx.push_back(v.x);
  vy.push_back(v.y);
  c00.push_back(0);
  c01.push_back(0);
  c10.push_back(0);
  c11.push_back(0);
  f00.push_back(1);
  f01.push_back(0);
  f10.push_back(0);
  f11.push_back(1);
  jp.push_back(1);
  group.push_back(g);
}

// ---------------------------------------------------------------------------

Simulator::Simulator(MpmConfig config, std::vector<MaterialParams> materials,
                     std::vector<Obstacle> obstacles)
    : config_(config), materials_(std::move(materials)), obstacles_(std::move(obstacles)) {
  inv_dx_ = 1.0 / config_.grid_dx;
  nx_ = static_cast<int>(std::lround((config_.xmax - config_.xmin) * inv_dx_)) + 1;
  ny_ = static_cast<int>(std::lround((config_.ymax - config_.ymin) * inv_dx_)) + 1;
  std::size_t n = static_cast<std::size_t>(nx_) * ny_;
  grid_mass_.assign(n, 0.0);
  grid_mx_.assign(n, 0.0);
  grid_my_.assign(n, 0.0);
  grid_stamp_.assign(n, -1);
  p_vol_ = config_.particle_spacing * config_.particle_spacing;

  // static obstacles: precompute per-node contact normals once
  node_bc_.assign(n, 0);
  node_nx_.assign(n, 0.0);
  node_ny_.assign(n, 0.0);
  double margin = 0.5 * config_.grid_dx;
  for (const auto& ob : obstacles_) {
    Vec2 lo{std::min(ob.a.x, ob.b.x) - ob.radius - 2 * config_.grid_dx,
            std::min(ob.a.y, ob.b.y) - ob.radius - 2 * config_.grid_dx};
    Vec2 hi{std::max(ob.a.x, ob.b.x) + ob.radius + 2 * config_.grid_dx,
            std::max(ob.a.y, ob.b.y) + ob.radius + 2 * config_.grid_dx};
    int i0 = std::max(0, static_cast<int>((lo.x - config_.xmin) * inv_dx_));
    int i1 = std::min(nx_ - 1, static_cast<int>((hi.x - config_.xmin) * inv_dx_) + 1);
    int j0 = std::max(0, static_cast<int>((lo.y - config_.ymin) * inv_dx_));
    int j1 = std::min(ny_ - 1, static_cast<int>((hi.y - config_.ymin) * inv_dx_) + 1);
    for (int i = i0; i <= i1; ++i)
      for (int j = j0; j <= j1; ++j) {
        Vec2 pos{config_.xmin + i * config_.grid_dx, config_.ymin + j * config_.grid_dx};
        Vec2 nrm;
        double phi = ob.sdf(pos, &nrm);
        if (phi < margin) {
          std::size_t idx = static_cast<std::size_t>(i) * ny_ + j;
          node_bc_[idx] = 1;
          node_nx_[idx] = nrm.x;
          node_ny_[idx] = nrm.y;
        }
      }
  }
}

void Simulator::seed_block(Vec2 lo, Vec2 hi, Vec2 velocity, int group) {
  double sp = config_.particle_spacing;
  for (double x = lo.x + sp * 0.5; x < hi.x; x += sp)
    for (double y = lo.y + sp * 0.5; y < hi.y; y += sp)
      state_.add_particle({x, y}, velocity, group);
}

void Simulator::seed_disc(Vec2 center, double radius, Vec2 velocity, int group) {
  double sp = config_.particle_spacing;
  for (double x = center.x - radius; x <= center.x + radius; x += sp)
    for (double y = center.y - radius; y <= center.y + radius; y += sp) {
      double dx = x - center.x, dy = y - center.y;
      if (dx * dx + dy * dy <= radius * radius) state_.add_particle({x, y}, velocity, group);
    }
}

void Simulator::load_frame(const TrajFrame& f) {
  state_ = MpmState{};
  int sd = state_doubles();
  for (std::size_t i = 0; i < f.px.size(); ++i) {
    state_.add_particle({f.px[i], f.py[i]}, {f.vx[i], f.vy[i]}, f.group[i]);
    if (sd == 1) {
      state_.jp.back() = f.state[i];
    } else {
      state_.f00.back() = f.state[4 * i + 0];
      state_.f01.back() = f.state[4 * i + 1];
      state_.f10.back() = f.state[4 * i + 2];
      state_.f11.back() = f.state[4 * i + 3];
    }
  }
}

int Simulator::state_doubles() const {
  for (const auto& m : materials_)
    if (m.model == MaterialParams::Model::Elastoplastic) return 4;
  return 1;
}

void Simulator::p2g() {
  const double dx = config_.grid_dx;
  const double dt = config_.sim_dt;
  const std::size_t n = state_.count();
  touched_.clear();

  for (std::size_t p = 0; p < n; ++p) {
    const MaterialParams& mat = materials_[state_.group[p]];
    const double p_mass = p_vol_ * mat.density;

    double xp = (state_.px[p] - config_.xmin) * inv_dx_;
    double yp = (state_.py[p] - config_.ymin) * inv_dx_;
    int bi = static_cast<int>(xp - 0.5);
    int bj = static_cast<int>(yp - 0.5);
    double fx = xp - bi, fy = yp - bj;
    // quadratic B-spline weights over the 3x3 neighbourhood
    double wx[3] = {0.5 * (1.5 - fx) * (1.5 - fx), 0.75 - (fx - 1.0) * (fx - 1.0),
                    0.5 * (fx - 0.5) * (fx - 0.5)};
    double wy[3] = {0.5 * (1.5 - fy) * (1.5 - fy), 0.75 - (fy - 1.0) * (fy - 1.0),
                    0.5 * (fy - 0.5) * (fy - 0.5)};

    double c00 = state_.c00[p], c01 = state_.c01[p], c10 = state_.c10[p], c11 = state_.c11[p];

    // Cauchy stress, scaled into the MLS-MPM momentum contribution
    double s00, s01, s10, s11;
    if (mat.model == MaterialParams::Model::Fluid) {
      // weakly compressible pressure kappa*(J-1) plus Newtonian viscosity on
      // the velocity gradient (C approximates grad v)
      double pressure = mat.bulk_modulus * (state_.jp[p] - 1.0);
      s00 = pressure + mat.viscosity * (c00 + c00);
      s11 = pressure + mat.viscosity * (c11 + c11);
      s01 = mat.viscosity * (c01 + c10);
      s10 = s01;
      // splash stability cap: a near-isolated compressed particle otherwise
      // kicks itself past the CFL bound; hydrostatic stresses here sit two
      // orders of magnitude below the cap
      double cap = 0.2 * mat.density;
      double norm = std::sqrt(s00 * s00 + 2 * s01 * s01 + s11 * s11);
      if (norm > cap) {
        double k = cap / norm;
        s00 *= k;
        s01 *= k;
        s10 *= k;
        s11 *= k;
      }
    } else {
      // fixed corotated: P(F) F^T = 2 mu (F - R) F^T + lambda J (J - 1) I
      double mu = mat.youngs_modulus / (2.0 * (1.0 + mat.poisson_ratio));
      double la = mat.youngs_modulus * mat.poisson_ratio /
                  ((1.0 + mat.poisson_ratio) * (1.0 - 2.0 * mat.poisson_ratio));
      Mat2 F{state_.f00[p], state_.f01[p], state_.f10[p], state_.f11[p]};
      Mat2 U, V;
      Vec2 sig;
      svd2(F, U, sig, V);
      Mat2 R = U * V.transposed();
      double J = F.det();
      Mat2 PFt = (F - R) * F.transposed() * (2.0 * mu);
      double vol_term = la * J * (J - 1.0);
      s00 = PFt.m00 + vol_term;
      s01 = PFt.m01;
      s10 = PFt.m10;
      s11 = PFt.m11 + vol_term;
    }
    double stress_scale = -dt * p_vol_ * 4.0 * inv_dx_ * inv_dx_;
    double a00 = stress_scale * s00 + p_mass * c00;
    double a01 = stress_scale * s01 + p_mass * c01;
    double a10 = stress_scale * s10 + p_mass * c10;
    double a11 = stress_scale * s11 + p_mass * c11;

    double mvx = p_mass * state_.vx[p];
    double mvy = p_mass * state_.vy[p];

    touched_.push_back(bi * ny_ + bj);
    for (int i = 0; i < 3; ++i) {
      double dposx = (bi + i - xp) * dx;
      for (int j = 0; j < 3; ++j) {
        double dposy = (bj + j - yp) * dx;
        double w = wx[i] * wy[j];
        std::size_t idx = static_cast<std::size_t>(bi + i) * ny_ + (bj + j);
        grid_mass_[idx] += w * p_mass;
        grid_mx_[idx] += w * (mvx + a00 * dposx + a01 * dposy);
        grid_my_[idx] += w * (mvy + a10 * dposx + a11 * dposy);
      }
    }
  }
}

void Simulator::grid_update() {
  const double dt = config_.sim_dt;
  const double mu_f = config_.rigid_friction;
  ++stamp_;
  for (int base : touched_) {
    int bi = base / ny_, bj = base % ny_;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        std::size_t idx = static_cast<std::size_t>(bi + i) * ny_ + (bj + j);
        if (grid_stamp_[idx] == stamp_) continue;
        grid_stamp_[idx] = stamp_;
        double m = grid_mass_[idx];
        if (m <= 0) continue;
        double vx = grid_mx_[idx] / m;
        double vy = grid_my_[idx] / m + dt * config_.gravity;

        // obstacle contact: project out the inward normal component, then
        // Coulomb friction on the tangent
        if (node_bc_[idx] == 1) {
          double nx = node_nx_[idx], ny = node_ny_[idx];
          double vn = vx * nx + vy * ny;
          if (vn < 0) {
            double tx = vx - vn * nx, ty = vy - vn * ny;
            if (mu_f > 0) {
              double tn = std::sqrt(tx * tx + ty * ty);
              if (tn > 1e-14) {
                double scale = std::max(0.0, 1.0 - mu_f * (-vn) / tn);
                tx *= scale;
                ty *= scale;
              }
            }
            vx = tx;
            vy = ty;
          }
        }

        // domain border: separate condition three cells deep
        int gi = bi + i, gj = bj + j;
        if (gi < 3 && vx < 0) vx = 0;
        if (gi > nx_ - 4 && vx > 0) vx = 0;
        if (gj < 3 && vy < 0) vy = 0;
        if (gj > ny_ - 4 && vy > 0) vy = 0;

        grid_mx_[idx] = vx;
        grid_my_[idx] = vy;
      }
  }
}

void Simulator::g2p() {
  const double dx = config_.grid_dx;
  const double dt = config_.sim_dt;
  const std::size_t n = state_.count();
  double max_v2 = 0;
  std::size_t max_p = 0;

  const double lo_x = config_.xmin + 3 * dx, hi_x = config_.xmax - 3 * dx;
  const double lo_y = config_.ymin + 3 * dx, hi_y = config_.ymax - 3 * dx;

  for (std::size_t p = 0; p < n; ++p) {
    double xp = (state_.px[p] - config_.xmin) * inv_dx_;
    double yp = (state_.py[p] - config_.ymin) * inv_dx_;
    int bi = static_cast<int>(xp - 0.5);
    int bj = static_cast<int>(yp - 0.5);
    double fx = xp - bi, fy = yp - bj;
    double wx[3] = {0.5 * (1.5 - fx) * (1.5 - fx), 0.75 - (fx - 1.0) * (fx - 1.0),
                    0.5 * (fx - 0.5) * (fx - 0.5)};
    double wy[3] = {0.5 * (1.5 - fy) * (1.5 - fy), 0.75 - (fy - 1.0) * (fy - 1.0),
                    0.5 * (fy - 0.5) * (fy - 0.5)};

    double vx = 0, vy = 0;
    double b00 = 0, b01 = 0, b10 = 0, b11 = 0;
    for (int i = 0; i < 3; ++i) {
      double dposx = (bi + i - xp) * dx;
      for (int j = 0; j < 3; ++j) {
        double dposy = (bj + j - yp) * dx;
        double w = wx[i] * wy[j];
        std::size_t idx = static_cast<std::size_t>(bi + i) * ny_ + (bj + j);
        double gvx = grid_mx_[idx], gvy = grid_my_[idx];
        vx += w * gvx;
        vy += w * gvy;
        b00 += w * gvx * dposx;
        b01 += w * gvx * dposy;
        b10 += w * gvy * dposx;
        b11 += w * gvy * dposy;
      }
    }
    double scale = 4.0 * inv_dx_ * inv_dx_;
    double c00 = b00 * scale, c01 = b01 * scale, c10 = b10 * scale, c11 = b11 * scale;

    state_.vx[p] = vx;
    state_.vy[p] = vy;
    state_.c00[p] = c00;
    state_.c01[p] = c01;
    state_.c10[p] = c10;
    state_.c11[p] = c11;
    state_.px[p] = std::clamp(state_.px[p] + dt * vx, lo_x, hi_x);
    state_.py[p] = std::clamp(state_.py[p] + dt * vy, lo_y, hi_y);

    double v2 = vx * vx + vy * vy;
    if (v2 > max_v2) {
      max_v2 = v2;
      max_p = p;
    }

    const MaterialParams& mat = materials_[state_.group[p]];
    if (mat.model == MaterialParams::Model::Fluid) {
      // clamped so splash-pinched stray particles cannot build runaway pressure
      state_.jp[p] = std::clamp(state_.jp[p] * (1.0 + dt * (c00 + c11)), 0.6, 1.6);
    } else {
      // F <- (I + dt C) F, then von Mises return mapping on the deviatoric
      // Hencky strain
      double f00 = state_.f00[p], f01 = state_.f01[p], f10 = state_.f10[p], f11 = state_.f11[p];
      double g00 = (1.0 + dt * c00) * f00 + dt * c01 * f10;
      double g01 = (1.0 + dt * c00) * f01 + dt * c01 * f11;
      double g10 = dt * c10 * f00 + (1.0 + dt * c11) * f10;
      double g11 = dt * c10 * f01 + (1.0 + dt * c11) * f11;

      Mat2 F{g00, g01, g10, g11};
      Mat2 U, V;
      Vec2 sig;
      svd2(F, U, sig, V);
      double s0 = std::max(sig.x, 1e-6), s1 = std::max(sig.y, 1e-6);
      double e0 = std::log(s0), e1 = std::log(s1);
      double mean = 0.5 * (e0 + e1);
      double h0 = e0 - mean, h1 = e1 - mean;
      double hnorm = std::sqrt(h0 * h0 + h1 * h1);
      double mu = mat.youngs_modulus / (2.0 * (1.0 + mat.poisson_ratio));
      double delta_gamma = hnorm - mat.yield_stress / (2.0 * mu);
      if (delta_gamma > 0 && hnorm > 1e-12) {
        double k = delta_gamma / hnorm;
        e0 -= k * h0;
        e1 -= k * h1;
        Mat2 S{std::exp(e0), 0, 0, std::exp(e1)};
        F = U * S * V.transposed();
      }
      state_.f00[p] = F.m00;
      state_.f01[p] = F.m01;
      state_.f10[p] = F.m10;
      state_.f11[p] = F.m11;
    }
  }

  if (n > 0 && std::sqrt(max_v2) * dt >= dx) {
    fail(ErrorCode::Simulation,
         "CFL violation: particle " + std::to_string(max_p) + " speed " +
             std::to_string(std::sqrt(max_v2)) + " exceeds dx/dt = " +
             std::to_string(dx / dt));
  }
}

void Simulator::substep() {
  // clear only the cells touched last substep
  for (int base : touched_) {
    int bi = base / ny_, bj = base % ny_;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        std::size_t idx = static_cast<std::size_t>(bi + i) * ny_ + (bj + j);
        grid_mass_[idx] = 0;
        grid_mx_[idx] = 0;
        grid_my_[idx] = 0;
      }
  }
  p2g();
  grid_update();
  g2p();
}

void Simulator::emit(const EmitterRuntime& e, int frame_index) {
  if (frame_index < e.start_frame || frame_index >= e.end_frame) return;
  if ((frame_index - e.start_frame) % e.period_frames != 0) return;
  double sp = config_.particle_spacing;
  double w = e.block_w * sp, h = e.block_h * sp;
  seed_block({e.position.x - w / 2, e.position.y - h / 2},
             {e.position.x + w / 2, e.position.y + h / 2}, e.velocity, e.group);
  ++emit_counter_;
}

void Simulator::advance_frame(int frame_index, const std::vector<EmitterRuntime>& emitters) {
  for (const auto& e : emitters) emit(e, frame_index);
  int steps = config_.substeps_per_frame();
  for (int s = 0; s < steps; ++s) substep();
}

TrajFrame Simulator::record() const {
  TrajFrame f;
  f.px = state_.px;
  f.py = state_.py;
  f.vx = state_.vx;
  f.vy = state_.vy;
  f.group = state_.group;
  if (state_doubles() == 1) {
    f.state = state_.jp;
  } else {
    f.state.resize(state_.count() * 4);
    for (std::size_t i = 0; i < state_.count(); ++i) {
      f.state[4 * i + 0] = state_.f00[i];
      f.state[4 * i + 1] = state_.f01[i];
      f.state[4 * i + 2] = state_.f10[i];
      f.state[4 * i + 3] = state_.f11[i];
    }
  }
  return f;
}

// ---------------------------------------------------------------------------
// Scenario wiring

MpmConfig config_for(const scene::Scenario& s) {
  switch (s.kind) {
    case scene::SceneKind::Fluid: return MpmConfig::fluid_defaults();
    case scene::SceneKind::Ball: return MpmConfig::ball_defaults();
    default: fail(ErrorCode::Config, "MPM rollout supports fluid and ball scenarios only");
  }
}

std::vector<MaterialParams> materials_for(const scene::Scenario& s) {
  std::vector<MaterialParams> mats;
  if (s.kind == scene::SceneKind::Fluid) {
    for (const auto& f : s.fluid->fluids) {
      const auto& p = s.props_of(f.object_id);
      MaterialParams m;
      m.model = MaterialParams::Model::Fluid;
      m.density = p.density.value_or(1000.0);
      m.viscosity = p.viscosity.value_or(0.01);
      m.bulk_modulus = p.bulk_modulus.value_or(1e3);
      if (static_cast<int>(mats.size()) != f.group)
        fail(ErrorCode::Config, "fluid groups must be contiguous from zero");
      mats.push_back(m);
    }
  } else if (s.kind == scene::SceneKind::Ball) {
    for (const auto& b : s.ball->balls) {
      const auto& p = s.props_of(b.object_id);
      MaterialParams m;
      m.model = MaterialParams::Model::Elastoplastic;
      m.density = p.density.value_or(0.2);
      m.youngs_modulus = p.youngs_modulus.value_or(0.1);
      m.poisson_ratio = p.poisson_ratio.value_or(0.1);
      m.yield_stress = p.yield_stress.value_or(3e-2);
      if (static_cast<int>(mats.size()) != b.group)
        fail(ErrorCode::Config, "ball groups must be contiguous from zero");
      mats.push_back(m);
    }
  }
  return mats;
}

std::vector<Obstacle> obstacles_for(const scene::Scenario& s) {
  std::vector<Obstacle> obs;
  if (s.kind == scene::SceneKind::Fluid) {
    const auto& fl = *s.fluid;
    for (const auto& st : fl.sticks)
      obs.push_back({Obstacle::Type::Capsule, st.object_id, st.a, st.b, 0.0012});
    for (const auto& c : fl.containers) {
      double xl = c.x_center - c.width / 2, xr = c.x_center + c.width / 2;
      double y0 = fl.floor_y, y1 = fl.floor_y + c.wall_height;
      double r = 0.001;
      obs.push_back({Obstacle::Type::Capsule, c.object_id, {xl, y0}, {xl, y1}, r});
      obs.push_back({Obstacle::Type::Capsule, c.object_id, {xr, y0}, {xr, y1}, r});
      obs.push_back({Obstacle::Type::Capsule, c.object_id, {xl, y0}, {xr, y0}, r});
    }
  } else if (s.kind == scene::SceneKind::Ball) {
    const auto& bl = *s.ball;
    for (const auto& w : bl.walls)
      obs.push_back({Obstacle::Type::Capsule, w.object_id, w.a, w.b, 0.0018});
    // floor slab segments between pit gaps
    MpmConfig c = MpmConfig::ball_defaults();
    std::vector<double> xs{c.xmin};
    std::vector<const scene::PitSpec*> pits;
    for (const auto& p : bl.pits) pits.push_back(&p);
    std::sort(pits.begin(), pits.end(),
              [](const auto* a, const auto* b) { return a->x0 < b->x0; });
    for (const auto* p : pits) {
      xs.push_back(p->x0);
      xs.push_back(p->x1);
    }
    xs.push_back(c.xmax);
    for (std::size_t i = 0; i + 1 < xs.size(); i += 2) {
      Obstacle ob;
      ob.type = Obstacle::Type::Box;
      ob.object_id = -1;
      ob.a = {xs[i], bl.floor_y - bl.floor_thickness};
      ob.b = {xs[i + 1], bl.floor_y};
      obs.push_back(ob);
    }
  }
  return obs;
}

std::vector<EmitterRuntime> emitters_for(const scene::Scenario& s) {
  std::vector<EmitterRuntime> out;
  if (s.kind != scene::SceneKind::Fluid) return out;
  for (const auto& e : s.fluid->emitters) {
    EmitterRuntime r;
    r.group = e.group;
    r.position = e.position;
    r.velocity = e.velocity;
    r.start_frame = e.start_frame;
    r.end_frame = e.end_frame;
    r.period_frames = e.period_frames;
    out.push_back(r);
  }
  return out;
}

namespace {

bool ball_settled(const Simulator& sim, const scene::Scenario& s);

}  // namespace

ParticleTrajectory rollout(const scene::Scenario& s, const RolloutOptions& opts) {
  MpmConfig config = opts.config_override ? *opts.config_override : config_for(s);
  Simulator sim(config, materials_for(s), obstacles_for(s));
  std::vector<EmitterRuntime> emitters = emitters_for(s);

  if (s.kind == scene::SceneKind::Ball) {
    for (const auto& b : s.ball->balls) sim.seed_disc(b.center, b.radius, b.velocity, b.group);
  }

  int horizon = opts.horizon_frames >= 0 ? opts.horizon_frames : s.frame_count - 1;

  ParticleTrajectory traj;
  traj.frame_dt = config.frame_dt;
  traj.state_doubles = sim.state_doubles();
  traj.frames.push_back(sim.record());

  int settled_streak = 0;
  for (int f = 0; f < horizon; ++f) {
    try {
      sim.advance_frame(f, emitters);
    } catch (const Error& e) {
      fail(ErrorCode::Simulation, "frame " + std::to_string(f + 1) + ": " + e.what());
    }
    traj.frames.push_back(sim.record());
    if (opts.stop_when_settled && s.kind == scene::SceneKind::Ball) {
      settled_streak = ball_settled(sim, s) ? settled_streak + 1 : 0;
      // keep a full dwell window after everything stops so settledness is
      // observable in the recorded tail
      if (settled_streak > 34) break;
    }
  }
  return traj;
}

namespace {

bool ball_settled(const Simulator& sim, const scene::Scenario& s) {
  // per-group mean speed, same statistic the rest detector uses
  const MpmState& st = sim.state();
  std::vector<double> speed(s.ball->balls.size(), 0.0);
  std::vector<int> n(s.ball->balls.size(), 0);
  for (std::size_t i = 0; i < st.count(); ++i) {
    speed[st.group[i]] += std::sqrt(st.vx[i] * st.vx[i] + st.vy[i] * st.vy[i]);
    n[st.group[i]]++;
  }
  for (std::size_t g = 0; g < speed.size(); ++g)
    if (n[g] > 0 && speed[g] / n[g] > 1e-3) return false;
  return true;
}

}  // namespace

// ---------------------------------------------------------------------------
// Event detection

bool inside_container(const scene::ContainerSpec& c, double floor_y, const Vec2& p) {
  double xl = c.x_center - c.width / 2, xr = c.x_center + c.width / 2;
  return p.x > xl && p.x < xr && p.y > floor_y - 0.002 && p.y < floor_y + c.wall_height;
}

scene::FluidAnnotation detect_fluid_events(const ParticleTrajectory& t,
                                           const scene::Scenario& s) {
  scene::FluidAnnotation out;
  const auto& fl = *s.fluid;
  const double touch_r = 0.0012 + 1.5 * 0.0008;

  int observed_last = std::min<int>(s.frame_count - 1, static_cast<int>(t.frames.size()) - 1);
  int extended_last = static_cast<int>(t.frames.size()) - 1;

  auto count_containers = [&](int frame, std::map<int, std::map<int, int>>& into) {
    const TrajFrame& f = t.frames[frame];
    for (const auto& c : fl.containers) {
      auto& per_group = into[c.object_id];
      for (const auto& fs : fl.fluids) per_group[fs.group] = 0;
      for (std::size_t i = 0; i < f.px.size(); ++i)
        if (inside_container(c, fl.floor_y, {f.px[i], f.py[i]})) per_group[f.group[i]]++;
    }
  };
  count_containers(observed_last, out.container_counts);
  count_containers(extended_last, out.container_counts_extended);

  const TrajFrame& last = t.frames[observed_last];
  for (std::size_t i = 0; i < last.px.size(); ++i) out.group_counts[last.group[i]]++;

  // per-particle ordered stick paths over the full horizon; particles are
  // identified by emission order so indices stay stable across frames
  std::size_t max_n = t.frames.back().px.size();
  out.particle_paths.assign(max_n, {});
  std::map<int, std::map<int, int>> touched_observed, touched_extended;
  std::vector<std::vector<bool>> seen(fl.sticks.size(), std::vector<bool>(max_n, false));
  std::vector<std::vector<bool>> seen_obs(fl.sticks.size(), std::vector<bool>(max_n, false));

  for (int fi = 0; fi <= extended_last; ++fi) {
    const TrajFrame& f = t.frames[fi];
    for (std::size_t i = 0; i < f.px.size(); ++i) {
      Vec2 p{f.px[i], f.py[i]};
      for (std::size_t si = 0; si < fl.sticks.size(); ++si) {
        const auto& st = fl.sticks[si];
        Vec2 ab = st.b - st.a;
        double tt = std::clamp((p - st.a).dot(ab) / ab.norm2(), 0.0, 1.0);
        if ((p - (st.a + ab * tt)).norm() < touch_r) {
          auto& path = out.particle_paths[i];
          if (path.empty() || path.back() != st.object_id) path.push_back(st.object_id);
          if (!seen[si][i]) {
            seen[si][i] = true;
            touched_extended[st.object_id][f.group[i]]++;
          }
          if (fi <= observed_last && !seen_obs[si][i]) {
            seen_obs[si][i] = true;
            touched_observed[st.object_id][f.group[i]]++;
          }
        }
      }
    }
  }
  out.stick_contacts = std::move(touched_observed);
  out.stick_contacts_extended = std::move(touched_extended);
  return out;
}

namespace {

// centroid and mean speed of a group in one frame
void group_stats(const TrajFrame& f, int group, Vec2& centroid, double& speed, int& n) {
  centroid = {0, 0};
  speed = 0;
  n = 0;
  for (std::size_t i = 0; i < f.px.size(); ++i) {
    if (f.group[i] != group) continue;
    centroid += Vec2{f.px[i], f.py[i]};
    speed += std::sqrt(f.vx[i] * f.vx[i] + f.vy[i] * f.vy[i]);
    ++n;
  }
  if (n > 0) {
    centroid = centroid / n;
    speed /= n;
  }
}

}  // namespace

scene::BallAnnotation detect_ball_events(const ParticleTrajectory& t, const scene::Scenario& s) {
  scene::BallAnnotation out;
  const auto& bl = *s.ball;
  const double eps_rest = 1e-3;
  const int dwell = 30;

  std::vector<Obstacle> obs = obstacles_for(s);
  int observed_last = std::min<int>(s.frame_count - 1, static_cast<int>(t.frames.size()) - 1);
  int extended_last = static_cast<int>(t.frames.size()) - 1;

  auto settled_in = [&](int from, int to, int group) -> int {
    // pit id if the ball centroid sits in a pit gap below floor level with
    // near-zero speed for `dwell` consecutive frames
    int streak = 0;
    int pit_id = -1;
    for (int fi = from; fi <= to; ++fi) {
      Vec2 c;
      double sp;
      int n;
      group_stats(t.frames[fi], group, c, sp, n);
      if (n == 0) break;
      int here = -1;
      if (c.y < bl.floor_y) {
        for (const auto& p : bl.pits)
          if (c.x > p.x0 && c.x < p.x1) here = p.object_id;
      }
      if (here >= 0 && sp < eps_rest && (pit_id == -1 || here == pit_id)) {
        pit_id = here;
        if (++streak >= dwell) return pit_id;
      } else {
        streak = 0;
        pit_id = -1;
      }
    }
    return -1;
  };

  const double contact_r = 1.5 * 0.0016;
  for (const auto& b : bl.balls) {
    out.settled_pit[b.object_id] = settled_in(0, observed_last, b.group);
    out.settled_pit_extended[b.object_id] = settled_in(0, extended_last, b.group);

    // first contact with any obstacle, the pit bottom, or another ball
    MpmConfig cfg = MpmConfig::ball_defaults();
    double ground_y = cfg.ymin + 3 * cfg.grid_dx + contact_r;
    int first = -1;
    for (int fi = 0; fi <= observed_last && first < 0; ++fi) {
      const TrajFrame& f = t.frames[fi];
      for (std::size_t i = 0; i < f.px.size() && first < 0; ++i) {
        if (f.group[i] != b.group) continue;
        Vec2 p{f.px[i], f.py[i]};
        if (p.y < ground_y) {
          first = fi;
          out.collisions.push_back({"ball_collision", fi, b.object_id, -1});
          break;
        }
        for (const auto& ob : obs) {
          if (ob.sdf(p) < contact_r) {
            first = fi;
            int other = ob.object_id;
            out.collisions.push_back({"ball_collision", fi, b.object_id, other});
            break;
          }
        }
        if (first < 0) {
          for (std::size_t k = 0; k < f.px.size(); ++k) {
            if (f.group[k] == b.group) continue;
            double dx = f.px[k] - p.x, dy = f.py[k] - p.y;
            if (dx * dx + dy * dy < contact_r * contact_r) {
              first = fi;
              out.collisions.push_back(
                  {"ball_collision", fi, b.object_id, bl.balls[f.group[k]].object_id});
              break;
            }
          }
        }
      }
    }
    out.first_collision_frame[b.object_id] = first;
  }
  return out;
}

scene::AnnotationRecord detect_events(const ParticleTrajectory& t, const scene::Scenario& s) {
  scene::AnnotationRecord rec;
  rec.scenario = s;
  if (s.kind == scene::SceneKind::Fluid)
    rec.fluid = detect_fluid_events(t, s);
  else if (s.kind == scene::SceneKind::Ball)
    rec.ball = detect_ball_events(t, s);
  else
    fail(ErrorCode::Config, "detect_events supports fluid and ball trajectories");
  return rec;
}

// ---------------------------------------------------------------------------

std::vector<Vec2> frame_points(const TrajFrame& f, int group) {
  std::vector<Vec2> out;
  for (std::size_t i = 0; i < f.px.size(); ++i)
    if (group < 0 || f.group[i] == group) out.push_back({f.px[i], f.py[i]});
  return out;
}

std::vector<Vec2> resample(const std::vector<Vec2>& points, std::size_t n, std::uint64_t seed) {
  if (n > points.size())
    fail(ErrorCode::Config, "resample: requested " + std::to_string(n) + " of " +
                                std::to_string(points.size()) + " points");
  if (n == points.size()) return points;

  // farthest-point sampling from a seeded start
  Rng rng(derive_seed(seed, "resample"));
  std::vector<Vec2> out;
  out.reserve(n);
  std::vector<double> dist(points.size(), 1e30);
  std::size_t current = rng.below(points.size());
  out.push_back(points[current]);
  for (std::size_t k = 1; k < n; ++k) {
    double best = -1;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      double d = (points[i] - out.back()).norm2();
      if (d < dist[i]) dist[i] = d;
      if (dist[i] > best) {
        best = dist[i];
        best_i = i;
      }
    }
    out.push_back(points[best_i]);
  }
  return out;
}

}  // namespace physqa::mpm
