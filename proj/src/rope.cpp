#include "physqa/rope.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

namespace physqa::rope {

std::string to_string(Motion m) {
  switch (m) {
    case Motion::Up: return "move up";
    case Motion::Down: return "move down";
    case Motion::Static: return "static";
  }
  return "static";
}

std::string to_string(Rotation r) {
  switch (r) {
    case Rotation::Clockwise: return "rotate clockwise";
    case Rotation::Anticlockwise: return "rotate anti-clockwise";
    case Rotation::Static: return "static";
  }
  return "static";
}

namespace {

// Dense Gaussian elimination with partial pivoting; systems here are tiny
// (a handful of bodies and ropes).
std::vector<double> solve_dense(std::vector<std::vector<double>> a, std::vector<double> b,
                                const std::vector<std::string>& row_names) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    if (std::abs(a[pivot][col]) < 1e-12)
      fail(ErrorCode::Validation,
           "singular rope system: redundant or contradictory constraint near equation '" +
               row_names[col] + "'");
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      double f = a[r][col] / a[col][col];
      if (f == 0) continue;
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return x;
}

struct Assembly {
  // unknown layout: [tensions per active rope..., accelerations per movable body...]
  std::vector<int> active_ropes;    // rope object ids
  std::vector<int> movable_bodies;  // body object ids
  std::map<int, std::size_t> rope_col, body_col;
  std::vector<std::vector<double>> a;
  std::vector<double> b;
  std::vector<std::string> row_names;
};

const Body& body_of(const RopeSystem& sys, int id) {
  const Body* b = sys.find_body(id);
  if (!b) fail(ErrorCode::Validation, "rope system references missing body " + std::to_string(id));
  return *b;
}

// Sign of "segment pulls this endpoint upward": +1 when the far end is higher.
double pull_sign(const Body& self, const Body& other) {
  return other.height >= self.height ? 1.0 : -1.0;
}

Assembly assemble(const RopeSystem& sys, const std::set<int>& slack) {
  Assembly as;
  for (const auto& r : sys.ropes)
    if (!slack.count(r.object_id)) {
      as.rope_col[r.object_id] = as.active_ropes.size();
      as.active_ropes.push_back(r.object_id);
    }
  for (const auto& b : sys.bodies)
    if (b.movable) {
      as.body_col[b.object_id] = as.active_ropes.size() + as.movable_bodies.size();
      as.movable_bodies.push_back(b.object_id);
    }

  std::size_t n = as.active_ropes.size() + as.movable_bodies.size();
  as.a.assign(n, std::vector<double>(n, 0.0));
  as.b.assign(n, 0.0);
  as.row_names.assign(n, "");

  // Newton per movable body: sum(segment pulls) - m a = m g
  // (rows first so the diagonal carries the -m a / accel coefficients)
  std::size_t row = 0;
  std::map<int, std::size_t> body_row;
  for (int id : as.movable_bodies) {
    body_row[id] = row;
    const Body& bd = body_of(sys, id);
    as.a[row][as.body_col[id]] = -(bd.mass);
    as.b[row] = bd.mass * sys.gravity;
    as.row_names[row] = "newton(" + std::to_string(id) + ")";
    ++row;
  }
  // one inextensibility constraint per active rope
  for (int rid : as.active_ropes) {
    as.row_names[row] = "constraint(" + std::to_string(rid) + ")";
    ++row;
  }

  // walk rope paths, adding tension pulls and length-rate terms
  for (const auto& r : sys.ropes) {
    if (slack.count(r.object_id)) continue;
    std::size_t tcol = as.rope_col[r.object_id];
    std::size_t crow = as.movable_bodies.size() + tcol;
    for (std::size_t i = 0; i + 1 < r.path.size(); ++i) {
      const Body& u = body_of(sys, r.path[i].body_id);
      const Body& v = body_of(sys, r.path[i + 1].body_id);
      // segment u-v: tension pulls each endpoint toward the other
      if (u.movable) as.a[body_row[u.object_id]][tcol] += pull_sign(u, v);
      if (v.movable) as.a[body_row[v.object_id]][tcol] += pull_sign(v, u);
      // length rate: d|y_u - y_v|/dt = sign(y_u - y_v) (a_u - a_v)
      double sgn = u.height >= v.height ? 1.0 : -1.0;
      if (u.movable) as.a[crow][as.body_col[u.object_id]] += sgn;
      if (v.movable) as.a[crow][as.body_col[v.object_id]] -= sgn;
    }
    // a rope whose movable endpoints all dropped out (everything anchored)
    // still needs a nonsingular row; tension column keeps it determined
    bool empty_row = true;
    for (double c : as.a[crow])
      if (c != 0) empty_row = false;
    if (empty_row) as.a[crow][tcol] = 1.0;  // fully anchored rope: tension set by Newton rows
  }
  return as;
}

}  // namespace

std::vector<std::vector<int>> constraint_groups(const RopeSystem& sys) {
  std::map<int, int> parent;
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  auto unite = [&](int x, int y) { parent[find(x)] = find(y); };
  for (const auto& b : sys.bodies) parent[b.object_id] = b.object_id;
  for (const auto& r : sys.ropes) {
    parent[r.object_id] = r.object_id;
    for (const auto& v : r.path) unite(r.object_id, v.body_id);
  }
  std::map<int, std::vector<int>> comps;
  for (const auto& [id, p] : parent) comps[find(id)].push_back(id);
  std::vector<std::vector<int>> out;
  for (auto& [root, ids] : comps) {
    std::sort(ids.begin(), ids.end());
    out.push_back(ids);
  }
  return out;
}

StaticsSolution solve(const RopeSystem& sys) {
  for (const auto& r : sys.ropes)
    if (r.path.size() < 2)
      fail(ErrorCode::Validation, "rope " + std::to_string(r.object_id) + " has no segments");

  std::set<int> slack;
  for (std::size_t iteration = 0; iteration <= sys.ropes.size(); ++iteration) {
    Assembly as = assemble(sys, slack);
    std::vector<double> x;
    if (!as.b.empty()) x = solve_dense(as.a, as.b, as.row_names);

    // slack handling: drop the most negative tension and re-solve
    int worst = -1;
    double worst_t = -1e-9;
    for (std::size_t i = 0; i < as.active_ropes.size(); ++i)
      if (x[i] < worst_t) {
        worst_t = x[i];
        worst = as.active_ropes[i];
      }
    if (worst >= 0) {
      slack.insert(worst);
      continue;
    }

    StaticsSolution sol;
    for (std::size_t i = 0; i < as.active_ropes.size(); ++i) sol.tension[as.active_ropes[i]] = x[i];
    for (int rid : slack) sol.tension[rid] = 0.0;
    for (std::size_t i = 0; i < as.movable_bodies.size(); ++i)
      sol.acceleration[as.movable_bodies[i]] = x[as.active_ropes.size() + i];
    for (const auto& b : sys.bodies)
      if (!b.movable) sol.acceleration[b.object_id] = 0.0;

    // free-falling bodies attached only to slack ropes already satisfy
    // Newton (their row solved with zero tension pulls)
    for (const auto& [id, a] : sol.acceleration) {
      const Body& bd = body_of(sys, id);
      if (!bd.movable) continue;
      sol.motion[id] = a > kMotionEps ? Motion::Up : a < -kMotionEps ? Motion::Down : Motion::Static;
    }

    // residual check over the assembled equations
    double res = 0;
    for (std::size_t r = 0; r < as.b.size(); ++r) {
      double lhs = 0;
      for (std::size_t c = 0; c < as.b.size(); ++c) lhs += as.a[r][c] * x[c];
      res = std::max(res, std::abs(lhs - as.b[r]));
    }
    sol.residual = res;
    if (res > 1e-9)
      fail(ErrorCode::Simulation, "rope solve residual " + std::to_string(res) + " exceeds 1e-9");

    for (const auto& b : sys.bodies)
      if (b.kind == BodyKind::Pulley) sol.rotation[b.object_id] = rotation_direction(sys, b.object_id, sol);
    return sol;
  }
  fail(ErrorCode::Simulation, "slack resolution did not converge");
}

RopeSystem apply_mass_edit(const RopeSystem& sys, int object_id, const std::string& action,
                           double factor) {
  if (factor <= 0) fail(ErrorCode::Validation, "mass edit factor must be positive");
  if (action != "increase" && action != "decrease")
    fail(ErrorCode::Validation, "mass edit action must be increase or decrease, got '" + action + "'");
  RopeSystem out = sys;
  for (auto& b : out.bodies) {
    if (b.object_id != object_id) continue;
    if (b.kind != BodyKind::Load)
      fail(ErrorCode::Validation,
           "mass edit target " + std::to_string(object_id) + " is not a load");
    b.mass *= (action == "increase" ? factor : 1.0 / factor);
    return out;
  }
  fail(ErrorCode::Validation, "mass edit target " + std::to_string(object_id) + " not in system");
}

MassVerdict mass_relation(const RopeSystem& sys, int o1, int o2, const std::string& cmp,
                          double factor) {
  const Body& b1 = body_of(sys, o1);
  const Body& b2 = body_of(sys, o2);
  double lhs = b1.mass, rhs = factor * b2.mass;
  bool equal = nearly_equal(lhs, rhs, 1e-9);
  bool verdict;
  if (cmp == "greater than")
    verdict = !equal && lhs > rhs;
  else if (cmp == "less than")
    verdict = !equal && lhs < rhs;
  else if (cmp == "equal to")
    verdict = equal;
  else
    fail(ErrorCode::Validation, "unknown mass comparison '" + cmp + "'");
  return verdict ? MassVerdict::Yes : MassVerdict::No;
}

Rotation rotation_direction(const RopeSystem& sys, int pulley_id, const StaticsSolution& sol) {
  const Body& pb = body_of(sys, pulley_id);
  if (pb.kind != BodyKind::Pulley)
    fail(ErrorCode::Validation, std::to_string(pulley_id) + " is not a pulley");

  for (const auto& r : sys.ropes) {
    for (std::size_t i = 1; i < r.path.size(); ++i) {
      const Visit& v = r.path[i];
      if (v.type != Visit::Type::Rim || v.body_id != pulley_id) continue;
      // rope flow across the rim: rate of change of the first adjacent
      // segment's length (the system starts at rest, so accelerations carry
      // the impending motion sign)
      const Body& prev = body_of(sys, r.path[i - 1].body_id);
      double a_prev = sol.acceleration.count(prev.object_id)
                          ? sol.acceleration.at(prev.object_id)
                          : 0.0;
      double a_self = sol.acceleration.count(pulley_id) ? sol.acceleration.at(pulley_id) : 0.0;
      double sgn = prev.height >= pb.height ? 1.0 : -1.0;
      double flow = sgn * (a_prev - a_self);  // first segment lengthening rate
      double q = flow * v.winding;
      if (std::abs(q) < kMotionEps) return Rotation::Static;
      return q < 0 ? Rotation::Anticlockwise : Rotation::Clockwise;
    }
  }
  fail(ErrorCode::Validation,
       "pulley " + std::to_string(pulley_id) + " has no wrapped rope");
}

}  // namespace physqa::rope
