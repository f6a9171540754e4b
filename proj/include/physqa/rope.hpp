#pragma once

#include <map>
#include <string>

#include "physqa/rope_types.hpp"
#include "physqa/common.hpp"

namespace physqa::rope {

enum class Motion { Up, Down, Static };
enum class Rotation { Clockwise, Anticlockwise, Static };

std::string to_string(Motion m);
std::string to_string(Rotation r);

struct StaticsSolution {
  std::map<int, double> tension;       // rope object id -> tension, >= 0, slack = 0
  std::map<int, double> acceleration;  // movable body id -> signed vertical accel, + up
  std::map<int, Motion> motion;        // movable body id -> label
  std::map<int, Rotation> rotation;    // pulley id -> label
  double residual = 0;                 // max equation residual of the final solve
};

// Assembles Newton's law per movable body and one inextensibility constraint
// per rope, solves the linear system, and re-solves with slack ropes removed
// whenever a tension comes out negative.
StaticsSolution solve(const RopeSystem& system);

// Returns an edited copy; `action` is "increase" or "decrease", the mass is
// multiplied by `factor` or its reciprocal.
RopeSystem apply_mass_edit(const RopeSystem& system, int object_id, const std::string& action,
                           double factor = 4.0);

enum class MassVerdict { Yes, No, Unknown };

// Compares m1 against factor * m2 at relative tolerance 1e-9.
MassVerdict mass_relation(const RopeSystem& system, int o1, int o2, const std::string& cmp,
                          double factor);

Rotation rotation_direction(const RopeSystem& system, int pulley_id,
                            const StaticsSolution& solution);

// Connected components of the constraint graph ("groups" in annotations).
std::vector<std::vector<int>> constraint_groups(const RopeSystem& system);

inline constexpr double kMotionEps = 1e-6;  // m/s^2; below this a body is static

}  // namespace physqa::rope
