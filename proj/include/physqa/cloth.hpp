#pragma once

#include <string>
#include <vector>

#include "physqa/common.hpp"
#include "physqa/scene.hpp"

namespace physqa::cloth {

// Pose labels for tabletop objects after the sweep.
inline constexpr const char* kUprightInPlace = "upright in place";
inline constexpr const char* kUprightDisplaced = "upright but displaced";
inline constexpr const char* kFallenOver = "fallen over";

struct ClothFrame {
  std::vector<Vec3> positions;  // both cloths, concatenated
  std::vector<Vec3> object_centers;
};

struct SweepResult {
  scene::ClothAnnotation annotation;
  std::vector<ClothFrame> frames;  // one per episode frame
  int cloth_particles = 0;         // per cloth
  double max_residual = 0;         // worst per-frame XPBD residual, in rest lengths
};

// Runs the full 145-frame episode: XPBD cloth with distance and bending
// constraints, kinematic grip on the leading edge, rigid contact with
// Coulomb friction, quasi-static toppling and sliding of tabletop objects.
SweepResult simulate_sweep(const scene::Scenario& s);

// Pose label for one object out of a finished sweep.
std::string final_pose(int object_id, const scene::ClothAnnotation& a);

// Cloth-to-cloth property comparison. `property` is "elasticity" or
// "bending"; cmp is "greater than" / "less than" / "equal to" (bending also
// accepts "harder" / "easier"); much requires ratio >= 2.
bool compare_cloth(const scene::Scenario& s, const std::string& property,
                   scene::PositionSlot left, scene::PositionSlot right, const std::string& cmp,
                   bool much);

}  // namespace physqa::cloth
