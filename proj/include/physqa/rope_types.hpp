#pragma once

#include <string>
#include <vector>

namespace physqa::rope {

// The rope-pulley world is one-dimensional statics: every body moves along
// the vertical axis, ropes run between attachment heights, pulleys redirect.
// Poses come from the owning scenario; `height` below is the body's nominal
// y used to orient segments.

enum class BodyKind { Anchor, Load, Pulley };

struct Body {
  int object_id = -1;
  BodyKind kind{};
  double mass = 0;       // kg; anchors and idealized pulleys carry 0
  bool movable = false;  // anchors never; loads usually; pulleys when hanging
  double height = 0;     // nominal y, orients rope segments

  bool operator==(const Body&) const = default;
};

// One stop on a rope's path. An End attaches to a body (load, anchor or a
// pulley's axle); a Rim wraps a pulley with a winding sign.
// Winding convention, fixed forever: +1 means the rope enters the rim on the
// left when looking at the wall. With winding +1, rope material flowing
// toward the first-listed neighbour spins the pulley anticlockwise.
struct Visit {
  enum class Type { End, Rim };
  Type type = Type::End;
  int body_id = -1;
  int winding = +1;  // rims only

  bool operator==(const Visit&) const = default;
};

struct Rope {
  int object_id = -1;
  std::vector<Visit> path;  // >= 2 visits, first and last are Ends

  bool operator==(const Rope&) const = default;
};

struct RopeSystem {
  std::vector<Body> bodies;
  std::vector<Rope> ropes;
  double gravity = 9.81;  // m/s^2, world units for this scenario

  bool operator==(const RopeSystem&) const = default;

  const Body* find_body(int object_id) const;
};

}  // namespace physqa::rope
