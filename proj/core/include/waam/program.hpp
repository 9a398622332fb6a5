#pragma once

#include <optional>
#include <string>
#include <vector>

#include "waam/positioner.hpp"
#include "waam/types.hpp"

namespace waam {

struct DevicePose {
  Point3 position;
  Rotation3 orientation = Rotation3::Identity();
};

/// Target of one motion segment. The torch pose is expressed in the
/// positioner-plate frame; its z axis points into the deposit.
struct Waypoint {
  DevicePose torch;
  PositionerState positioner;
  bool arc_on = false;

  /// Increment direction in the plate frame (opposite the torch axis).
  Vec3 increment() const { return -torch.orientation.col(2); }
};

enum class Primitive { MoveL, MoveC, MoveJ };

struct MotionSegment {
  Primitive primitive = Primitive::MoveL;
  Waypoint target;
  double speed = 0.0;               // welding-robot path speed, mm/s
  std::optional<DevicePose> via;    // MoveC only
  std::string group;                // active synchronisation group
};

enum class DeviceKind { Robot, Positioner };

struct DeviceDecl {
  std::string name;
  DeviceKind kind = DeviceKind::Robot;
};

struct SyncGroup {
  std::string name;
  std::vector<std::string> members;
};

struct MotionProgram {
  std::vector<DeviceDecl> devices;
  std::vector<SyncGroup> groups;
  std::vector<MotionSegment> segments;
  double d_r = 5.0;   // nominal waypoint spacing, mm
  double v_r = 9.0;   // relative path speed, mm/s
  std::string material;
  double feed_rate_ipm = 0.0;

  /// Default cell: one welding robot and one positioner moving as group "cell".
  static MotionProgram with_default_cell();

  const DeviceDecl* robot() const;
  const DeviceDecl* positioner() const;
};

/// Number of arc-on spans (maximal runs of arc_on segments).
std::size_t arc_span_count(const MotionProgram& program);

/// Throws on an empty program, non-positive arc-on speeds, unknown groups or
/// devices, or non-orthonormal orientations.
void validate(const MotionProgram& program);

/// Same devices, groups, primitives and arc states, with numeric fields equal
/// within `tol` (positions, joints in rad, speeds) and rotations within `tol`.
bool structurally_equal(const MotionProgram& a, const MotionProgram& b, double tol = 1e-9);

std::string to_string(Primitive primitive);

}  // namespace waam
