#include "waam/program.hpp"

#include <algorithm>
#include <cmath>

#include "waam/error.hpp"

namespace waam {

MotionProgram MotionProgram::with_default_cell() {
  MotionProgram program;
  program.devices = {{"torch", DeviceKind::Robot}, {"positioner", DeviceKind::Positioner}};
  program.groups = {{"cell", {"torch", "positioner"}}};
  return program;
}

const DeviceDecl* MotionProgram::robot() const {
  for (const auto& d : devices) {
    if (d.kind == DeviceKind::Robot) return &d;
  }
  return nullptr;
}

const DeviceDecl* MotionProgram::positioner() const {
  for (const auto& d : devices) {
    if (d.kind == DeviceKind::Positioner) return &d;
  }
  return nullptr;
}

std::size_t arc_span_count(const MotionProgram& program) {
  std::size_t spans = 0;
  bool on = false;
  for (const auto& seg : program.segments) {
    if (seg.target.arc_on && !on) ++spans;
    on = seg.target.arc_on;
  }
  return spans;
}

std::string to_string(Primitive primitive) {
  switch (primitive) {
    case Primitive::MoveL: return "moveL";
    case Primitive::MoveC: return "moveC";
    case Primitive::MoveJ: return "moveJ";
  }
  return "?";
}

void validate(const MotionProgram& program) {
  require(!program.segments.empty(), ErrorCode::InvalidArgument, "motion program is empty");
  require(program.robot() != nullptr, ErrorCode::InvalidArgument, "program declares no robot");
  auto has_device = [&](const std::string& name) {
    return std::any_of(program.devices.begin(), program.devices.end(),
                       [&](const DeviceDecl& d) { return d.name == name; });
  };
  for (const auto& g : program.groups) {
    for (const auto& m : g.members) {
      require(has_device(m), ErrorCode::UnknownReference,
              "group '" + g.name + "' references unknown device '" + m + "'");
    }
  }
  for (std::size_t i = 0; i < program.segments.size(); ++i) {
    const auto& seg = program.segments[i];
    if (!seg.group.empty()) {
      const bool known = std::any_of(program.groups.begin(), program.groups.end(),
                                     [&](const SyncGroup& g) { return g.name == seg.group; });
      require(known, ErrorCode::UnknownReference,
              "segment " + std::to_string(i) + " uses undeclared group '" + seg.group + "'");
    }
    require(!seg.target.arc_on || seg.speed > 0.0, ErrorCode::InvalidArgument,
            "arc-on segment " + std::to_string(i) + " has non-positive speed");
    require(is_rotation(seg.target.torch.orientation, 1e-6), ErrorCode::InvalidArgument,
            "segment " + std::to_string(i) + " orientation is not a rotation");
    require(seg.primitive != Primitive::MoveC || seg.via.has_value(), ErrorCode::InvalidArgument,
            "moveC segment " + std::to_string(i) + " lacks a via pose");
  }
}

namespace {

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

bool pose_equal(const DevicePose& a, const DevicePose& b, double tol) {
  return (a.position - b.position).cwiseAbs().maxCoeff() <= tol &&
         (a.orientation - b.orientation).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace

bool structurally_equal(const MotionProgram& a, const MotionProgram& b, double tol) {
  if (a.devices.size() != b.devices.size() || a.groups.size() != b.groups.size() ||
      a.segments.size() != b.segments.size() || a.material != b.material ||
      !near(a.d_r, b.d_r, tol) || !near(a.v_r, b.v_r, tol) ||
      !near(a.feed_rate_ipm, b.feed_rate_ipm, tol)) {
    return false;
  }
  for (std::size_t i = 0; i < a.devices.size(); ++i) {
    if (a.devices[i].name != b.devices[i].name || a.devices[i].kind != b.devices[i].kind) {
      return false;
    }
  }
  for (std::size_t i = 0; i < a.groups.size(); ++i) {
    if (a.groups[i].name != b.groups[i].name || a.groups[i].members != b.groups[i].members) {
      return false;
    }
  }
  for (std::size_t i = 0; i < a.segments.size(); ++i) {
    const auto& x = a.segments[i];
    const auto& y = b.segments[i];
    if (x.primitive != y.primitive || x.group != y.group ||
        x.target.arc_on != y.target.arc_on || !near(x.speed, y.speed, tol) ||
        !pose_equal(x.target.torch, y.target.torch, tol) ||
        !near(x.target.positioner.q1, y.target.positioner.q1, tol) ||
        !near(x.target.positioner.q2, y.target.positioner.q2, tol) ||
        x.via.has_value() != y.via.has_value() ||
        (x.via && !pose_equal(*x.via, *y.via, tol))) {
      return false;
    }
  }
  return true;
}

}  // namespace waam
