#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "waam/material.hpp"
#include "waam/positioner.hpp"
#include "waam/program.hpp"
#include "waam/slicer.hpp"

namespace waam {

inline constexpr double kDefaultWaypointSpacing = 5.0;  // mm

/// How slice-plan segments are stitched into deposition paths.
struct PathOptions {
  bool spiral = false;      // chain single-segment layers into one continuous path
  bool alternate = true;    // reverse every other open path (back-and-forth)
  std::size_t layer_stride = 1;
};

struct PathSample {
  Point3 p;
  Vec3 t;  // travel direction
  Vec3 a;  // increment direction
};

struct ToolPath {
  std::vector<PathSample> samples;
  bool closed = false;
};

/// Deposition paths in execution order.
std::vector<ToolPath> build_paths(const SlicePlan& plan, const PathOptions& options = {});

/// Uniform arc-length resampling at d_r. A path of length L gets
/// floor(L / d_r) intervals (at least one); closed paths include the closing
/// edge and end on their first sample.
ToolPath resample_path(const ToolPath& path, double d_r);

/// Torch frame with z = -a and x along travel, optionally tilted by work
/// (about travel) and travel (about the torch y axis) angles.
Rotation3 torch_orientation(const Vec3& a, const Vec3& t, double work_angle = 0.0,
                            double travel_angle = 0.0);

/// Resamples build_paths(plan, options) at d_r and attaches positioner states
/// interpolated from `trajectory`, which must hold one state per path sample.
/// The first waypoint of every path is an arc-off approach.
std::vector<Waypoint> discretize(const SlicePlan& plan, const PositionerTrajectory& trajectory,
                                 double d_r, const PathOptions& options = {});

/// Distance travelled by the torch in the world frame between two waypoints,
/// after composing the positioner rotation.
double torch_world_distance(const Waypoint& from, const Waypoint& to);

/// moveL segments whose speed is v1 = d1 / (d_r / v_r); a stationary torch
/// (d1 = 0) moves at v_r.
std::vector<MotionSegment> coordinate_speeds(const std::vector<Waypoint>& waypoints, double d_r,
                                             double v_r, const std::string& group = "cell");

/// Duration of segment i as executed by the welding robot.
double segment_duration(const MotionProgram& program, std::size_t i);
double torch_duration(const MotionProgram& program);
/// Positioner time: each segment occupies one synchronised slot of d_r / v_r.
double positioner_duration(const MotionProgram& program);

struct PlanOptions {
  double d_r = kDefaultWaypointSpacing;
  std::optional<double> v_r;  // defaults to the material torch speed
  PathOptions paths;
  BranchPolicy policy = BranchPolicy::NegativeQ1;
  double singular_threshold = kDefaultSingularThreshold;
  std::size_t smoothing_window = kDefaultSmoothingWindow;
  double work_angle = 0.0;    // rad
  double travel_angle = 0.0;  // rad
};

struct PlanResult {
  MotionProgram program;
  PositionerTrajectory trajectory;  // one state per segment
};

/// Full planning pipeline: path stitching (warping closed layers first in
/// spiral mode), d_r resampling, positioner alignment per waypoint with
/// singularity hold and smoothing, then speed coordination.
/// Joint-limit failures name the offending waypoint index.
PlanResult plan_print(const SlicePlan& plan, const MaterialParams& material,
                      const PlanOptions& options = {});

/// `index,q1_deg,q2_deg,singular` rows.
std::string trajectory_csv(const PositionerTrajectory& trajectory);

}  // namespace waam
