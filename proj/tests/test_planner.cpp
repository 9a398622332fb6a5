#include <doctest.h>

#include <cmath>
#include <sstream>

#include "waam/error.hpp"
#include "waam/fixtures.hpp"
#include "waam/material.hpp"
#include "waam/planner.hpp"

using namespace waam;

namespace {

SlicePlan straight_layer(double length) {
  const TriMesh wall = fixtures::wall(length, 5, 1);
  SlicePlan plan;
  plan.layers.push_back(sample_base_layer(wall, Plane{{0, 0, 0}, kAxisZ}, 0.5));
  return plan;
}

PositionerTrajectory flat_trajectory(const SlicePlan& plan, const PathOptions& opt = {}) {
  std::size_t n = 0;
  for (const auto& p : build_paths(plan, opt)) n += p.samples.size();
  PositionerTrajectory t;
  t.states.assign(n, PositionerState{});
  t.singular_flags.assign(n, false);
  return t;
}

Waypoint at(const Point3& p, PositionerState q = {}) {
  Waypoint w;
  w.torch.position = p;
  w.positioner = q;
  w.arc_on = true;
  return w;
}

const MaterialParams& aluminum() {
  static const MaterialTable table = MaterialTable::builtin();
  return table.at("aluminum");
}

}  // namespace

TEST_CASE("100 mm straight layer gives 21 waypoints") {
  const SlicePlan plan = straight_layer(100);
  const auto wps = discretize(plan, flat_trajectory(plan), 5.0);
  REQUIRE(wps.size() == 21);
  for (std::size_t i = 1; i < wps.size(); ++i)
    CHECK((wps[i].torch.position - wps[i - 1].torch.position).norm() == doctest::Approx(5.0));
  CHECK_FALSE(wps.front().arc_on);
  CHECK(wps.back().arc_on);
}

TEST_CASE("closed circle of 188.5 mm gives 38 waypoints") {
  const SlicePlan plan = slice_axisymmetric(fixtures::cylinder_profile(30, 0.5), 1.0, 0.5);
  REQUIRE(plan.layers.size() == 1);
  const auto wps = discretize(plan, flat_trajectory(plan), 5.0);
  const double circumference = 2 * kPi * 30;
  CHECK(wps.size() == static_cast<std::size_t>(std::floor(circumference / 5.0)) + 1);
  CHECK(wps.size() == 38);
  CHECK((wps.front().torch.position - wps.back().torch.position).norm() <= 1e-9);
}

TEST_CASE("discretize preconditions") {
  const SlicePlan plan = straight_layer(20);
  CHECK_THROWS_AS(discretize(plan, flat_trajectory(plan), 0.0), Error);
  CHECK_THROWS_AS(discretize(plan, flat_trajectory(plan), -1.0), Error);
  CHECK_THROWS_AS(discretize(SlicePlan{}, PositionerTrajectory{}, 5.0), Error);
  PositionerTrajectory short_traj;
  short_traj.states.resize(3);
  short_traj.singular_flags.resize(3);
  CHECK_THROWS_AS(discretize(plan, short_traj, 5.0), Error);
}

TEST_CASE("torch frame opposes the increment direction") {
  const Vec3 a = Vec3(0.2, -0.3, 0.9).normalized();
  const Vec3 t = a.cross(kAxisX).normalized();
  const Rotation3 r = torch_orientation(a, t);
  CHECK(is_rotation(r));
  CHECK((r.col(2) + a).norm() <= 1e-12);
  CHECK((r.col(0) - t).norm() <= 1e-12);
  const Rotation3 tilted = torch_orientation(a, t, deg2rad(1.5), 0.0);
  CHECK(std::acos(std::clamp(-tilted.col(2).dot(a), -1.0, 1.0)) <= deg2rad(2));
}

TEST_CASE("speed rule arithmetic") {
  {
    const auto segs = coordinate_speeds({at({0, 0, 0}), at({5, 0, 0})}, 5.0, 9.0);
    CHECK(segs[1].speed == 9.0);
  }
  {
    const auto segs = coordinate_speeds({at({0, 0, 0}), at({2.5, 0, 0})}, 5.0, 9.0);
    CHECK(segs[1].speed == doctest::Approx(4.5).epsilon(1e-15));
  }
  {
    const auto segs = coordinate_speeds({at({0, 0, 0}), at({10, 0, 0})}, 5.0, 8.0);
    CHECK(segs[1].speed == doctest::Approx(16.0).epsilon(1e-15));
  }
  {
    // Torch still in the plate frame, positioner swings: the world distance counts.
    const Point3 p(20, 0, 0);
    const auto segs = coordinate_speeds({at(p, {0, 0}), at(p, {0, kPi / 2})}, 5.0, 9.0);
    const double d1 = (base_orientation({0, kPi / 2}) * p - p).norm();
    CHECK(segs[1].speed * (5.0 / 9.0) == doctest::Approx(d1).epsilon(1e-12));
  }
  {
    // Nothing moves at all.
    const auto segs = coordinate_speeds({at({1, 1, 1}), at({1, 1, 1})}, 5.0, 9.0);
    CHECK(segs[1].speed == 9.0);
  }
  CHECK_THROWS_AS(coordinate_speeds({at({0, 0, 0})}, 5.0, 0.0), Error);
}

TEST_CASE("open wall plan gets one arc span per layer") {
  const SlicePlan plan = slice_surface(fixtures::wall(100, 50, 1), 1.0, 0.5, 50);
  const PlanResult r = plan_print(plan, aluminum());
  CHECK(arc_span_count(r.program) == plan.layers.size());
  CHECK(r.program.material == "aluminum");
  CHECK(r.program.feed_rate_ipm == 110.0);
  CHECK(r.program.v_r == 9.0);
  CHECK(r.trajectory.size() == r.program.segments.size());
  CHECK_NOTHROW(validate(r.program));
  // Alternating direction: consecutive layers start at opposite ends.
  const auto paths = build_paths(plan);
  CHECK(paths[0].samples.front().p.x() < paths[1].samples.front().p.x());
}

TEST_CASE("cylinder spiral plan is a single arc span") {
  const SlicePlan plan = slice_surface(fixtures::cylinder(30, 20, 188, 1), 1.0, 0.5, 50);
  PlanOptions opt;
  opt.paths.spiral = true;
  const PlanResult r = plan_print(plan, aluminum(), opt);
  CHECK(arc_span_count(r.program) == 1);
  CHECK(r.program.segments.back().target.arc_on);
  CHECK_FALSE(r.program.segments.front().target.arc_on);
}

TEST_CASE("planned speeds satisfy the coordination rule") {
  const SlicePlan plan = slice_surface(fixtures::blade(), 1.0, 0.5, 50);
  const PlanResult r = plan_print(plan, aluminum());
  const auto& p = r.program;
  for (std::size_t i = 1; i < p.segments.size(); ++i) {
    const double d1 = torch_world_distance(p.segments[i - 1].target, p.segments[i].target);
    if (d1 > 0) CHECK(std::abs(p.segments[i].speed * (p.d_r / p.v_r) - d1) <= 1e-9);
  }
  CHECK(torch_duration(p) == doctest::Approx(positioner_duration(p)).epsilon(1e-12));
}

TEST_CASE("blade waypoints align the increment with gravity") {
  const SlicePlan plan = slice_surface(fixtures::blade(), 1.0, 0.5, 50);
  const PlanResult r = plan_print(plan, aluminum());
  std::size_t checked = 0;
  for (std::size_t i = 0; i < r.program.segments.size(); ++i) {
    if (r.trajectory.singular_flags[i]) continue;
    const auto& wp = r.program.segments[i].target;
    CHECK((base_orientation(wp.positioner) * wp.increment() - kAxisZ).norm() <= 1e-6);
    ++checked;
  }
  CHECK(checked > 100);
}

TEST_CASE("joint-limit failures name the waypoint") {
  // Increment direction pointing down: |q1| = 180 deg on both branches.
  SlicePlan plan;
  Layer layer;
  LayerSegment seg;
  for (int j = 0; j < 21; ++j) {
    LayerPoint lp;
    lp.p = Point3(j, 0, 0);
    lp.t = kAxisX;
    lp.n = kAxisY;
    lp.a = -kAxisZ;
    lp.lambda = j;
    seg.push_back(lp);
  }
  layer.segments.push_back(seg);
  plan.layers.push_back(layer);
  try {
    plan_print(plan, aluminum());
    FAIL("expected JointLimit");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::JointLimit);
    CHECK(std::string(e.what()).find("waypoint 0") != std::string::npos);
  }
}

TEST_CASE("trajectory csv layout") {
  PositionerTrajectory t;
  t.states = {{0, 0}, {deg2rad(-30), deg2rad(190)}};
  t.singular_flags = {true, false};
  CHECK(trajectory_csv(t) == "index,q1_deg,q2_deg,singular\n0,0.000000,0.000000,1\n1,-30.000000,190.000000,0\n");
}

TEST_CASE("layer stride skips layers") {
  const SlicePlan plan = slice_axisymmetric(fixtures::cylinder_profile(10, 19), 1.0, 0.5);
  PathOptions opt;
  opt.layer_stride = 10;
  CHECK(build_paths(plan, opt).size() == 2);
}
