#include <doctest.h>

#include <cmath>
#include <random>

#include "waam/error.hpp"
#include "waam/fixtures.hpp"
#include "waam/positioner.hpp"
#include "waam/slicer.hpp"

using namespace waam;

namespace {

// R(z, q2) R(y, q1) z built from Eigen's own angle-axis, independent of axis_rotation.
Vec3 forward(const PositionerState& q) {
  const Eigen::Matrix3d rz = Eigen::AngleAxisd(q.q2, Vec3::UnitZ()).toRotationMatrix();
  const Eigen::Matrix3d ry = Eigen::AngleAxisd(q.q1, Vec3::UnitY()).toRotationMatrix();
  return rz * ry * Vec3::UnitZ();
}

double wrap_diff(double a, double b) { return std::remainder(a - b, 2 * kPi); }

double max_step_q2(const PositionerTrajectory& t) {
  double m = 0;
  for (std::size_t i = 1; i < t.size(); ++i) m = std::max(m, std::abs(t.states[i].q2 - t.states[i - 1].q2));
  return m;
}

PositionerTrajectory from_states(std::vector<PositionerState> s) {
  PositionerTrajectory t;
  t.singular_flags.assign(s.size(), false);
  t.states = std::move(s);
  return t;
}

}  // namespace

TEST_CASE("base orientation at simple configurations") {
  CHECK(base_orientation({0, 0}).isApprox(Rotation3::Identity(), 1e-15));
  const Rotation3 want = Eigen::AngleAxisd(-kPi / 2, Vec3::UnitZ()).toRotationMatrix();
  CHECK((base_orientation({0, kPi / 2}) - want).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(is_rotation(base_orientation({0.3, -2.0})));
}

TEST_CASE("gravity_align on the axes") {
  {
    const auto [a, b] = gravity_align(kAxisZ);
    CHECK(a.q1 == 0.0);
    CHECK(a.q2 == 0.0);
    CHECK(b.q1 == 0.0);
    CHECK(b.q2 == doctest::Approx(kPi));
  }
  {
    const auto [a, b] = gravity_align(kAxisX);
    CHECK(a.q1 == doctest::Approx(kPi / 2));
    CHECK(a.q2 == doctest::Approx(0.0));
    CHECK(b.q1 == doctest::Approx(-kPi / 2));
    CHECK(b.q2 == doctest::Approx(kPi));
    CHECK((forward(a) - kAxisX).norm() <= 1e-12);
    CHECK((forward(b) - kAxisX).norm() <= 1e-12);
  }
  {
    const auto [a, b] = gravity_align(kAxisY);
    CHECK(a.q1 == doctest::Approx(kPi / 2));
    CHECK(a.q2 == doctest::Approx(kPi / 2));
    CHECK(b.q1 == doctest::Approx(-kPi / 2));
    CHECK(std::abs(wrap_diff(b.q2, 3 * kPi / 2)) <= 1e-12);
    CHECK((forward(a) - kAxisY).norm() <= 1e-12);
    CHECK((forward(b) - kAxisY).norm() <= 1e-12);
  }
}

TEST_CASE("gravity_align rejects non-unit input") {
  CHECK_THROWS_AS(gravity_align(Vec3(0, 0, 2)), Error);
  CHECK_THROWS_AS(gravity_align(Vec3(0, 0, 1 + 1e-6)), Error);
}

TEST_CASE("IK soundness and round trip on random directions") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> g(0, 1);
  for (int i = 0; i < 10000; ++i) {
    const Vec3 a = Vec3(g(rng), g(rng), g(rng)).normalized();
    const auto [s1, s2] = gravity_align(a);
    CHECK((forward(s1) - a).norm() <= 1e-9);
    CHECK((forward(s2) - a).norm() <= 1e-9);
    CHECK(alignment_residual(s1, a) <= 1e-9);
    CHECK((base_orientation(s1) * a - kAxisZ).norm() <= 1e-9);
    CHECK((base_orientation(s2) * a - kAxisZ).norm() <= 1e-9);
    CHECK(s2.q1 <= 0.0);
  }
}

TEST_CASE("select_solution prefers negative q1 and unwraps q2") {
  const PositionerSolutions sol{{deg2rad(30), deg2rad(10)}, {deg2rad(-30), deg2rad(190)}};
  const auto q = select_solution(sol, BranchPolicy::NegativeQ1, deg2rad(185));
  CHECK(rad2deg(q.q1) == doctest::Approx(-30));
  CHECK(rad2deg(q.q2) == doctest::Approx(190));
  const auto p = select_solution(sol, BranchPolicy::PositiveQ1, deg2rad(185));
  CHECK(rad2deg(p.q1) == doctest::Approx(30));
  CHECK(rad2deg(p.q2) == doctest::Approx(10));
}

TEST_CASE("select_solution falls back past the joint limit") {
  const PositionerSolutions sol{{deg2rad(80), 0.0}, {deg2rad(-100), kPi}};
  CHECK(rad2deg(select_solution(sol).q1) == doctest::Approx(80));
  const PositionerSolutions none{{deg2rad(100), 0.0}, {deg2rad(-100), kPi}};
  try {
    select_solution(none);
    FAIL("expected JointLimit");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::JointLimit);
  }
}

TEST_CASE("selected q2 is continuous along a smooth arc") {
  std::optional<double> prev;
  double worst = 0;
  for (int i = 0; i <= 720; ++i) {
    const double th = deg2rad(i);  // two turns around a tilted cone
    const Vec3 a(std::sin(deg2rad(40)) * std::cos(th), std::sin(deg2rad(40)) * std::sin(th), std::cos(deg2rad(40)));
    const auto q = select_solution(gravity_align(a), BranchPolicy::NegativeQ1, prev);
    if (prev) worst = std::max(worst, std::abs(q.q2 - *prev));
    prev = q.q2;
  }
  CHECK(worst <= deg2rad(10));
}

TEST_CASE("all-vertical trajectory holds its first q2") {
  auto t = from_states(std::vector<PositionerState>(20, PositionerState{0.0, 0.0}));
  for (std::size_t i = 0; i < t.size(); ++i) t.states[i].q2 = 0.1 * i;  // indeterminate values
  const auto held = handle_singularity(t);
  for (std::size_t i = 0; i < held.size(); ++i) {
    CHECK(held.states[i].q2 == t.states[0].q2);
    CHECK(held.singular_flags[i]);
  }
}

TEST_CASE("dip into the singular band holds the pre-entry q2") {
  std::vector<PositionerState> s;
  for (int i = 0; i < 15; ++i) {
    const bool dip = i >= 5 && i < 10;
    s.push_back({dip ? deg2rad(1.0) : deg2rad(20.0), deg2rad(3.0 * i)});
  }
  const auto held = handle_singularity(from_states(s), deg2rad(3));
  for (int i = 5; i < 10; ++i) {
    CHECK(held.states[i].q2 == s[4].q2);
    CHECK(held.singular_flags[i]);
  }
  CHECK_FALSE(held.singular_flags[4]);
  CHECK(held.states[10].q2 == s[10].q2);
}

TEST_CASE("leaving a hold resumes on the nearest turn") {
  // Heading spins 40 deg per state while near the pole: 440 deg under the hold.
  std::vector<PositionerState> s;
  for (int i = 0; i < 20; ++i) {
    const bool pole = i >= 3 && i < 14;
    s.push_back({pole ? deg2rad(1.0) : deg2rad(20.0), deg2rad(40.0 * i)});
  }
  const auto held = handle_singularity(from_states(s), deg2rad(3));
  CHECK(std::abs(held.states[14].q2 - held.states[13].q2) <= kPi + 1e-12);
  const double turns = (held.states[14].q2 - s[14].q2) / (2 * kPi);
  CHECK(std::abs(turns - std::round(turns)) <= 1e-12);
  for (int i = 15; i < 20; ++i) CHECK(held.states[i].q2 - held.states[i - 1].q2 == doctest::Approx(deg2rad(40.0)));
}

TEST_CASE("cone to cylinder transition stays smooth") {
  // Cone flaring outwards, then straight wall.
  std::vector<ProfilePoint> profile;
  for (double z = 0; z <= 20.0 + 1e-9; z += 0.5) profile.push_back({30.0 - 0.5 * z, z});
  for (double z = 20.5; z <= 40.0 + 1e-9; z += 0.5) profile.push_back({20.0, z});
  const SlicePlan plan = slice_axisymmetric(profile, 1.0, 0.5);
  PositionerTrajectory t;
  std::optional<double> prev;
  for (const auto& layer : plan.layers)
    for (const auto& lp : layer.segments.front()) {
      const auto q = select_solution(gravity_align(lp.a.normalized()), BranchPolicy::NegativeQ1, prev);
      t.states.push_back(q);
      prev = q.q2;
    }
  t.singular_flags.assign(t.size(), false);
  const auto held = handle_singularity(t);
  CHECK(max_step_q2(held) <= deg2rad(15));
  const auto smooth = smooth_trajectory(held);
  CHECK(max_step_q2(smooth) <= max_step_q2(held) + 1e-12);
}

TEST_CASE("smoothing leaves constants and unflagged trajectories alone") {
  auto c = from_states(std::vector<PositionerState>(30, PositionerState{0.01, 1.5}));
  c = handle_singularity(c);
  const auto sc = smooth_trajectory(c);
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(sc.states[i].q1 == doctest::Approx(c.states[i].q1));
    CHECK(sc.states[i].q2 == doctest::Approx(c.states[i].q2));
  }
  std::vector<PositionerState> ramp;
  for (int i = 0; i < 30; ++i) ramp.push_back({0.5 + 0.01 * i * i, 0.2 * i * i});
  const auto r = from_states(ramp);
  const auto sr = smooth_trajectory(r);
  for (std::size_t i = 0; i < r.size(); ++i) {
    CHECK(sr.states[i].q1 == r.states[i].q1);
    CHECK(sr.states[i].q2 == r.states[i].q2);
  }
}

TEST_CASE("a q2 spike in a flagged region is attenuated") {
  auto t = from_states(std::vector<PositionerState>(41, PositionerState{0.0, 0.0}));
  for (std::size_t i = 0; i < t.size(); ++i) t.singular_flags[i] = true;
  t.states[20].q2 = deg2rad(10);
  const auto s = smooth_trajectory(t, 5);
  for (const auto& st : s.states) CHECK(rad2deg(st.q2) <= 2.0 + 1e-12);
  CHECK(rad2deg(s.states[20].q2) == doctest::Approx(2.0));
}

TEST_CASE("smoothing rejects bad windows") {
  auto t = from_states(std::vector<PositionerState>(5));
  CHECK_THROWS_AS(smooth_trajectory(t, 4), Error);
  CHECK_THROWS_AS(smooth_trajectory(t, 1), Error);
}

TEST_CASE("smoothing never increases the largest q2 step") {
  std::mt19937_64 rng(29);
  std::normal_distribution<double> g(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    // Random walk on the sphere passing near the pole.
    Vec3 a = Vec3(g(rng), g(rng), 3 + g(rng)).normalized();
    PositionerTrajectory t;
    std::optional<double> prev;
    for (int i = 0; i < 200; ++i) {
      a = (a + 0.05 * Vec3(g(rng), g(rng), g(rng))).normalized();
      if (a.z() < 0.2) a = Vec3(a.x(), a.y(), 0.2).normalized();
      const auto q = select_solution(gravity_align(a), BranchPolicy::NegativeQ1, prev);
      t.states.push_back(q);
      prev = q.q2;
    }
    t.singular_flags.assign(t.size(), false);
    const auto held = handle_singularity(t, deg2rad(10));
    const double before = max_step_q2(held);
    const auto after = smooth_trajectory(held);
    CHECK(max_step_q2(after) <= before + 1e-12);
  }
}

TEST_CASE("unwrap_near") {
  CHECK(unwrap_near(0.1, 2 * kPi) == doctest::Approx(0.1 + 2 * kPi));
  CHECK(unwrap_near(-3.0, 3.0) == doctest::Approx(-3.0 + 2 * kPi));
  CHECK(unwrap_near(1.0, 1.2) == 1.0);
}
