#include "waam/positioner.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "waam/error.hpp"

namespace waam {

namespace {

// atan2(0, 0) is defined as 0 by the C library; the singular pole relies on it.
double safe_atan2(double y, double x) { return (y == 0.0 && x == 0.0) ? 0.0 : std::atan2(y, x); }

bool within_limit(const PositionerState& q, double limit) { return std::abs(q.q1) <= limit; }

}  // namespace

Rotation3 base_orientation(const PositionerState& q) {
  return axis_rotation(-kAxisY, q.q1) * axis_rotation(-kAxisZ, q.q2);
}

PositionerSolutions gravity_align(const Vec3& a) {
  require(is_unit(a), ErrorCode::InvalidArgument, "increment direction must be a unit vector");
  const double tilt = safe_atan2(std::hypot(a.x(), a.y()), a.z());
  const double heading = safe_atan2(a.y(), a.x());
  return {PositionerState{tilt, heading}, PositionerState{-tilt, heading + kPi}};
}

double alignment_residual(const PositionerState& q, const Vec3& a) {
  return (axis_rotation(kAxisZ, q.q2) * axis_rotation(kAxisY, q.q1) * kAxisZ - a).norm();
}

double unwrap_near(double q2, double reference) {
  const double turns = std::round((reference - q2) / (2.0 * kPi));
  return q2 + turns * 2.0 * kPi;
}

PositionerState select_solution(const PositionerSolutions& solutions, BranchPolicy policy,
                                std::optional<double> previous_q2, double q1_limit) {
  const PositionerState& preferred =
      policy == BranchPolicy::NegativeQ1 ? solutions.second : solutions.first;
  const PositionerState& fallback =
      policy == BranchPolicy::NegativeQ1 ? solutions.first : solutions.second;

  PositionerState chosen;
  if (within_limit(preferred, q1_limit)) {
    chosen = preferred;
  } else if (within_limit(fallback, q1_limit)) {
    chosen = fallback;
  } else {
    fail(ErrorCode::JointLimit, "both positioner branches exceed |q1| <= " +
                                    std::to_string(rad2deg(q1_limit)) + " deg");
  }
  if (previous_q2) chosen.q2 = unwrap_near(chosen.q2, *previous_q2);
  return chosen;
}

PositionerTrajectory handle_singularity(const PositionerTrajectory& trajectory,
                                        double q1_threshold) {
  require(q1_threshold > 0.0, ErrorCode::InvalidArgument, "singularity threshold must be > 0");
  PositionerTrajectory out = trajectory;
  out.singular_flags.assign(out.states.size(), false);
  if (out.states.empty()) return out;

  double held = out.states.front().q2;
  double shift = 0.0;  // whole turns added to everything after a hold
  bool holding = false;
  for (std::size_t i = 0; i < out.states.size(); ++i) {
    auto& s = out.states[i];
    if (std::abs(s.q1) < q1_threshold) {
      s.q2 = held;
      out.singular_flags[i] = true;
      holding = true;
      continue;
    }
    s.q2 += shift;
    if (holding) {
      // The heading may have turned several times under the hold; resume on
      // the equivalent angle nearest the held one.
      const double resumed = unwrap_near(s.q2, held);
      shift += resumed - s.q2;
      s.q2 = resumed;
      holding = false;
    }
    held = s.q2;
  }
  return out;
}

PositionerTrajectory smooth_trajectory(const PositionerTrajectory& trajectory, std::size_t window,
                                       double q1_limit) {
  require(window >= 3 && window % 2 == 1, ErrorCode::InvalidArgument,
          "smoothing window must be odd and >= 3");
  const std::size_t n = trajectory.states.size();
  require(trajectory.singular_flags.size() == n, ErrorCode::InvalidArgument,
          "trajectory flags do not match its states");

  std::vector<bool> zone(n, false);
  const std::size_t reach = 2 * window;
  for (std::size_t i = 0; i < n; ++i) {
    if (!trajectory.singular_flags[i]) continue;
    const std::size_t lo = i >= reach ? i - reach : 0;
    const std::size_t hi = std::min(n - 1, i + reach);
    for (std::size_t k = lo; k <= hi; ++k) zone[k] = true;
  }

  PositionerTrajectory out = trajectory;
  const std::size_t half = window / 2;
  std::size_t i = 0;
  while (i < n) {
    if (!zone[i]) {
      ++i;
      continue;
    }
    std::size_t end = i;
    while (end < n && zone[end]) ++end;
    // Zone [i, end): average using only samples inside the zone.
    for (std::size_t k = i; k < end; ++k) {
      const std::size_t w = std::min({half, k - i, end - 1 - k});
      double q1 = 0.0, q2 = 0.0;
      for (std::size_t m = k - w; m <= k + w; ++m) {
        q1 += trajectory.states[m].q1;
        q2 += trajectory.states[m].q2;
      }
      const double count = static_cast<double>(2 * w + 1);
      out.states[k].q1 = q1 / count;
      out.states[k].q2 = q2 / count;
      require(std::abs(out.states[k].q1) <= q1_limit, ErrorCode::JointLimit,
              "smoothed q1 exceeds joint limit at state " + std::to_string(k));
    }
    i = end;
  }
  return out;
}

}  // namespace waam
