#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "waam/types.hpp"

namespace waam {

inline const double kQ1Limit = deg2rad(95.0);
inline const double kDefaultSingularThreshold = deg2rad(3.0);
inline constexpr std::size_t kDefaultSmoothingWindow = 5;

/// Two-axis positioner joints in radians. q2 is continuous (never wrapped).
struct PositionerState {
  double q1 = 0.0;
  double q2 = 0.0;
};

struct PositionerTrajectory {
  std::vector<PositionerState> states;
  std::vector<bool> singular_flags;  // one per state

  std::size_t size() const noexcept { return states.size(); }
};

/// The two inverse solutions; `second` is always the non-positive-q1 branch.
using PositionerSolutions = std::pair<PositionerState, PositionerState>;

enum class BranchPolicy {
  NegativeQ1,  // keeps the tilt away from the monitoring camera
  PositiveQ1,
};

/// Plate orientation in the world frame, R(-y, q1) R(-z, q2).
Rotation3 base_orientation(const PositionerState& q);

/// Both joint solutions that rotate the part-frame direction `a` onto world +z.
/// Throws InvalidArgument unless ||a|| = 1 within 1e-9.
PositionerSolutions gravity_align(const Vec3& a);

/// Residual ||R(z,q2) R(y,q1) z - a||.
double alignment_residual(const PositionerState& q, const Vec3& a);

/// Picks a branch by policy, falling back to the other one when the preferred
/// branch violates the q1 limit, then unwraps q2 to lie nearest `previous_q2`.
/// Throws JointLimit when neither branch is reachable.
PositionerState select_solution(const PositionerSolutions& solutions,
                                BranchPolicy policy = BranchPolicy::NegativeQ1,
                                std::optional<double> previous_q2 = std::nullopt,
                                double q1_limit = kQ1Limit);

/// Holds q2 at its last value before |q1| dropped below the threshold and
/// flags the held states. A trajectory that starts singular holds its first q2.
/// After a hold, the remaining q2 values shift by whole turns so that motion
/// resumes within half a turn of the held angle.
PositionerTrajectory handle_singularity(const PositionerTrajectory& trajectory,
                                        double q1_threshold = kDefaultSingularThreshold);

/// Centred moving average over q1 and q2 restricted to zones within
/// 2 x window states of a singular flag. Windows shrink symmetrically at zone
/// ends, so zone boundaries are left in place. Throws JointLimit if the
/// smoothed q1 leaves the limits.
PositionerTrajectory smooth_trajectory(const PositionerTrajectory& trajectory,
                                       std::size_t window = kDefaultSmoothingWindow,
                                       double q1_limit = kQ1Limit);

/// Returns `q2` shifted by a multiple of 2 pi to be nearest `reference`.
double unwrap_near(double q2, double reference);

}  // namespace waam
