#pragma once

#include <cmath>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace waam {

// Positions are millimetres; directions are dimensionless unit vectors.
using Point3 = Eigen::Vector3d;
using Vec3 = Eigen::Vector3d;
using Point2 = Eigen::Vector2d;
using Rotation3 = Eigen::Matrix3d;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kUnitTolerance = 1e-9;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

inline const Vec3 kAxisX{1.0, 0.0, 0.0};
inline const Vec3 kAxisY{0.0, 1.0, 0.0};
inline const Vec3 kAxisZ{0.0, 0.0, 1.0};

inline bool is_unit(const Vec3& v, double tol = kUnitTolerance) {
  return std::abs(v.norm() - 1.0) <= tol;
}

/// Rotation about unit `axis` by `angle` radians, exp(axis^ * angle).
inline Rotation3 axis_rotation(const Vec3& axis, double angle) {
  Rotation3 k;
  k << 0.0, -axis.z(), axis.y(),
       axis.z(), 0.0, -axis.x(),
       -axis.y(), axis.x(), 0.0;
  return Rotation3::Identity() + std::sin(angle) * k + (1.0 - std::cos(angle)) * (k * k);
}

inline bool is_rotation(const Rotation3& r, double tol = kUnitTolerance) {
  return (r.transpose() * r - Rotation3::Identity()).cwiseAbs().maxCoeff() <= tol &&
         std::abs(r.determinant() - 1.0) <= tol;
}

/// Any unit vector orthogonal to `n`.
inline Vec3 any_orthogonal(const Vec3& n) {
  const Vec3 helper = std::abs(n.x()) < 0.9 ? kAxisX : kAxisY;
  return n.cross(helper).normalized();
}

}  // namespace waam
