#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "waam/types.hpp"

namespace waam {

inline constexpr double kMinTriangleArea = 1e-9;  // mm^2

/// Triangulated surface. Faces index into `vertices`; winding gives the
/// outward normal by the right-hand rule.
struct TriMesh {
  std::vector<Point3> vertices;
  std::vector<std::array<std::uint32_t, 3>> faces;
  std::string name;

  Vec3 face_normal(std::size_t face) const;
  double face_area(std::size_t face) const;
  double area() const;

  /// Area-weighted average of incident face normals.
  std::vector<Vec3> vertex_normals() const;

  /// Throws MalformedInput on out-of-range indices, slivers below
  /// kMinTriangleArea, or edges shared by more than two faces.
  void validate() const;
};

}  // namespace waam
