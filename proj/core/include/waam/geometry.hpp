#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "waam/kdtree.hpp"
#include "waam/mesh.hpp"
#include "waam/types.hpp"

namespace waam {

inline constexpr std::size_t kDefaultNeighbours = 50;
inline constexpr double kHullTolerance = 1e-9;  // mm

struct Plane {
  Point3 centroid;
  Vec3 normal;  // unit

  double signed_distance(const Point3& p) const { return normal.dot(p - centroid); }
  Point3 project(const Point3& p) const { return p - signed_distance(p) * normal; }
};

/// Least-squares plane through `points`. The normal is the direction of least
/// variance, signed to agree with `reference` when one is given (and non-zero),
/// otherwise to have positive z (then positive x, then positive y).
/// Throws Degenerate for collinear or coincident input.
Plane fit_plane(std::span<const Point3> points, std::optional<Vec3> reference = std::nullopt);

using Polygon2 = std::vector<Point2>;

/// Counter-clockwise convex hull (Andrew's monotone chain) without
/// collinear vertices. Throws Degenerate when the input spans no area.
Polygon2 convex_hull_2d(std::span<const Point2> points);

/// Point-in-convex-polygon; points within `tol` of the boundary count as inside.
bool contains(const Polygon2& ccw_hull, const Point2& q, double tol = kHullTolerance);

/// Indices of the n mesh vertices closest to p, nearest first, ties to the
/// lower index. Builds a throwaway index; use SurfaceProjector for repeated queries.
std::vector<std::size_t> k_nearest_vertices(const TriMesh& mesh, const Point3& p, std::size_t n);

/// Projection onto a triangulated surface by local plane fit.
///
/// For a query p the n nearest mesh vertices are fitted with a plane (normal
/// oriented by the mean vertex normal), p is orthogonally projected onto that
/// plane, and the projection is accepted only if it falls inside the convex
/// hull of the neighbours expressed in the plane's own 2-d coordinates.
class SurfaceProjector {
 public:
  struct Hit {
    Point3 point;
    Vec3 normal;
  };

  explicit SurfaceProjector(const TriMesh& mesh, std::size_t neighbours = kDefaultNeighbours);

  std::optional<Hit> project(const Point3& p) const;
  std::vector<std::size_t> nearest_vertices(const Point3& p, std::size_t n) const;

  const TriMesh& mesh() const noexcept { return mesh_; }
  const std::vector<Vec3>& vertex_normals() const noexcept { return vertex_normals_; }
  std::size_t neighbours() const noexcept { return neighbours_; }

 private:
  TriMesh mesh_;
  std::vector<Vec3> vertex_normals_;
  KdTree3 index_;
  std::size_t neighbours_;
};

std::optional<Point3> project_to_surface(const TriMesh& mesh, const Point3& p,
                                         std::size_t n = kDefaultNeighbours);

}  // namespace waam
