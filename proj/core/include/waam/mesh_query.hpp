#pragma once

#include <cstddef>
#include <vector>

#include "waam/mesh.hpp"
#include "waam/types.hpp"

namespace waam {

/// Closest point on triangle abc to p.
Point3 closest_point_on_triangle(const Point3& p, const Point3& a, const Point3& b, const Point3& c);

/// Bounding-volume hierarchy over mesh faces for exact closest-point queries.
class MeshQuery {
 public:
  struct Hit {
    Point3 point;
    std::size_t face = 0;
    double distance = 0.0;
    /// Distance signed by the face normal of the closest face.
    double signed_distance = 0.0;
  };

  explicit MeshQuery(const TriMesh& mesh);

  Hit closest(const Point3& p) const;
  const TriMesh& mesh() const noexcept { return mesh_; }

 private:
  struct Node {
    Eigen::AlignedBox3d box;
    std::size_t begin = 0, end = 0;
    std::size_t left = 0, right = 0;
    bool leaf = true;
  };

  std::size_t build(std::size_t begin, std::size_t end);
  void search(std::size_t node, const Point3& p, Hit& best, double& best_d2) const;

  TriMesh mesh_;
  std::vector<Vec3> normals_;
  std::vector<std::size_t> order_;
  std::vector<Point3> centroids_;
  std::vector<Node> nodes_;
};

}  // namespace waam
