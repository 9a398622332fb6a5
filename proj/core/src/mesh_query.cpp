#include "waam/mesh_query.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "waam/error.hpp"

namespace waam {

Point3 closest_point_on_triangle(const Point3& p, const Point3& a, const Point3& b, const Point3& c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
  }
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

MeshQuery::MeshQuery(const TriMesh& mesh) : mesh_(mesh) {
  require(!mesh_.faces.empty(), ErrorCode::InvalidArgument, "mesh query needs at least one face");
  normals_.reserve(mesh_.faces.size());
  centroids_.reserve(mesh_.faces.size());
  for (std::size_t f = 0; f < mesh_.faces.size(); ++f) {
    normals_.push_back(mesh_.face_normal(f));
    const auto& tri = mesh_.faces[f];
    centroids_.push_back((mesh_.vertices[tri[0]] + mesh_.vertices[tri[1]] + mesh_.vertices[tri[2]]) / 3.0);
  }
  order_.resize(mesh_.faces.size());
  std::iota(order_.begin(), order_.end(), 0);
  nodes_.reserve(2 * mesh_.faces.size());
  build(0, order_.size());
}

std::size_t MeshQuery::build(std::size_t begin, std::size_t end) {
  const std::size_t id = nodes_.size();
  nodes_.emplace_back();
  Eigen::AlignedBox3d box;
  Eigen::AlignedBox3d centres;
  for (std::size_t i = begin; i < end; ++i) {
    for (const auto v : mesh_.faces[order_[i]]) box.extend(mesh_.vertices[v]);
    centres.extend(centroids_[order_[i]]);
  }
  nodes_[id].box = box;
  nodes_[id].begin = begin;
  nodes_[id].end = end;
  if (end - begin <= 4) return id;

  Eigen::Index axis = 0;
  centres.sizes().maxCoeff(&axis);
  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                   order_.begin() + static_cast<std::ptrdiff_t>(mid),
                   order_.begin() + static_cast<std::ptrdiff_t>(end), [&](std::size_t x, std::size_t y) {
                     const double cx = centroids_[x][axis], cy = centroids_[y][axis];
                     return cx < cy || (cx == cy && x < y);
                   });
  const std::size_t left = build(begin, mid);
  const std::size_t right = build(mid, end);
  nodes_[id].leaf = false;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void MeshQuery::search(std::size_t id, const Point3& p, Hit& best, double& best_d2) const {
  const Node& node = nodes_[id];
  if (node.box.squaredExteriorDistance(p) > best_d2) return;
  if (node.leaf) {
    for (std::size_t i = node.begin; i < node.end; ++i) {
      const std::size_t f = order_[i];
      const auto& tri = mesh_.faces[f];
      const Point3 q = closest_point_on_triangle(p, mesh_.vertices[tri[0]], mesh_.vertices[tri[1]],
                                                 mesh_.vertices[tri[2]]);
      const double d2 = (q - p).squaredNorm();
      if (d2 < best_d2 || (d2 == best_d2 && f < best.face)) {
        best_d2 = d2;
        best.point = q;
        best.face = f;
      }
    }
    return;
  }
  const double dl = nodes_[node.left].box.squaredExteriorDistance(p);
  const double dr = nodes_[node.right].box.squaredExteriorDistance(p);
  if (dl <= dr) {
    search(node.left, p, best, best_d2);
    search(node.right, p, best, best_d2);
  } else {
    search(node.right, p, best, best_d2);
    search(node.left, p, best, best_d2);
  }
}

MeshQuery::Hit MeshQuery::closest(const Point3& p) const {
  Hit best;
  best.face = std::numeric_limits<std::size_t>::max();
  double best_d2 = std::numeric_limits<double>::infinity();
  search(0, p, best, best_d2);
  best.distance = std::sqrt(best_d2);
  const double side = normals_[best.face].dot(p - best.point);
  best.signed_distance = side < 0.0 ? -best.distance : best.distance;
  return best;
}

}  // namespace waam
