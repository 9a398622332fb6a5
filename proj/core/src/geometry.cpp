#include "waam/geometry.hpp"

#include <algorithm>
#include <string>

#include <Eigen/Eigenvalues>

#include "waam/error.hpp"

namespace waam {

namespace {

constexpr double kSingularGap = 1e-10;  // relative to the largest variance

double cross2(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

Vec3 orient_by_axes(Vec3 n) {
  for (int axis : {2, 0, 1}) {
    if (n[axis] > 0.0) return n;
    if (n[axis] < 0.0) return -n;
  }
  return n;
}

}  // namespace

Plane fit_plane(std::span<const Point3> points, std::optional<Vec3> reference) {
  require(points.size() >= 3, ErrorCode::Degenerate, "plane fit needs at least 3 points");

  Point3 centroid = Point3::Zero();
  for (const auto& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : points) {
    const Vec3 d = p - centroid;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  // Eigenvalues ascend. The normal is undetermined when the two smallest
  // variances coincide or the in-plane spread collapses onto a line.
  const Eigen::Vector3d values = eig.eigenvalues().cwiseMax(0.0);
  const double tol = kSingularGap * values[2];
  require(values[2] > 0.0 && values[1] > tol && values[1] - values[0] > tol, ErrorCode::Degenerate,
          "points are collinear or coincident; plane normal is undetermined");

  Vec3 normal = eig.eigenvectors().col(0).normalized();
  if (reference && reference->norm() > 1e-12) {
    if (normal.dot(*reference) < 0.0) normal = -normal;
  } else {
    normal = orient_by_axes(normal);
  }
  return {centroid, normal};
}

Polygon2 convex_hull_2d(std::span<const Point2> points) {
  require(points.size() >= 3, ErrorCode::Degenerate, "convex hull needs at least 3 points");
  std::vector<Point2> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });

  Polygon2 hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross2(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross2(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);

  double twice_area = 0.0;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const auto& a = hull[i];
    const auto& b = hull[(i + 1) % hull.size()];
    twice_area += a.x() * b.y() - b.x() * a.y();
  }
  require(hull.size() >= 3 && twice_area > 0.0, ErrorCode::Degenerate,
          "convex hull of collinear points is degenerate");
  return hull;
}

bool contains(const Polygon2& hull, const Point2& q, double tol) {
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Point2& a = hull[i];
    const Point2& b = hull[(i + 1) % hull.size()];
    const double len = (b - a).norm();
    if (len == 0.0) continue;
    // Signed distance of q to the edge line, positive on the interior side.
    if (cross2(a, b, q) / len < -tol) return false;
  }
  return true;
}

std::vector<std::size_t> k_nearest_vertices(const TriMesh& mesh, const Point3& p, std::size_t n) {
  require(n <= mesh.vertices.size(), ErrorCode::InvalidArgument,
          "n = " + std::to_string(n) + " exceeds vertex count " +
              std::to_string(mesh.vertices.size()));
  return KdTree3(mesh.vertices).knn(p, n);
}

SurfaceProjector::SurfaceProjector(const TriMesh& mesh, std::size_t neighbours)
    : mesh_(mesh),
      vertex_normals_(mesh.vertex_normals()),
      index_(mesh.vertices),
      neighbours_(neighbours) {
  require(neighbours_ >= 3, ErrorCode::InvalidArgument, "projection needs n >= 3 neighbours");
  require(neighbours_ <= mesh_.vertices.size(), ErrorCode::InvalidArgument,
          "n = " + std::to_string(neighbours_) + " exceeds vertex count " +
              std::to_string(mesh_.vertices.size()));
}

std::vector<std::size_t> SurfaceProjector::nearest_vertices(const Point3& p, std::size_t n) const {
  return index_.knn(p, n);
}

std::optional<SurfaceProjector::Hit> SurfaceProjector::project(const Point3& p) const {
  const auto ids = index_.knn(p, neighbours_);
  std::vector<Point3> local;
  local.reserve(ids.size());
  Vec3 mean_normal = Vec3::Zero();
  for (auto id : ids) {
    local.push_back(mesh_.vertices[id]);
    mean_normal += vertex_normals_[id];
  }
  const Plane plane = fit_plane(local, mean_normal);
  const Point3 projected = plane.project(p);

  const Vec3 u = any_orthogonal(plane.normal);
  const Vec3 v = plane.normal.cross(u);
  auto to_plane = [&](const Point3& x) {
    const Vec3 d = x - plane.centroid;
    return Point2(d.dot(u), d.dot(v));
  };
  std::vector<Point2> flat;
  flat.reserve(local.size());
  for (const auto& x : local) flat.push_back(to_plane(x));
  const Polygon2 hull = convex_hull_2d(flat);
  if (!contains(hull, to_plane(projected))) return std::nullopt;
  return Hit{projected, plane.normal};
}

std::optional<Point3> project_to_surface(const TriMesh& mesh, const Point3& p, std::size_t n) {
  const SurfaceProjector projector(mesh, n);
  auto hit = projector.project(p);
  if (!hit) return std::nullopt;
  return hit->point;
}

}  // namespace waam
