#include "waam/mesh.hpp"

#include <algorithm>
#include <map>
#include <utility>

#include "waam/error.hpp"

namespace waam {

namespace {

Vec3 face_cross(const TriMesh& mesh, std::size_t face) {
  const auto& f = mesh.faces[face];
  const Point3& a = mesh.vertices[f[0]];
  const Point3& b = mesh.vertices[f[1]];
  const Point3& c = mesh.vertices[f[2]];
  return (b - a).cross(c - a);
}

}  // namespace

Vec3 TriMesh::face_normal(std::size_t face) const {
  const Vec3 c = face_cross(*this, face);
  const double len = c.norm();
  return len > 0.0 ? Vec3(c / len) : Vec3::Zero();
}

double TriMesh::face_area(std::size_t face) const { return 0.5 * face_cross(*this, face).norm(); }

double TriMesh::area() const {
  double total = 0.0;
  for (std::size_t f = 0; f < faces.size(); ++f) total += face_area(f);
  return total;
}

std::vector<Vec3> TriMesh::vertex_normals() const {
  std::vector<Vec3> normals(vertices.size(), Vec3::Zero());
  for (std::size_t f = 0; f < faces.size(); ++f) {
    // The raw cross product is already area weighted.
    const Vec3 c = face_cross(*this, f);
    for (auto v : faces[f]) normals[v] += c;
  }
  for (auto& n : normals) {
    const double len = n.norm();
    if (len > 0.0) n /= len;
  }
  return normals;
}

void TriMesh::validate() const {
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> edge_use;
  for (std::size_t f = 0; f < faces.size(); ++f) {
    for (auto v : faces[f]) {
      require(v < vertices.size(), ErrorCode::MalformedInput,
              "face " + std::to_string(f) + " references vertex " + std::to_string(v) +
                  " beyond vertex count " + std::to_string(vertices.size()));
    }
    require(face_area(f) > kMinTriangleArea, ErrorCode::MalformedInput,
            "face " + std::to_string(f) + " has area below the sliver threshold");
    for (int k = 0; k < 3; ++k) {
      auto a = faces[f][k];
      auto b = faces[f][(k + 1) % 3];
      if (a > b) std::swap(a, b);
      if (++edge_use[{a, b}] > 2) {
        fail(ErrorCode::MalformedInput, "edge (" + std::to_string(a) + ", " + std::to_string(b) +
                                            ") is shared by more than two faces");
      }
    }
  }
}

}  // namespace waam
