#include "waam/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "waam/error.hpp"

namespace waam::fixtures {

namespace {

std::size_t divisions(double extent, double step) {
  require(extent > 0.0 && step > 0.0, ErrorCode::InvalidArgument, "fixture extents must be positive");
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(extent / step)));
}

// Grid surface over (u, v) in [0,1]^2; `wrap_u` closes the u direction.
TriMesh grid(std::size_t nu, std::size_t nv, bool wrap_u,
             const std::function<Point3(double, double)>& at, const char* name) {
  TriMesh mesh;
  mesh.name = name;
  const std::size_t cols = wrap_u ? nu : nu + 1;
  for (std::size_t j = 0; j <= nv; ++j) {
    for (std::size_t i = 0; i < cols; ++i) {
      mesh.vertices.push_back(at(static_cast<double>(i) / static_cast<double>(nu),
                                 static_cast<double>(j) / static_cast<double>(nv)));
    }
  }
  auto id = [&](std::size_t i, std::size_t j) {
    return static_cast<std::uint32_t>(j * cols + (wrap_u ? i % nu : i));
  };
  for (std::size_t j = 0; j < nv; ++j) {
    for (std::size_t i = 0; i < nu; ++i) {
      mesh.faces.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      mesh.faces.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return mesh;
}

}  // namespace

TriMesh flat_square(double size, double step) {
  const std::size_t n = divisions(size, step);
  return grid(n, n, false,
              [&](double u, double v) { return Point3((u - 0.5) * size, (v - 0.5) * size, 0.0); },
              "flat_square");
}

TriMesh wall(double length, double height, double step) {
  // (u along +x, v along +z) winds with normal -y, so u runs backwards.
  return grid(divisions(length, step), divisions(height, step), false,
              [&](double u, double v) { return Point3((1.0 - u) * length, 0.0, v * height); }, "wall");
}

TriMesh cylinder(double radius, double height, std::size_t segments, double step) {
  require(segments >= 3, ErrorCode::InvalidArgument, "cylinder needs at least 3 segments");
  return grid(segments, divisions(height, step), true,
              [&](double u, double v) {
                const double th = 2.0 * kPi * u;
                return Point3(radius * std::cos(th), radius * std::sin(th), v * height);
              },
              "cylinder");
}

TriMesh sphere_cap(double radius, double lat_lo, double lat_hi, double step) {
  require(lat_hi > lat_lo, ErrorCode::InvalidArgument, "sphere band needs lat_hi > lat_lo");
  const double lo = deg2rad(lat_lo), hi = deg2rad(lat_hi);
  const std::size_t rows = divisions(radius * (hi - lo), step);
  const std::size_t segments = divisions(2.0 * kPi * radius * std::cos(std::min(std::abs(lo), std::abs(hi))), step);
  return grid(segments, rows, true,
              [&](double u, double v) {
                const double th = 2.0 * kPi * u;
                const double phi = lo + v * (hi - lo);
                return Point3(radius * std::cos(phi) * std::cos(th), radius * std::cos(phi) * std::sin(th),
                              radius * std::sin(phi));
              },
              "sphere_cap");
}

TriMesh blade(double chord, double span, double camber, double lean_deg, double twist_deg, double step) {
  const double lean = std::tan(deg2rad(lean_deg));
  const double twist = deg2rad(twist_deg);
  return grid(divisions(chord, step), divisions(span, step), false,
              [&](double u, double v) {
                const double x0 = (0.5 - u) * chord;
                const double y0 = camber * std::sin(kPi * u);
                const double th = twist * v;
                const double z = v * span;
                return Point3(std::cos(th) * x0 - std::sin(th) * y0,
                              std::sin(th) * x0 + std::cos(th) * y0 + lean * z, z);
              },
              "blade");
}

namespace {

std::vector<ProfilePoint> sample_profile(double height, double step, const std::function<double(double)>& r) {
  const std::size_t n = divisions(height, step);
  std::vector<ProfilePoint> out;
  for (std::size_t i = 0; i <= n; ++i) {
    const double z = height * static_cast<double>(i) / static_cast<double>(n);
    out.push_back({r(z), z});
  }
  return out;
}

}  // namespace

std::vector<ProfilePoint> cylinder_profile(double radius, double height, double step) {
  return sample_profile(height, step, [&](double) { return radius; });
}

std::vector<ProfilePoint> cone_profile(double r0, double r1, double height, double step) {
  return sample_profile(height, step, [&](double z) { return r0 + (r1 - r0) * z / height; });
}

std::vector<ProfilePoint> cup_profile(double r0, double r1, double height, double step) {
  return sample_profile(height, step, [&](double z) {
    const double s = z / height;
    return r0 + (r1 - r0) * s * s;
  });
}

}  // namespace waam::fixtures
