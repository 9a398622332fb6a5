#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "waam/types.hpp"

namespace waam {

struct PointCloud {
  std::vector<Point3> points;
  std::vector<Vec3> normals;  // empty or one per point

  std::size_t size() const noexcept { return points.size(); }
  bool has_normals() const noexcept { return !normals.empty() && normals.size() == points.size(); }
};

/// ASCII PLY with x y z and, when present, nx ny nz vertex properties.
std::string cloud_to_ply(const PointCloud& cloud);

/// Reads ASCII PLY (by magic) or whitespace-separated XYZ text.
PointCloud parse_cloud(std::string_view text);
PointCloud read_cloud(const std::filesystem::path& path);
void write_cloud(const PointCloud& cloud, const std::filesystem::path& path);

}  // namespace waam
