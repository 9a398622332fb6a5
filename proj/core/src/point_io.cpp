#include <fstream>
#include <iterator>
#include <sstream>

#include "waam/cloud.hpp"
#include "waam/error.hpp"
#include "waam/plan_io.hpp"

namespace waam {

std::string cloud_to_ply(const PointCloud& cloud) {
  const bool normals = cloud.has_normals();
  std::string out = "ply\nformat ascii 1.0\nelement vertex " + std::to_string(cloud.size()) +
                    "\nproperty double x\nproperty double y\nproperty double z\n";
  if (normals) out += "property double nx\nproperty double ny\nproperty double nz\n";
  out += "end_header\n";
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& p = cloud.points[i];
    out += format_number(p.x()) + ' ' + format_number(p.y()) + ' ' + format_number(p.z());
    if (normals) {
      const auto& n = cloud.normals[i];
      out += ' ' + format_number(n.x()) + ' ' + format_number(n.y()) + ' ' + format_number(n.z());
    }
    out += '\n';
  }
  return out;
}

namespace {

PointCloud parse_ply(std::istringstream& in) {
  std::string line;
  std::size_t count = 0;
  std::vector<std::string> props;
  bool in_vertex = false;
  bool header_done = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "format") {
      std::string fmt;
      ls >> fmt;
      require(fmt == "ascii", ErrorCode::Unsupported, "PLY: only ASCII format is supported");
    } else if (word == "element") {
      std::string name;
      ls >> name;
      in_vertex = name == "vertex";
      if (in_vertex) ls >> count;
    } else if (word == "property" && in_vertex) {
      std::string type, name;
      ls >> type >> name;
      props.push_back(name);
    } else if (word == "end_header") {
      header_done = true;
      break;
    }
  }
  require(header_done, ErrorCode::MalformedInput, "PLY: missing end_header");
  auto find = [&](const std::string& name) -> int {
    for (std::size_t i = 0; i < props.size(); ++i) {
      if (props[i] == name) return static_cast<int>(i);
    }
    return -1;
  };
  const int ix = find("x"), iy = find("y"), iz = find("z");
  const int inx = find("nx"), iny = find("ny"), inz = find("nz");
  require(ix >= 0 && iy >= 0 && iz >= 0, ErrorCode::MalformedInput,
          "PLY: vertex element lacks x/y/z");
  const bool normals = inx >= 0 && iny >= 0 && inz >= 0;

  PointCloud cloud;
  std::vector<double> values(props.size());
  for (std::size_t i = 0; i < count; ++i) {
    require(static_cast<bool>(std::getline(in, line)), ErrorCode::MalformedInput,
            "PLY: expected " + std::to_string(count) + " vertices, got " + std::to_string(i));
    std::istringstream ls(line);
    for (auto& v : values) {
      require(static_cast<bool>(ls >> v), ErrorCode::MalformedInput,
              "PLY: short vertex row " + std::to_string(i));
    }
    cloud.points.emplace_back(values[ix], values[iy], values[iz]);
    if (normals) cloud.normals.emplace_back(values[inx], values[iny], values[inz]);
  }
  return cloud;
}

}  // namespace

PointCloud parse_cloud(std::string_view text) {
  std::istringstream in{std::string(text)};
  if (text.substr(0, 3) == "ply") return parse_ply(in);

  PointCloud cloud;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    double x, y, z;
    require(static_cast<bool>(ls >> x >> y >> z), ErrorCode::MalformedInput,
            "XYZ: row " + std::to_string(row) + " does not hold three numbers");
    cloud.points.emplace_back(x, y, z);
  }
  return cloud;
}

PointCloud read_cloud(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::Io, "cannot open point cloud " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_cloud(text);
}

void write_cloud(const PointCloud& cloud, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::Io, "cannot write " + path.string());
  out << cloud_to_ply(cloud);
}

}  // namespace waam
