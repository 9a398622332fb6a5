#include "waam/stl.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <unordered_map>
#include <vector>

#include "waam/error.hpp"

namespace waam {

namespace {

static_assert(std::endian::native == std::endian::little,
              "binary STL reader assumes a little-endian host");

struct CellKey {
  std::int64_t x, y, z;
  bool operator==(const CellKey&) const = default;
};

struct CellKeyHash {
  std::size_t operator()(const CellKey& k) const noexcept {
    std::size_t h = std::hash<std::int64_t>{}(k.x);
    h ^= std::hash<std::int64_t>{}(k.y) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= std::hash<std::int64_t>{}(k.z) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }
};

// Welds raw facet corners into an indexed mesh.
class VertexWelder {
 public:
  explicit VertexWelder(TriMesh& mesh) : mesh_(mesh) {}

  std::uint32_t add(const Point3& p) {
    const CellKey key = cell(p);
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        for (std::int64_t dz = -1; dz <= 1; ++dz) {
          auto it = grid_.find({key.x + dx, key.y + dy, key.z + dz});
          if (it == grid_.end()) continue;
          for (auto idx : it->second) {
            if ((mesh_.vertices[idx] - p).norm() <= kVertexMergeTolerance) return idx;
          }
        }
      }
    }
    const auto idx = static_cast<std::uint32_t>(mesh_.vertices.size());
    mesh_.vertices.push_back(p);
    grid_[key].push_back(idx);
    return idx;
  }

  void add_facet(const std::array<Point3, 3>& corners) {
    std::array<std::uint32_t, 3> f{add(corners[0]), add(corners[1]), add(corners[2])};
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) return;
    const double area = 0.5 * (corners[1] - corners[0]).cross(corners[2] - corners[0]).norm();
    if (area <= kMinTriangleArea) return;
    mesh_.faces.push_back(f);
  }

 private:
  static CellKey cell(const Point3& p) {
    return {std::llround(p.x() / kVertexMergeTolerance), std::llround(p.y() / kVertexMergeTolerance),
            std::llround(p.z() / kVertexMergeTolerance)};
  }

  TriMesh& mesh_;
  std::unordered_map<CellKey, std::vector<std::uint32_t>, CellKeyHash> grid_;
};

bool starts_with_solid(std::string_view bytes) {
  std::size_t i = 0;
  while (i < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[i]))) ++i;
  return bytes.substr(i, 5) == "solid";
}

float read_f32(const char* p) {
  float v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

void parse_binary(std::string_view bytes, TriMesh& mesh) {
  std::uint32_t count;
  std::memcpy(&count, bytes.data() + 80, sizeof count);
  VertexWelder welder(mesh);
  for (std::uint32_t i = 0; i < count; ++i) {
    const char* rec = bytes.data() + 84 + 50 * static_cast<std::size_t>(i);
    std::array<Point3, 3> corners;
    for (int c = 0; c < 3; ++c) {
      const char* v = rec + 12 + 12 * c;
      corners[c] = Point3(read_f32(v), read_f32(v + 4), read_f32(v + 8));
    }
    welder.add_facet(corners);
  }
}

void parse_ascii(std::string_view bytes, TriMesh& mesh) {
  std::istringstream in{std::string(bytes)};
  std::string tok;
  in >> tok;  // "solid"
  std::string header;
  std::getline(in, header);
  if (mesh.name.empty()) {
    const auto first = header.find_first_not_of(" \t\r");
    if (first != std::string::npos) {
      mesh.name = header.substr(first, header.find_last_not_of(" \t\r") - first + 1);
    }
  }

  VertexWelder welder(mesh);
  std::size_t facets = 0;
  bool ended = false;
  auto expect = [&](std::string_view word) {
    if (!(in >> tok) || tok != word) {
      fail(ErrorCode::MalformedInput, "ASCII STL: expected '" + std::string(word) + "' in facet " +
                                          std::to_string(facets) + ", got '" + tok + "'");
    }
  };
  while (in >> tok) {
    if (tok == "endsolid") {
      ended = true;
      break;
    }
    if (tok != "facet") {
      fail(ErrorCode::MalformedInput, "ASCII STL: unexpected token '" + tok + "'");
    }
    expect("normal");
    double nx, ny, nz;
    if (!(in >> nx >> ny >> nz)) fail(ErrorCode::MalformedInput, "ASCII STL: bad facet normal");
    expect("outer");
    expect("loop");
    std::array<Point3, 3> corners;
    for (auto& c : corners) {
      expect("vertex");
      double x, y, z;
      if (!(in >> x >> y >> z)) fail(ErrorCode::MalformedInput, "ASCII STL: bad vertex");
      c = Point3(x, y, z);
    }
    expect("endloop");
    expect("endfacet");
    welder.add_facet(corners);
    ++facets;
  }
  require(ended, ErrorCode::MalformedInput, "ASCII STL: missing 'endsolid'");
  require(facets > 0, ErrorCode::MalformedInput, "ASCII STL: no facets");
}

void append_f32(std::string& out, float v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.append(buf, 4);
}

}  // namespace

TriMesh parse_stl(std::string_view bytes, std::string name) {
  TriMesh mesh;
  mesh.name = std::move(name);
  require(!bytes.empty(), ErrorCode::MalformedInput, "STL: empty input");

  bool binary = false;
  if (bytes.size() >= 84) {
    std::uint32_t count;
    std::memcpy(&count, bytes.data() + 80, sizeof count);
    binary = bytes.size() == 84 + 50 * static_cast<std::uint64_t>(count);
  }
  if (binary) {
    parse_binary(bytes, mesh);
  } else if (starts_with_solid(bytes)) {
    parse_ascii(bytes, mesh);
  } else {
    fail(ErrorCode::MalformedInput, "STL: neither a binary record layout nor an ASCII 'solid'");
  }
  require(!mesh.faces.empty(), ErrorCode::Degenerate, "STL: every facet is degenerate");
  mesh.validate();
  return mesh;
}

TriMesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::Io, "cannot open mesh file " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_stl(bytes, path.stem().string());
}

std::string stl_binary(const TriMesh& mesh) {
  std::string out(80, '\0');
  const std::string head = "binary STL " + mesh.name;
  out.replace(0, std::min<std::size_t>(head.size(), 80), head.substr(0, 80));
  const auto count = static_cast<std::uint32_t>(mesh.faces.size());
  char buf[4];
  std::memcpy(buf, &count, 4);
  out.append(buf, 4);
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const Vec3 n = mesh.face_normal(f);
    for (int k = 0; k < 3; ++k) append_f32(out, static_cast<float>(n[k]));
    for (auto v : mesh.faces[f]) {
      for (int k = 0; k < 3; ++k) append_f32(out, static_cast<float>(mesh.vertices[v][k]));
    }
    out.append(2, '\0');
  }
  return out;
}

std::string stl_ascii(const TriMesh& mesh) {
  std::ostringstream out;
  out.precision(9);
  const std::string name = mesh.name.empty() ? "mesh" : mesh.name;
  out << "solid " << name << "\n";
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const Vec3 n = mesh.face_normal(f);
    out << "  facet normal " << n.x() << ' ' << n.y() << ' ' << n.z() << "\n    outer loop\n";
    for (auto v : mesh.faces[f]) {
      const Point3& p = mesh.vertices[v];
      out << "      vertex " << p.x() << ' ' << p.y() << ' ' << p.z() << "\n";
    }
    out << "    endloop\n  endfacet\n";
  }
  out << "endsolid " << name << "\n";
  return out.str();
}

void write_stl(const TriMesh& mesh, const std::filesystem::path& path, bool binary) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::Io, "cannot write " + path.string());
  const std::string bytes = binary ? stl_binary(mesh) : stl_ascii(mesh);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace waam
