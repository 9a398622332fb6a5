#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "waam/mesh.hpp"

namespace waam {

inline constexpr double kVertexMergeTolerance = 1e-6;  // mm

// Binary vs ASCII is detected from the byte layout: a buffer whose size is
// exactly 84 + 50 * facet_count is binary, otherwise it must begin with
// "solid". Vertices closer than kVertexMergeTolerance are merged in order of
// first occurrence and zero-area facets are dropped.
TriMesh parse_stl(std::string_view bytes, std::string name = {});
TriMesh load_mesh(const std::filesystem::path& path);

std::string stl_binary(const TriMesh& mesh);
std::string stl_ascii(const TriMesh& mesh);
void write_stl(const TriMesh& mesh, const std::filesystem::path& path, bool binary = true);

}  // namespace waam
