#include "waam/material.hpp"

#include <fstream>
#include <iterator>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "waam/error.hpp"

namespace waam {

std::string_view builtin_material_ini() {
  return R"([aluminum]
wire = ER4043
wire_diameter_mm = 1.2
torch_speed_mm_s = 9
feed_rate_ipm = 110
layer_height_mm = 1.05

[steel]
wire = ER70S-6
wire_diameter_mm = 0.9
torch_speed_mm_s = 8
feed_rate_ipm = 100
layer_height_mm = 0.85

[stainless]
wire = ER316L
wire_diameter_mm = 0.9
torch_speed_mm_s = 8
feed_rate_ipm = 130
layer_height_mm = 1.2
)";
}

MaterialTable MaterialTable::builtin() { return parse(builtin_material_ini()); }

MaterialTable MaterialTable::parse(std::string_view ini_text) {
  boost::property_tree::ptree tree;
  std::istringstream in{std::string(ini_text)};
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    fail(ErrorCode::MalformedInput, std::string("material table: ") + e.what());
  }

  MaterialTable table;
  for (const auto& [section, body] : tree) {
    MaterialParams m;
    m.name = section;
    try {
      m.wire = body.get<std::string>("wire", "");
      m.wire_diameter_mm = body.get<double>("wire_diameter_mm");
      m.torch_speed_mm_s = body.get<double>("torch_speed_mm_s");
      m.feed_rate_ipm = body.get<double>("feed_rate_ipm");
      m.layer_height_mm = body.get<double>("layer_height_mm");
    } catch (const boost::property_tree::ptree_error& e) {
      fail(ErrorCode::MalformedInput, "material '" + section + "': " + e.what());
    }
    require(m.wire_diameter_mm > 0 && m.torch_speed_mm_s > 0 && m.feed_rate_ipm > 0 &&
                m.layer_height_mm > 0,
            ErrorCode::MalformedInput, "material '" + section + "': values must be positive");
    table.entries_.push_back(std::move(m));
  }
  return table;
}

MaterialTable MaterialTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::Io, "cannot open material table " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse(text);
}

bool MaterialTable::contains(std::string_view name) const {
  for (const auto& m : entries_) {
    if (m.name == name) return true;
  }
  return false;
}

const MaterialParams& MaterialTable::at(std::string_view name) const {
  for (const auto& m : entries_) {
    if (m.name == name) return m;
  }
  fail(ErrorCode::NotFound, "unknown material '" + std::string(name) + "'");
}

}  // namespace waam
