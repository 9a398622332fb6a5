#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace waam {

struct MaterialParams {
  std::string name;
  std::string wire;
  double wire_diameter_mm = 0.0;
  double torch_speed_mm_s = 0.0;
  double feed_rate_ipm = 0.0;
  double layer_height_mm = 0.0;  // average deposition height per layer
};

// INI-style table, one material per section:
//
//   [aluminum]
//   wire = ER4043
//   wire_diameter_mm = 1.2
//   torch_speed_mm_s = 9
//   feed_rate_ipm = 110
//   layer_height_mm = 1.05
class MaterialTable {
 public:
  static MaterialTable builtin();
  static MaterialTable parse(std::string_view ini_text);
  static MaterialTable load(const std::filesystem::path& path);

  const MaterialParams& at(std::string_view name) const;
  bool contains(std::string_view name) const;
  const std::vector<MaterialParams>& entries() const noexcept { return entries_; }

 private:
  std::vector<MaterialParams> entries_;
};

/// The shipped table as INI text.
std::string_view builtin_material_ini();

}  // namespace waam
