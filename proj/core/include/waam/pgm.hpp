#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace waam {

/// Grey raster, row-major. Samples are stored widened to 16 bits.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::uint16_t maxval = 65535;
  std::vector<std::uint16_t> data;

  std::uint16_t at(int row, int col) const { return data[static_cast<std::size_t>(row) * width + col]; }
  std::uint16_t& at(int row, int col) { return data[static_cast<std::size_t>(row) * width + col]; }
};

/// Binary PGM (P5). maxval < 256 gives one byte per sample, otherwise two,
/// big-endian.
GrayImage parse_pgm(std::string_view bytes);
std::string pgm_bytes(const GrayImage& image);

GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const GrayImage& image, const std::filesystem::path& path);

}  // namespace waam
