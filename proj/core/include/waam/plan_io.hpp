#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "waam/slicer.hpp"

namespace waam {

// Line-oriented slice plan format:
//
//   SLICEPLAN h=<mm> sampling=<mm> warped=<0|1> source=<name>
//   L <layer> S <segment> closed=<0|1> boundary=<0|1>
//   x y z tx ty tz nx ny nz ax ay az lambda
//   ...
//
// Numbers use the shortest representation that round-trips exactly.
std::string format_plan(const SlicePlan& plan);
SlicePlan parse_plan(std::string_view text);

void write_plan(const SlicePlan& plan, const std::filesystem::path& path);
SlicePlan read_plan(const std::filesystem::path& path);

/// Every plan point as an ASCII PLY vertex with its normal.
std::string plan_to_ply(const SlicePlan& plan, std::size_t layer_stride = 1);

/// x-z side view of the plan, one polyline per layer segment.
std::string plan_to_svg(const SlicePlan& plan, std::size_t layer_stride = 1);

std::string format_number(double value);

}  // namespace waam
