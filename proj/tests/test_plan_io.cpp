#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "waam/error.hpp"
#include "waam/fixtures.hpp"
#include "waam/plan_io.hpp"

using namespace waam;

TEST_CASE("plan text round trips bit-exactly") {
  SlicePlan plan = slice_surface(fixtures::sphere_cap(50, 0, 20, 1), 1.0, 0.5, 50);
  plan.source = "cap";
  const SlicePlan back = parse_plan(format_plan(plan));
  CHECK(back.h == plan.h);
  CHECK(back.sampling == plan.sampling);
  CHECK(back.source == plan.source);
  CHECK(back.warped == plan.warped);
  REQUIRE(back.layers.size() == plan.layers.size());
  for (std::size_t i = 0; i < plan.layers.size(); ++i) {
    const auto& a = plan.layers[i];
    const auto& b = back.layers[i];
    CHECK(a.closed == b.closed);
    CHECK(a.touches_boundary == b.touches_boundary);
    REQUIRE(a.segments.size() == b.segments.size());
    for (std::size_t s = 0; s < a.segments.size(); ++s) {
      REQUIRE(a.segments[s].size() == b.segments[s].size());
      for (std::size_t j = 0; j < a.segments[s].size(); ++j) {
        CHECK(a.segments[s][j].p == b.segments[s][j].p);
        CHECK(a.segments[s][j].a == b.segments[s][j].a);
        CHECK(a.segments[s][j].lambda == b.segments[s][j].lambda);
      }
    }
  }
  CHECK(format_plan(back) == format_plan(plan));
}

TEST_CASE("format_number is shortest round-trip") {
  CHECK(format_number(0.5) == "0.5");
  CHECK(format_number(1.0) == "1");
  CHECK(std::stod(format_number(0.1 + 0.2)) == 0.1 + 0.2);
}

TEST_CASE("plan parser rejects malformed text") {
  CHECK_THROWS_AS(parse_plan(""), Error);
  CHECK_THROWS_AS(parse_plan("NOTAPLAN\n"), Error);
  CHECK_THROWS_AS(parse_plan("SLICEPLAN h=1 sampling=0.5 warped=0 source=x\nL 0 S 0 closed=0 boundary=0\n1 2 3\n"),
                  Error);
}

TEST_CASE("plan files on disk") {
  const SlicePlan plan = slice_axisymmetric(fixtures::cylinder_profile(10, 3), 1.0, 0.5);
  const auto path = std::filesystem::temp_directory_path() / "waam_test_plan.txt";
  write_plan(plan, path);
  CHECK(read_plan(path).layers.size() == plan.layers.size());
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_plan(path), Error);
}

TEST_CASE("ply and svg exports") {
  const SlicePlan plan = slice_axisymmetric(fixtures::cylinder_profile(10, 9), 1.0, 0.5);
  std::size_t points = 0;
  for (const auto& l : plan.layers) points += l.point_count();
  const std::string ply = plan_to_ply(plan);
  CHECK(ply.rfind("ply\nformat ascii 1.0\n", 0) == 0);
  CHECK(ply.find("element vertex " + std::to_string(points) + "\n") != std::string::npos);
  const std::string every_tenth = plan_to_ply(plan, 10);
  std::size_t strided = 0;
  for (std::size_t i = 0; i < plan.layers.size(); i += 10) strided += plan.layers[i].point_count();
  CHECK(every_tenth.find("element vertex " + std::to_string(strided) + "\n") != std::string::npos);

  const std::string svg = plan_to_svg(plan);
  std::size_t polylines = 0;
  for (std::size_t pos = 0; (pos = svg.find("<polyline", pos)) != std::string::npos; ++pos) ++polylines;
  CHECK(polylines == plan.layers.size());
}
