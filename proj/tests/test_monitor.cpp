#include <doctest.h>

#include <filesystem>
#include <random>
#include <stack>

#include "waam/error.hpp"
#include "waam/fixtures.hpp"
#include "waam/monitor.hpp"
#include "waam/pgm.hpp"

using namespace waam;

namespace {

IRFrame blank_frame(int w, int h, std::uint16_t level = 0) {
  IRFrame f;
  f.width = w;
  f.height = h;
  f.px_per_mm = 4.0;
  f.data.assign(static_cast<std::size_t>(w) * h, level);
  return f;
}

void paint_disk(IRFrame& f, double cr, double cc, double rad, std::uint16_t v) {
  for (int r = 0; r < f.height; ++r)
    for (int c = 0; c < f.width; ++c)
      if ((r - cr) * (r - cr) + (c - cc) * (c - cc) <= rad * rad) f.data[r * f.width + c] = v;
}

// Recursive-free flood fill with an explicit stack, 8-neighbourhood.
std::size_t flood_count(const std::vector<std::uint8_t>& mask, int w, int h) {
  std::vector<int> label(mask.size(), 0);
  std::size_t n = 0;
  for (int start = 0; start < w * h; ++start) {
    if (!mask[start] || label[start]) continue;
    ++n;
    std::stack<int> todo;
    todo.push(start);
    label[start] = 1;
    while (!todo.empty()) {
      const int i = todo.top();
      todo.pop();
      const int r = i / w, c = i % w;
      for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc) {
          const int rr = r + dr, cc = c + dc;
          if (rr < 0 || cc < 0 || rr >= h || cc >= w) continue;
          const int j = rr * w + cc;
          if (mask[j] && !label[j]) {
            label[j] = 1;
            todo.push(j);
          }
        }
    }
  }
  return n;
}

SlicePlan dense_plan(double height) {
  return slice_axisymmetric(fixtures::cylinder_profile(5, height, 0.05), 0.1, 1.0);
}

}  // namespace

TEST_CASE("exact torch embed is found") {
  const Silhouette s = default_torch_silhouette();
  const TorchTemplate t = make_template(s);
  IRFrame f = blank_frame(200, 150);
  for (int r = 0; r < s.height; ++r)
    for (int c = 0; c < s.width; ++c)
      if (s.mask[r * s.width + c]) f.data[(40 + r) * f.width + 60 + c] = 40000;
  const MatchResult m = match_template(f, t);
  CHECK(m.location == Pixel{40, 60});
  CHECK(m.score >= 0.99);
  CHECK(m.score <= 1.0 + 1e-12);
}

TEST_CASE("uniform frames have no structure") {
  const TorchTemplate t = make_template(default_torch_silhouette());
  const MatchResult m = match_template(blank_frame(100, 100, 12345), t);
  CHECK(m.score <= 0.1);
  CHECK(m.location == Pixel{0, 0});
}

TEST_CASE("template larger than frame") {
  const TorchTemplate t = make_template(default_torch_silhouette());
  CHECK_THROWS_AS(match_template(blank_frame(20, 20), t), Error);
}

TEST_CASE("noisy embeds are located within two pixels") {
  const Silhouette s = default_torch_silhouette();
  const TorchTemplate t = make_template(s);
  std::mt19937_64 rng(47);
  std::uniform_int_distribution<int> row(60, 120), col(40, 260);
  int hits = 0;
  for (int trial = 0; trial < 100; ++trial) {
    SynthSpec spec;
    spec.torch_tip = {row(rng), col(rng)};
    spec.flame_center = {spec.torch_tip.row + 40, spec.torch_tip.col};
    spec.noise_sigma = 0.05;
    spec.seed = 1000 + trial;
    const MatchResult m = match_template(synth_frame(spec, s), t);
    const Pixel truth{spec.torch_tip.row - s.anchor.row, spec.torch_tip.col - s.anchor.col};
    if (std::abs(m.location.row - truth.row) <= 2 && std::abs(m.location.col - truth.col) <= 2) ++hits;
  }
  CHECK(hits >= 95);
}

TEST_CASE("disk flame statistics") {
  IRFrame f = blank_frame(120, 120, 1000);
  paint_disk(f, 60.3, 55.7, 10.0, 60000);
  const auto blob = detect_flame(f, 50000);
  REQUIRE(blob);
  CHECK(std::abs(double(blob->area) - kPi * 100) <= 15);
  CHECK(std::abs(blob->centroid_row - 60.3) <= 0.5);
  CHECK(std::abs(blob->centroid_col - 55.7) <= 0.5);
  CHECK(blob->top_left.row == 51);
  CHECK(blob->bottom_right.row == 70);
}

TEST_CASE("dark frames have no flame") {
  CHECK_FALSE(detect_flame(blank_frame(64, 64, 100), 50000));
}

TEST_CASE("largest blob wins and tiny blobs are ignored") {
  IRFrame f = blank_frame(100, 100);
  for (int r = 10; r < 30; ++r)
    for (int c = 10; c < 30; ++c) f.data[r * 100 + c] = 60000;  // 400 px
  for (int r = 60; r < 70; ++r)
    for (int c = 60; c < 70; ++c) f.data[r * 100 + c] = 60000;  // 100 px
  const auto blob = detect_flame(f, 50000);
  REQUIRE(blob);
  CHECK(blob->area == 400);
  CHECK(blob->top_left == Pixel{10, 10});

  IRFrame small = blank_frame(50, 50);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 6; ++c) small.data[(20 + r) * 50 + 20 + c] = 60000;  // 24 px
  CHECK_FALSE(detect_flame(small, 50000));
  CHECK_THROWS_AS(detect_flame(small, 0), Error);
  CHECK_THROWS_AS(detect_flame(small, 65535), Error);
}

TEST_CASE("component count matches flood fill") {
  std::mt19937_64 rng(53);
  std::uniform_int_distribution<int> dim(1, 64);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    const int w = dim(rng), h = dim(rng);
    const double density = u(rng);
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(w) * h);
    for (auto& m : mask) m = u(rng) < density;
    const auto comps = connected_components(mask, w, h);
    CHECK(comps.size() == flood_count(mask, w, h));
    std::size_t covered = 0;
    for (const auto& c : comps) covered += c.size();
    std::size_t set = 0;
    for (auto m : mask) set += m;
    CHECK(covered == set);
  }
}

TEST_CASE("standoff from a constructed frame") {
  const TorchTemplate t = make_template(default_torch_silhouette());
  SynthSpec spec;  // tip row 100, flame disk top row 140
  const auto m = estimate_standoff(synth_frame(spec), t, 50000);
  CHECK(m.tip == Pixel{100, 160});
  CHECK(m.flame_top_row == 140);
  CHECK(m.standoff_mm == 10.0);
}

TEST_CASE("standoff failures name the stage") {
  const TorchTemplate t = make_template(default_torch_silhouette());
  SynthSpec spec;
  spec.draw_flame = false;
  try {
    estimate_standoff(synth_frame(spec), t, 50000);
    FAIL("expected DetectionError");
  } catch (const DetectionError& e) {
    CHECK(e.stage() == MonitorStage::Flame);
    CHECK(e.code() == ErrorCode::NotFound);
  }
  spec.draw_flame = true;
  spec.draw_torch = false;
  try {
    estimate_standoff(synth_frame(spec), t, 50000);
    FAIL("expected DetectionError");
  } catch (const DetectionError& e) {
    CHECK(e.stage() == MonitorStage::Torch);
  }
}

TEST_CASE("standoff tracks a growing sequence") {
  const Silhouette s = default_torch_silhouette();
  const TorchTemplate t = make_template(s);
  double prev = -1e9;
  for (int i = 0; i < 200; ++i) {
    const double truth = 10.0 + 4.0 * i / 199.0;  // mm
    SynthSpec spec;
    spec.torch_tip = {60, 160};
    const double top = spec.torch_tip.row + truth * spec.px_per_mm;
    spec.flame_center = {static_cast<int>(std::lround(top + spec.flame_radius)), 160};
    spec.noise_sigma = 0.02;
    spec.seed = 7 + i;
    const auto m = estimate_standoff(synth_frame(spec, s), t, 50000);
    CHECK(std::abs(m.standoff_mm - truth) <= 0.5);
    CHECK(m.standoff_mm >= prev - 0.5);
    prev = m.standoff_mm;
  }
}

TEST_CASE("select_slice arithmetic") {
  const SlicePlan plan = dense_plan(20.0);
  REQUIRE(plan.layers.size() == 201);
  CHECK(select_slice(plan, 10.0, std::nullopt, 1.05) == 110);
  CHECK(select_slice(plan, 0.0, std::nullopt, 1.0) == 10);
  CHECK(select_slice(plan, 0.0, std::size_t{50}, 1.0) == 51);
  try {
    select_slice(plan, 20.5, std::nullopt, 1.05);
    FAIL("expected PlanExhausted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PlanExhausted);
  }
  CHECK_THROWS_AS(select_slice(plan, 1.0, std::size_t{200}, 1.05), Error);
}

TEST_CASE("select_slice is monotone in the measured height") {
  const SlicePlan plan = dense_plan(30.0);
  std::mt19937_64 rng(59);
  std::uniform_real_distribution<double> u(0, 25);
  std::vector<double> heights(500);
  for (auto& h : heights) h = u(rng);
  std::sort(heights.begin(), heights.end());
  std::size_t prev = 0;
  for (double h : heights) {
    const std::size_t k = select_slice(plan, h, std::nullopt, 1.05);
    CHECK(k >= prev);
    prev = k;
  }
}

TEST_CASE("synthetic geometry must fit") {
  SynthSpec spec;
  spec.torch_tip = {5, 160};
  CHECK_THROWS_AS(synth_frame(spec), Error);
  spec = SynthSpec{};
  spec.flame_center = {235, 160};
  CHECK_THROWS_AS(synth_frame(spec), Error);
  spec = SynthSpec{};
  spec.seed = 3;
  spec.noise_sigma = 0.05;
  CHECK(synth_frame(spec).data == synth_frame(spec).data);
}

TEST_CASE("pgm round trips") {
  GrayImage img;
  img.width = 7;
  img.height = 3;
  img.maxval = 65535;
  for (int i = 0; i < 21; ++i) img.data.push_back(static_cast<std::uint16_t>(i * 3000 + 1));
  const GrayImage back = parse_pgm(pgm_bytes(img));
  CHECK(back.width == 7);
  CHECK(back.data == img.data);

  img.maxval = 255;
  for (auto& v : img.data) v %= 256;
  CHECK(parse_pgm(pgm_bytes(img)).data == img.data);

  const std::string commented = std::string("P5\n# made by hand\n2 1\n255\n") + char(7) + char(9);
  const GrayImage c = parse_pgm(commented);
  CHECK(c.data == std::vector<std::uint16_t>{7, 9});
  CHECK_THROWS_AS(parse_pgm("P2\n1 1\n255\n0"), Error);
  CHECK_THROWS_AS(parse_pgm("P5\n4 4\n255\nab"), Error);
}

TEST_CASE("template files round trip") {
  const TorchTemplate t = make_template(default_torch_silhouette());
  const auto dir = std::filesystem::temp_directory_path();
  write_template(t, dir / "waam_tmpl.pgm", dir / "waam_tmpl.anchor");
  const TorchTemplate back = read_template(dir / "waam_tmpl.pgm", dir / "waam_tmpl.anchor");
  CHECK(back.edges == t.edges);
  CHECK(back.anchor == t.anchor);
  std::filesystem::remove(dir / "waam_tmpl.pgm");
  std::filesystem::remove(dir / "waam_tmpl.anchor");
}
