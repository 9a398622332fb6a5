#include <doctest.h>

#include <random>
#include <regex>

#include "fuzz_ir.hpp"
#include "waam/emitter.hpp"
#include "waam/error.hpp"

using namespace waam;
using waam_test::fuzz_script;
using waam_test::ir_tokens;

namespace {

const char* kTwoMoves =
    "DEVICE R1 ROBOT\n"
    "MOVL R1 0 0 0 0 0 0 5\n"
    "MOVL R1 10 0 0 0 0 0 5\n";

MotionProgram one_segment(double speed = 4.5) {
  MotionProgram p = MotionProgram::with_default_cell();
  MotionSegment seg;
  seg.target.torch.position = Point3(1, 2, 3);
  seg.target.torch.orientation = from_euler_zyx({180, 0, 0});
  seg.target.positioner = {deg2rad(-30), deg2rad(10)};
  seg.target.arc_on = true;
  seg.speed = speed;
  seg.group = "cell";
  p.segments.push_back(seg);
  p.material = "aluminum";
  p.feed_rate_ipm = 110;
  return p;
}

std::size_t count_matches(const std::string& text, const std::regex& re) {
  return std::distance(std::sregex_iterator(text.begin(), text.end(), re), std::sregex_iterator());
}

template <class F>
ParseError parse_failure(F&& f) {
  try {
    f();
  } catch (const ParseError& e) {
    return e;
  }
  FAIL("expected a ParseError");
  return ParseError(ErrorCode::Syntax, 0, 0, "");
}

}  // namespace

TEST_CASE("two-line MOVL script") {
  const MotionProgram p = parse_script(kTwoMoves);
  CHECK(p.segments.size() == 2);
  CHECK(p.segments[1].target.torch.position.x() == 10.0);
  CHECK(p.segments[0].speed == 5.0);
  CHECK_FALSE(p.segments[0].target.arc_on);
}

TEST_CASE("balance errors carry the line") {
  auto e = parse_failure([] { parse_script("ARCON\n"); });
  CHECK(e.code() == ErrorCode::Unbalanced);
  CHECK(e.line() == 1);

  e = parse_failure([] { parse_script("DEVICE R1 ROBOT\nARCOF\n"); });
  CHECK(e.code() == ErrorCode::Unbalanced);
  CHECK(e.line() == 2);

  e = parse_failure([] { parse_script("DEVICE R1 ROBOT\nARCON\nMOVL R1 0 0 0 0 0 0 5\nARCON\n"); });
  CHECK(e.code() == ErrorCode::Unbalanced);
  CHECK(e.line() == 4);
}

TEST_CASE("syntax errors report line, column and expectations") {
  auto e = parse_failure([] { parse_script("DEVICE R1 ROBOT\nMOVL R1 0 0 zero 0 0 0 5\n"); });
  CHECK(e.code() == ErrorCode::Syntax);
  CHECK(e.line() == 2);
  CHECK(e.column() == 13);

  e = parse_failure([] { parse_script("  JUMP R1\n"); });
  CHECK(e.code() == ErrorCode::Syntax);
  CHECK(e.column() == 3);
  CHECK(std::string(e.what()).find("MOVL") != std::string::npos);

  e = parse_failure([] { parse_script("DEVICE R1 ROBOT\nMOVL R1 0 0 0 0 0 0\n"); });
  CHECK(e.code() == ErrorCode::Syntax);

  e = parse_failure([] { parse_script("DEVICE R1 ROBOT\nMOVL R1 0 0 0 0 0 0 5 extra\n"); });
  CHECK(e.code() == ErrorCode::Syntax);

  e = parse_failure([] { parse_script("DEVICE R1 ROBOT\nMOVL R1 0 0 0 0 0 0 5\nPROGRAM dr=5\n"); });
  CHECK(e.code() == ErrorCode::Syntax);
  CHECK(e.line() == 3);
}

TEST_CASE("unknown devices and groups") {
  auto e = parse_failure([] { parse_script("DEVICE R1 ROBOT\nMOVL R2 0 0 0 0 0 0 5\n"); });
  CHECK(e.code() == ErrorCode::UnknownReference);
  e = parse_failure([] { parse_script("DEVICE R1 ROBOT\nSYNC cell\n"); });
  CHECK(e.code() == ErrorCode::UnknownReference);
  e = parse_failure([] { parse_script("DEVICE R1 ROBOT\nGROUP g R1 P9\n"); });
  CHECK(e.code() == ErrorCode::UnknownReference);
}

TEST_CASE("a script without moves is rejected") {
  auto e = parse_failure([] { parse_script("# nothing\nDEVICE R1 ROBOT\n"); });
  CHECK(e.code() == ErrorCode::EmptyResult);
}

TEST_CASE("empty program cannot be emitted") {
  const MotionProgram empty = MotionProgram::with_default_cell();
  CHECK_THROWS_AS(emit_ir(empty), Error);
  CHECK_THROWS_AS(emit(empty, Dialect::RapidLike), Error);
}

TEST_CASE("euler angles round trip") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> ang(-179, 179);
  std::uniform_real_distribution<double> tilt(-89, 89);
  for (int i = 0; i < 1000; ++i) {
    const EulerZYX e{ang(rng), tilt(rng), ang(rng)};
    const Rotation3 r = from_euler_zyx(e);
    CHECK(is_rotation(r));
    const EulerZYX back = to_euler_zyx(r);
    CHECK(back.rx == doctest::Approx(e.rx).epsilon(1e-9));
    CHECK(back.ry == doctest::Approx(e.ry).epsilon(1e-9));
    CHECK(back.rz == doctest::Approx(e.rz).epsilon(1e-9));
  }
  // R = Rz Ry Rx, checked against Eigen angle-axis products.
  const EulerZYX e{10, 20, 30};
  const Rotation3 want = (Eigen::AngleAxisd(deg2rad(30), Vec3::UnitZ()) *
                          Eigen::AngleAxisd(deg2rad(20), Vec3::UnitY()) *
                          Eigen::AngleAxisd(deg2rad(10), Vec3::UnitX()))
                             .toRotationMatrix();
  CHECK((from_euler_zyx(e) - want).cwiseAbs().maxCoeff() <= 1e-12);
  // Gimbal lock still reproduces the rotation.
  const Rotation3 lock = from_euler_zyx({25, 90, 0});
  CHECK((from_euler_zyx(to_euler_zyx(lock)) - lock).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("fixed formatting") {
  CHECK(format_fixed3(-0.0001) == "0.000");
  CHECK(format_fixed3(4.5) == "4.500");
  CHECK(format_fixed3(-12.3456) == "-12.346");
  CHECK(format_speed(0.0004) == "0.001");
  CHECK(format_speed(0.0) == "0.000");
  CHECK(format_speed(4.5) == "4.500");
}

TEST_CASE("crawling segments stay positive through the IR") {
  MotionProgram p = one_segment(0.0004);
  const MotionProgram back = parse_script(emit_ir(p));
  CHECK(back.segments[0].speed == 0.001);
  for (Dialect d : {Dialect::InformLike, Dialect::RapidLike, Dialect::KarelLike}) CHECK_NOTHROW(emit(back, d));
}

TEST_CASE("IR round trip on fuzzed scripts") {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 200; ++i) {
    waam_test::FuzzOptions opt;
    opt.noise = i % 2 == 1;
    const std::string s = fuzz_script(rng, opt);
    const MotionProgram p = parse_script(s);
    const std::string out = emit_ir(p);
    CHECK(ir_tokens(out) == ir_tokens(s));
    if (!opt.noise) CHECK(out == s);
    const MotionProgram again = parse_script(out);
    CHECK(structurally_equal(p, again, 1e-9));
  }
}

TEST_CASE("parse of emit_ir preserves programs to three decimals") {
  MotionProgram p = one_segment(4.5);
  MotionSegment seg = p.segments.front();
  seg.target.torch.position = Point3(1.23456, -7.5, 0.0004);
  seg.primitive = Primitive::MoveC;
  DevicePose via;
  via.position = Point3(0.5, 0.5, 0.5);
  via.orientation = from_euler_zyx({170, 10, -45});
  seg.via = via;
  seg.group = "";
  p.segments.push_back(seg);
  const MotionProgram back = parse_script(emit_ir(p));
  CHECK(structurally_equal(p, back, 1e-3));
  CHECK(back.material == "aluminum");
  CHECK(back.groups.size() == 1);
  CHECK(back.groups.front().name == "cell");
  CHECK(back.segments[0].group == "cell");
  CHECK(back.segments[1].group == "");
}

TEST_CASE("SYNC groups are kept in declaration order") {
  const std::string s =
      "PROGRAM dr=5.000 vr=9.000 feed=110.000\n"
      "DEVICE R1 ROBOT\nDEVICE P1 POSITIONER\n"
      "GROUP zeta R1 P1\nGROUP alpha P1\n"
      "SYNC alpha\nMOVL R1 0.000 0.000 0.000 0.000 0.000 0.000 P1 0.000 0.000 5.000\n"
      "SYNC zeta\nMOVL R1 1.000 0.000 0.000 0.000 0.000 0.000 P1 0.000 0.000 5.000\n";
  const MotionProgram p = parse_script(s);
  REQUIRE(p.groups.size() == 2);
  CHECK(p.groups[0].name == "zeta");
  CHECK(p.groups[1].name == "alpha");
  CHECK(p.segments[0].group == "alpha");
  CHECK(p.segments[1].group == "zeta");
  CHECK(emit_ir(p) == s);
}

TEST_CASE("one segment in inform") {
  const std::string text = emit(one_segment(), Dialect::InformLike);
  CHECK(count_matches(text, std::regex("(^|\\n)MOVL ")) == 1);
  CHECK(count_matches(text, std::regex("(^|\\n)C\\d{5}=")) == 1);
  const auto sum = read_dialect(text, Dialect::InformLike);
  CHECK(sum.motion_statements == 1);
  CHECK(sum.position_records == 1);
  CHECK(sum.arc_on == 1);
  CHECK(sum.arc_off == 1);
}

TEST_CASE("dialects agree on statement counts and speeds") {
  std::mt19937_64 rng(43);
  for (int i = 0; i < 100; ++i) {
    const MotionProgram p = parse_script(fuzz_script(rng));
    std::vector<DialectSummary> sums;
    for (Dialect d : {Dialect::InformLike, Dialect::RapidLike, Dialect::KarelLike}) {
      const std::string text = emit(p, d);
      CHECK(text == emit(p, d));
      sums.push_back(read_dialect(text, d));
    }
    for (const auto& s : sums) {
      CHECK(s.motion_statements == p.segments.size());
      CHECK(s.arc_on == sums[0].arc_on);
      CHECK(s.arc_off == sums[0].arc_off);
      REQUIRE(s.speeds.size() == p.segments.size());
      for (std::size_t k = 0; k < p.segments.size(); ++k) CHECK(s.speeds[k] == doctest::Approx(p.segments[k].speed));
    }
  }
}

TEST_CASE("rapid speed field reads back") {
  const std::string text = emit(one_segment(4.5), Dialect::RapidLike);
  CHECK(text.find(",v4.500,fine,tool0;") != std::string::npos);
  const auto sum = read_dialect(text, Dialect::RapidLike);
  REQUIRE(sum.speeds.size() == 1);
  CHECK(sum.speeds[0] == 4.5);
}

TEST_CASE("dialect readers reject foreign lines") {
  const std::string rapid = emit(one_segment(), Dialect::RapidLike);
  CHECK_THROWS_AS(read_dialect(rapid, Dialect::InformLike), Error);
  CHECK_THROWS_AS(read_dialect(rapid + "    GOTO 10\n", Dialect::RapidLike), Error);
  const std::string inform = emit(one_segment(), Dialect::InformLike);
  std::string dangling = inform;
  dangling.replace(dangling.find("MOVL C00000"), 11, "MOVL C00009");
  CHECK_THROWS_AS(read_dialect(dangling, Dialect::InformLike), Error);
}

TEST_CASE("layouts the skeletons cannot express") {
  MotionProgram p = one_segment();
  p.devices.push_back({"ROBOT2", DeviceKind::Robot});
  try {
    emit(p, Dialect::KarelLike);
    FAIL("expected Unsupported");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Unsupported);
  }
  CHECK_THROWS_AS(parse_dialect("gcode"), Error);
  CHECK(parse_dialect("rapid") == Dialect::RapidLike);
  CHECK(parse_dialect("karel_like") == Dialect::KarelLike);
  CHECK(to_string(Dialect::InformLike) == "inform_like");
}
