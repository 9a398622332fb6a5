#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "waam/emitter.hpp"
#include "waam/plan_io.hpp"

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("waam_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + WAAM_CLI_PATH + "\" -q " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("slice a wall from the command line") {
  const fs::path dir = scratch("slice");
  REQUIRE(run("fixture --kind wall --out " + (dir / "wall.stl").string(), dir / "log") == 0);
  REQUIRE(run("slice --mesh " + (dir / "wall.stl").string() + " --h 1 --sampling 0.5 --out " + dir.string(),
              dir / "log") == 0);
  const waam::SlicePlan plan = waam::read_plan(dir / "plan.txt");
  CHECK(plan.layers.size() >= 49);
  CHECK(plan.layers.size() <= 51);
  CHECK(plan.h == 1.0);
  CHECK(plan.sampling == 0.5);
}

TEST_CASE("plan and emit rapid") {
  const fs::path dir = scratch("emit");
  REQUIRE(run("fixture --kind wall --out " + (dir / "wall.stl").string(), dir / "log") == 0);
  REQUIRE(run("slice --mesh " + (dir / "wall.stl").string() + " --h 5 --out " + dir.string(), dir / "log") == 0);
  REQUIRE(run("plan --plan " + (dir / "plan.txt").string() + " --material aluminum --out " + dir.string(),
              dir / "log") == 0);
  REQUIRE(fs::exists(dir / "trajectory.csv"));
  REQUIRE(run("emit --program " + (dir / "program.ir").string() + " --dialect rapid --out " + dir.string(),
              dir / "log") == 0);
  const std::string text = slurp(dir / "program.mod");
  const auto summary = waam::read_dialect(text, waam::Dialect::RapidLike);
  const auto program = waam::parse_script(slurp(dir / "program.ir"));
  CHECK(summary.motion_statements == program.segments.size());
}

TEST_CASE("evaluate a self-sampled CAD") {
  const fs::path dir = scratch("eval");
  REQUIRE(run("fixture --kind cylinder --out " + (dir / "cyl.stl").string(), dir / "log") == 0);
  REQUIRE(run("sample --mesh " + (dir / "cyl.stl").string() + " --density 1 --out " + (dir / "scan.ply").string(),
              dir / "log") == 0);
  REQUIRE(run("evaluate --cad " + (dir / "cyl.stl").string() + " --scan " + (dir / "scan.ply").string() +
                  " --nominal-width 3 --geometry cylinder --material aluminum --out " + dir.string(),
              dir / "log") == 0);
  const std::string kv = slurp(dir / "report.kv");
  const auto pos = kv.find("e_avg_mm=");
  REQUIRE(pos != std::string::npos);
  CHECK(std::stod(kv.substr(pos + 9)) < 1e-6);
  CHECK(kv.rfind("Geometry=cylinder\nMaterial=aluminum\n", 0) == 0);
}

TEST_CASE("failures exit non-zero and name the stage") {
  const fs::path dir = scratch("fail");
  REQUIRE(run("fixture --kind wall --out " + (dir / "wall.stl").string(), dir / "log") == 0);
  REQUIRE(run("slice --mesh " + (dir / "wall.stl").string() + " --h 5 --out " + dir.string(), dir / "log") == 0);
  CHECK(run("plan --plan " + (dir / "plan.txt").string() + " --material unobtainium --out " + dir.string(),
            dir / "log") != 0);
  CHECK(slurp(dir / "log").find("plan") != std::string::npos);

  std::ofstream(dir / "bad.ir") << "ARCON\n";
  CHECK(run("emit --program " + (dir / "bad.ir").string() + " --dialect karel --out " + dir.string(), dir / "log") != 0);
  const std::string log = slurp(dir / "log");
  CHECK(log.find("emit") != std::string::npos);
  CHECK(log.find("line 1") != std::string::npos);

  CHECK(run("emit --program " + (dir / "bad.ir").string() + " --dialect gcode --out " + dir.string(), dir / "log") != 0);
}

TEST_CASE("outputs are byte-identical across runs") {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  for (const auto& dir : {a, b}) {
    REQUIRE(run("fixture --kind sphere_cap --out " + (dir / "cap.stl").string(), dir / "log") == 0);
    REQUIRE(run("slice --mesh " + (dir / "cap.stl").string() + " --h 2 --out " + dir.string(), dir / "log") == 0);
    REQUIRE(run("plan --plan " + (dir / "plan.txt").string() + " --out " + dir.string(), dir / "log") == 0);
    REQUIRE(run("emit --program " + (dir / "program.ir").string() + " --dialect inform --out " + dir.string(),
                dir / "log") == 0);
    REQUIRE(run("viz --plan " + (dir / "plan.txt").string() + " --program " + (dir / "program.ir").string() +
                    " --out " + dir.string(),
                dir / "log") == 0);
  }
  for (const char* f : {"cap.stl", "plan.txt", "program.ir", "trajectory.csv", "program.jbi", "plan.ply", "plan.svg"})
    CHECK_MESSAGE(slurp(a / f) == slurp(b / f), f);
}
