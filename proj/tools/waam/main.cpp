// waam: slicing, motion planning, program emission, part evaluation and
// wire-tracking replay for two-axis-positioner WAAM cells.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "waam/cloud.hpp"
#include "waam/emitter.hpp"
#include "waam/error.hpp"
#include "waam/fixtures.hpp"
#include "waam/material.hpp"
#include "waam/metrology.hpp"
#include "waam/monitor.hpp"
#include "waam/plan_io.hpp"
#include "waam/planner.hpp"
#include "waam/slicer.hpp"
#include "waam/stl.hpp"

namespace fs = std::filesystem;

namespace {

bool g_quiet = false;

void log(const std::string& stage, const std::string& message) {
  if (!g_quiet) std::cerr << "[" << stage << "] " << message << '\n';
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  waam::require(static_cast<bool>(in), waam::ErrorCode::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  waam::require(static_cast<bool>(out), waam::ErrorCode::Io, "cannot write " + path.string());
  out << text;
}

fs::path prepare(const std::string& dir) {
  fs::path out(dir);
  fs::create_directories(out);
  return out;
}

waam::MaterialTable materials(const std::string& path) {
  return path.empty() ? waam::MaterialTable::builtin() : waam::MaterialTable::load(path);
}

std::string dialect_extension(waam::Dialect d) {
  switch (d) {
    case waam::Dialect::InformLike: return "jbi";
    case waam::Dialect::RapidLike: return "mod";
    case waam::Dialect::KarelLike: return "kl";
  }
  return "txt";
}

// ------------------------------------------------------------------ options

struct SliceArgs {
  std::string mesh;
  double h = 1.0;
  double sampling = 0.5;
  std::size_t neighbours = waam::kDefaultNeighbours;
  std::size_t max_layers = 100000;
  std::string out = ".";
  std::string name = "plan.txt";
};

struct WarpArgs {
  std::string plan;
  std::string out = ".";
  std::string name = "plan_warped.txt";
};

struct PlanArgs {
  std::string plan;
  std::string material = "aluminum";
  std::string materials;
  double d_r = waam::kDefaultWaypointSpacing;
  std::optional<double> v_r;
  bool spiral = false;
  bool no_alternate = false;
  std::size_t stride = 1;
  bool positive_q1 = false;
  double work_angle = 0.0;
  double travel_angle = 0.0;
  std::string out = ".";
};

struct EmitArgs {
  std::string program;
  std::string dialect = "inform";
  std::string out = ".";
};

struct EvalArgs {
  std::string cad;
  std::string scan;
  std::string geometry;
  std::string material;
  std::optional<double> nominal_width;
  double density = 1.0;
  std::string out = ".";
};

struct SampleArgs {
  std::string mesh;
  double density = 1.0;
  std::string out = "scan.ply";
};

struct FixtureArgs {
  std::string kind = "cylinder";
  double step = 1.0;
  std::string out;
};

struct MonitorArgs {
  std::string frames;
  std::string tmpl;
  std::string anchor;
  std::string plan;
  double px_per_mm = 4.0;
  std::uint16_t threshold = 50000;
  double nominal_standoff = 10.0;
  std::optional<double> nominal_height;
  std::string material = "aluminum";
  std::string materials;
  std::string out = ".";
};

struct SynthArgs {
  std::size_t count = 200;
  double start_standoff = 10.0;
  double end_standoff = 14.0;
  double px_per_mm = 4.0;
  double noise = 0.02;
  std::string out = "synthetic";
};

struct VizArgs {
  std::string plan;
  std::string program;
  std::size_t stride = 1;
  std::string out = ".";
};

// ----------------------------------------------------------------- commands

void run_slice(const SliceArgs& a) {
  const waam::TriMesh mesh = waam::load_mesh(a.mesh);
  log("slice", mesh.name + ": " + std::to_string(mesh.vertices.size()) + " vertices, " +
                   std::to_string(mesh.faces.size()) + " faces");
  waam::SliceOptions opt;
  opt.h = a.h;
  opt.sampling = a.sampling;
  opt.neighbours = a.neighbours;
  opt.max_layers = a.max_layers;
  const waam::SlicePlan plan = waam::slice_surface(mesh, opt);
  const fs::path path = prepare(a.out) / a.name;
  waam::write_plan(plan, path);
  log("slice", std::to_string(plan.layers.size()) + " layers -> " + path.string());
}

void run_warp(const WarpArgs& a) {
  const waam::SlicePlan warped = waam::warp_layers(waam::read_plan(a.plan));
  const fs::path path = prepare(a.out) / a.name;
  waam::write_plan(warped, path);
  log("warp", std::to_string(warped.layers.size()) + " layers -> " + path.string());
}

void run_plan(const PlanArgs& a) {
  const waam::SlicePlan plan = waam::read_plan(a.plan);
  const waam::MaterialParams mat = materials(a.materials).at(a.material);
  waam::PlanOptions opt;
  opt.d_r = a.d_r;
  opt.v_r = a.v_r;
  opt.paths.spiral = a.spiral;
  opt.paths.alternate = !a.no_alternate;
  opt.paths.layer_stride = a.stride;
  opt.policy = a.positive_q1 ? waam::BranchPolicy::PositiveQ1 : waam::BranchPolicy::NegativeQ1;
  opt.work_angle = waam::deg2rad(a.work_angle);
  opt.travel_angle = waam::deg2rad(a.travel_angle);
  const waam::PlanResult result = waam::plan_print(plan, mat, opt);
  const fs::path dir = prepare(a.out);
  spit(dir / "program.ir", waam::emit_ir(result.program));
  spit(dir / "trajectory.csv", waam::trajectory_csv(result.trajectory));
  log("plan", std::to_string(result.program.segments.size()) + " segments, " +
                  std::to_string(waam::arc_span_count(result.program)) + " arc spans, " +
                  waam::format_fixed3(waam::torch_duration(result.program)) + " s");
}

void run_emit(const EmitArgs& a) {
  const waam::Dialect dialect = waam::parse_dialect(a.dialect);
  const waam::MotionProgram program = waam::parse_script(slurp(a.program));
  const std::string text = waam::emit(program, dialect);
  const auto summary = waam::read_dialect(text, dialect);
  const fs::path path = prepare(a.out) / ("program." + dialect_extension(dialect));
  spit(path, text);
  log("emit", waam::to_string(dialect) + ": " + std::to_string(summary.motion_statements) +
                  " motion statements -> " + path.string());
}

void run_evaluate(const EvalArgs& a) {
  const waam::TriMesh cad = waam::load_mesh(a.cad);
  const waam::PointCloud scan = waam::read_cloud(a.scan);
  waam::EvalConfig cfg;
  cfg.geometry = a.geometry.empty() ? cad.name : a.geometry;
  cfg.material = a.material;
  cfg.nominal_width = a.nominal_width;
  cfg.surface_density = a.density;
  const waam::EvalReport report = waam::evaluate(cad, scan, cfg);
  const fs::path dir = prepare(a.out);
  spit(dir / "report.txt", waam::format_report(report));
  spit(dir / "report.kv", waam::format_report_kv(report));
  log("evaluate", "e_avg " + waam::format_fixed3(report.e_avg) + " mm, e_max " +
                      waam::format_fixed3(report.e_max) + " mm");
}

void run_sample(const SampleArgs& a, std::uint64_t seed) {
  const waam::PointCloud cloud = waam::sample_mesh(waam::load_mesh(a.mesh), a.density, seed);
  fs::path path(a.out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  waam::write_cloud(cloud, path);
  log("sample", std::to_string(cloud.size()) + " points -> " + path.string());
}

void run_fixture(const FixtureArgs& a) {
  namespace fx = waam::fixtures;
  waam::TriMesh mesh;
  if (a.kind == "wall") {
    mesh = fx::wall(100.0, 50.0, a.step);
  } else if (a.kind == "cylinder") {
    mesh = fx::cylinder(30.0, 50.0, 188, a.step);
  } else if (a.kind == "sphere_cap") {
    mesh = fx::sphere_cap(50.0, 0.0, 60.0, a.step);
  } else if (a.kind == "blade") {
    mesh = fx::blade(60.0, 50.0, 6.0, 20.0, 15.0, a.step);
  } else if (a.kind == "flat") {
    mesh = fx::flat_square(50.0, a.step);
  } else {
    waam::fail(waam::ErrorCode::InvalidArgument, "unknown fixture '" + a.kind + "'");
  }
  const fs::path path = a.out.empty() ? fs::path(a.kind + ".stl") : fs::path(a.out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  waam::write_stl(mesh, path);
  log("fixture", a.kind + " -> " + path.string());
}

void run_monitor_sim(const MonitorArgs& a) {
  const waam::TorchTemplate tmpl = waam::read_template(a.tmpl, a.anchor);
  const waam::SlicePlan plan = waam::read_plan(a.plan);
  const double nominal_height =
      a.nominal_height ? *a.nominal_height : materials(a.materials).at(a.material).layer_height_mm;

  std::vector<fs::path> frames;
  for (const auto& entry : fs::directory_iterator(a.frames)) {
    if (entry.is_regular_file() && entry.path().extension() == ".pgm") frames.push_back(entry.path());
  }
  std::sort(frames.begin(), frames.end());
  waam::require(!frames.empty(), waam::ErrorCode::NotFound, "no .pgm frames in " + a.frames);

  std::string csv = "frame,standoff_mm,selected_index\n";
  std::optional<std::size_t> current;
  for (const auto& path : frames) {
    const waam::IRFrame frame = waam::frame_from_image(waam::read_pgm(path), a.px_per_mm);
    const auto m = waam::estimate_standoff(frame, tmpl, a.threshold);
    const double layer_height = current ? static_cast<double>(*current) * plan.h : 0.0;
    const double measured = std::max(0.0, layer_height + a.nominal_standoff - m.standoff_mm);
    const std::size_t index = waam::select_slice(plan, measured, current, nominal_height);
    csv += path.stem().string() + ',' + waam::format_fixed3(m.standoff_mm) + ',' + std::to_string(index) + '\n';
    current = index;
  }
  const fs::path out = prepare(a.out) / "monitor.csv";
  spit(out, csv);
  log("monitor-sim", std::to_string(frames.size()) + " frames -> " + out.string());
}

void run_synth_frames(const SynthArgs& a, std::uint64_t seed) {
  const fs::path dir = prepare(a.out);
  const fs::path frame_dir = prepare((dir / "frames").string());
  const waam::Silhouette torch = waam::default_torch_silhouette();
  waam::write_template(waam::make_template(torch), dir / "template.pgm", dir / "template.anchor");
  for (std::size_t i = 0; i < a.count; ++i) {
    const double u = a.count > 1 ? static_cast<double>(i) / static_cast<double>(a.count - 1) : 0.0;
    const double standoff = a.start_standoff + u * (a.end_standoff - a.start_standoff);
    waam::SynthSpec spec;
    spec.px_per_mm = a.px_per_mm;
    spec.noise_sigma = a.noise;
    spec.seed = seed + i;
    spec.torch_tip = {60, 160};
    spec.flame_radius = 10.0;
    const int top = spec.torch_tip.row + static_cast<int>(std::lround(standoff * a.px_per_mm));
    spec.flame_center = {top + 10, 160};
    char name[32];
    std::snprintf(name, sizeof name, "frame_%05zu.pgm", i);
    waam::write_pgm(waam::frame_image(waam::synth_frame(spec, torch)), frame_dir / name);
  }
  log("synth-frames", std::to_string(a.count) + " frames -> " + dir.string());
}

void run_viz(const VizArgs& a) {
  const fs::path dir = prepare(a.out);
  if (!a.plan.empty()) {
    const waam::SlicePlan plan = waam::read_plan(a.plan);
    spit(dir / "plan.ply", waam::plan_to_ply(plan, a.stride));
    spit(dir / "plan.svg", waam::plan_to_svg(plan, a.stride));
    log("viz", "plan.ply, plan.svg -> " + dir.string());
  }
  if (!a.program.empty()) {
    const waam::MotionProgram program = waam::parse_script(slurp(a.program));
    waam::PointCloud path;
    for (const auto& seg : program.segments) {
      path.points.push_back(seg.target.torch.position);
      path.normals.push_back(seg.target.increment());
    }
    spit(dir / "program_path.ply", waam::cloud_to_ply(path));
    log("viz", "program_path.ply -> " + dir.string());
  }
  waam::require(!a.plan.empty() || !a.program.empty(), waam::ErrorCode::InvalidArgument,
                "viz needs --plan or --program");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"WAAM toolpath pipeline: slice, warp, plan, emit, evaluate, monitor-sim, viz"};
  app.require_subcommand(1);
  app.set_config("--config", "", "INI/TOML file; [section] names match subcommands");
  std::uint64_t seed = 1;
  app.add_option("--seed", seed, "Seed for all stochastic sampling")->capture_default_str();
  app.add_flag("-q,--quiet", g_quiet, "Suppress progress logging");

  SliceArgs slice_args;
  auto* slice = app.add_subcommand("slice", "Slice a surface mesh into layers");
  slice->set_help_flag("--help", "Print this help message and exit");
  slice->add_option("--mesh", slice_args.mesh, "STL surface")->required()->check(CLI::ExistingFile);
  slice->add_option("--h", slice_args.h, "Layer increment, mm")->capture_default_str()->check(CLI::PositiveNumber);
  slice->add_option("--sampling", slice_args.sampling, "Point spacing, mm")->capture_default_str()->check(CLI::PositiveNumber);
  slice->add_option("-n,--neighbours", slice_args.neighbours, "Plane-fit neighbours")->capture_default_str();
  slice->add_option("--max-layers", slice_args.max_layers, "Runaway guard")->capture_default_str();
  slice->add_option("--out", slice_args.out, "Output directory")->capture_default_str();
  slice->add_option("--name", slice_args.name, "Plan file name")->capture_default_str();

  WarpArgs warp_args;
  auto* warp = app.add_subcommand("warp", "Blend closed layers into a continuous spiral");
  warp->add_option("--plan", warp_args.plan, "Slice plan")->required()->check(CLI::ExistingFile);
  warp->add_option("--out", warp_args.out, "Output directory")->capture_default_str();
  warp->add_option("--name", warp_args.name, "Plan file name")->capture_default_str();

  PlanArgs plan_args;
  auto* plan = app.add_subcommand("plan", "Coordinate robot and positioner motion");
  plan->add_option("--plan", plan_args.plan, "Slice plan")->required()->check(CLI::ExistingFile);
  plan->add_option("--material", plan_args.material, "Material name")->capture_default_str();
  plan->add_option("--materials", plan_args.materials, "Material table (INI)");
  plan->add_option("--dr", plan_args.d_r, "Waypoint spacing, mm")->capture_default_str()->check(CLI::PositiveNumber);
  plan->add_option("--vr", plan_args.v_r, "Relative path speed, mm/s (default: material)")->check(CLI::PositiveNumber);
  plan->add_flag("--spiral", plan_args.spiral, "Warp closed layers into one continuous path");
  plan->add_flag("--no-alternate", plan_args.no_alternate, "Keep every open layer in slice direction");
  plan->add_option("--stride", plan_args.stride, "Use every k-th layer")->capture_default_str();
  plan->add_flag("--positive-q1", plan_args.positive_q1, "Prefer the positive tilt branch");
  plan->add_option("--work-angle", plan_args.work_angle, "Torch work angle, deg")->capture_default_str();
  plan->add_option("--travel-angle", plan_args.travel_angle, "Torch travel angle, deg")->capture_default_str();
  plan->add_option("--out", plan_args.out, "Output directory")->capture_default_str();

  EmitArgs emit_args;
  auto* emit = app.add_subcommand("emit", "Translate an IR program into a robot dialect");
  emit->add_option("--program", emit_args.program, "IR program")->required()->check(CLI::ExistingFile);
  emit->add_option("--dialect", emit_args.dialect, "inform, rapid or karel")
      ->capture_default_str()
      ->check(CLI::IsMember({"inform", "rapid", "karel", "inform_like", "rapid_like", "karel_like"}));
  emit->add_option("--out", emit_args.out, "Output directory")->capture_default_str();

  EvalArgs eval_args;
  auto* evaluate = app.add_subcommand("evaluate", "Compare a scan against the CAD surface");
  evaluate->add_option("--cad", eval_args.cad, "CAD surface (STL)")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--scan", eval_args.scan, "Scan cloud (PLY or XYZ)")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--geometry", eval_args.geometry, "Geometry label for the report");
  evaluate->add_option("--material", eval_args.material, "Material label for the report");
  evaluate->add_option("--nominal-width", eval_args.nominal_width, "Width reported for single-sided scans, mm");
  evaluate->add_option("--density", eval_args.density, "Mid-surface samples per mm^2")->capture_default_str();
  evaluate->add_option("--out", eval_args.out, "Output directory")->capture_default_str();

  SampleArgs sample_args;
  auto* sample = app.add_subcommand("sample", "Sample a mesh into a point cloud");
  sample->add_option("--mesh", sample_args.mesh, "STL surface")->required()->check(CLI::ExistingFile);
  sample->add_option("--density", sample_args.density, "Points per mm^2")->capture_default_str();
  sample->add_option("--out", sample_args.out, "Output file (.ply or .xyz)")->capture_default_str();

  FixtureArgs fixture_args;
  auto* fixture = app.add_subcommand("fixture", "Write a test geometry as STL");
  fixture->add_option("--kind", fixture_args.kind, "wall, cylinder, sphere_cap, blade or flat")
      ->capture_default_str()
      ->check(CLI::IsMember({"wall", "cylinder", "sphere_cap", "blade", "flat"}));
  fixture->add_option("--step", fixture_args.step, "Mesh resolution, mm")->capture_default_str();
  fixture->add_option("--out", fixture_args.out, "Output STL");

  MonitorArgs mon_args;
  auto* monitor = app.add_subcommand("monitor-sim", "Replay IR frames and pick dense slices");
  monitor->add_option("--frames", mon_args.frames, "Directory of 16-bit PGM frames")->required()->check(CLI::ExistingDirectory);
  monitor->add_option("--template", mon_args.tmpl, "Torch edge template (PGM)")->required()->check(CLI::ExistingFile);
  monitor->add_option("--anchor", mon_args.anchor, "Template anchor file")->required()->check(CLI::ExistingFile);
  monitor->add_option("--plan", mon_args.plan, "Densely sliced plan")->required()->check(CLI::ExistingFile);
  monitor->add_option("--px-per-mm", mon_args.px_per_mm, "Image scale")->capture_default_str()->check(CLI::PositiveNumber);
  monitor->add_option("--threshold", mon_args.threshold, "Flame intensity threshold")->capture_default_str();
  monitor->add_option("--nominal-standoff", mon_args.nominal_standoff, "Commanded standoff, mm")->capture_default_str();
  monitor->add_option("--nominal-height", mon_args.nominal_height, "Deposition height, mm (default: material)");
  monitor->add_option("--material", mon_args.material, "Material name")->capture_default_str();
  monitor->add_option("--materials", mon_args.materials, "Material table (INI)");
  monitor->add_option("--out", mon_args.out, "Output directory")->capture_default_str();

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth-frames", "Write a synthetic IR sequence and torch template");
  synth->add_option("--count", synth_args.count, "Frames")->capture_default_str();
  synth->add_option("--start", synth_args.start_standoff, "First standoff, mm")->capture_default_str();
  synth->add_option("--end", synth_args.end_standoff, "Last standoff, mm")->capture_default_str();
  synth->add_option("--px-per-mm", synth_args.px_per_mm, "Image scale")->capture_default_str();
  synth->add_option("--noise", synth_args.noise, "Noise sigma, fraction of full scale")->capture_default_str();
  synth->add_option("--out", synth_args.out, "Output directory")->capture_default_str();

  VizArgs viz_args;
  auto* viz = app.add_subcommand("viz", "Export plot files (PLY, SVG)");
  viz->add_option("--plan", viz_args.plan, "Slice plan")->check(CLI::ExistingFile);
  viz->add_option("--program", viz_args.program, "IR program")->check(CLI::ExistingFile);
  viz->add_option("--stride", viz_args.stride, "Layer stride")->capture_default_str();
  viz->add_option("--out", viz_args.out, "Output directory")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  const CLI::App* active = app.get_subcommands().front();
  const std::string stage = active->get_name();
  try {
    if (active == slice) run_slice(slice_args);
    else if (active == warp) run_warp(warp_args);
    else if (active == plan) run_plan(plan_args);
    else if (active == emit) run_emit(emit_args);
    else if (active == evaluate) run_evaluate(eval_args);
    else if (active == sample) run_sample(sample_args, seed);
    else if (active == fixture) run_fixture(fixture_args);
    else if (active == monitor) run_monitor_sim(mon_args);
    else if (active == synth) run_synth_frames(synth_args, seed);
    else if (active == viz) run_viz(viz_args);
  } catch (const waam::ParseError& e) {
    std::cerr << "error [" << stage << "] " << waam::to_string(e.code()) << " at line " << e.line()
              << ", column " << e.column() << ": " << e.what() << '\n';
    return 2;
  } catch (const waam::Error& e) {
    std::cerr << "error [" << stage << "] " << waam::to_string(e.code()) << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error [" << stage << "] " << e.what() << '\n';
    return 1;
  }
  return 0;
}
