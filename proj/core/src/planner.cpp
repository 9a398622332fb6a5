#include "waam/planner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "waam/error.hpp"

namespace waam {

namespace {

PathSample lerp(const PathSample& a, const PathSample& b, double u) {
  PathSample out;
  out.p = (1.0 - u) * a.p + u * b.p;
  out.t = ((1.0 - u) * a.t + u * b.t).normalized();
  out.a = ((1.0 - u) * a.a + u * b.a).normalized();
  return out;
}

struct Station {
  std::size_t from, to;
  double u;
};

std::vector<Station> stations(const std::vector<Point3>& pts, bool closed, double d_r) {
  require(d_r > 0.0, ErrorCode::InvalidArgument, "waypoint spacing d_r must be positive");
  const std::size_t n = pts.size();
  require(n >= 2, ErrorCode::InvalidArgument, "path needs at least two samples");
  std::vector<double> s(closed ? n + 1 : n, 0.0);
  for (std::size_t i = 1; i < s.size(); ++i) s[i] = s[i - 1] + (pts[i % n] - pts[i - 1]).norm();
  const double length = s.back();
  const auto intervals = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(length / d_r + 1e-6)));
  const double step = length / static_cast<double>(intervals);

  std::vector<Station> out;
  std::size_t seg = 0;
  for (std::size_t k = 0; k <= intervals; ++k) {
    const double target = k == intervals ? length : step * static_cast<double>(k);
    while (seg + 2 < s.size() && s[seg + 1] < target) ++seg;
    const double span = s[seg + 1] - s[seg];
    const double u = span > 0.0 ? std::clamp((target - s[seg]) / span, 0.0, 1.0) : 0.0;
    out.push_back({seg % n, (seg + 1) % n, u});
  }
  return out;
}

std::vector<Point3> positions(const ToolPath& path) {
  std::vector<Point3> pts;
  pts.reserve(path.samples.size());
  for (const auto& s : path.samples) pts.push_back(s.p);
  return pts;
}

void append_segment(ToolPath& path, const LayerSegment& seg, bool reverse) {
  const std::size_t n = seg.size();
  for (std::size_t k = 0; k < n; ++k) {
    const auto& lp = seg[reverse ? n - 1 - k : k];
    path.samples.push_back({lp.p, reverse ? Vec3(-lp.t) : lp.t, lp.a});
  }
}

Waypoint make_waypoint(const PathSample& s, const PositionerState& q, bool arc_on,
                       double work_angle, double travel_angle) {
  Waypoint wp;
  wp.torch.position = s.p;
  wp.torch.orientation = torch_orientation(s.a, s.t, work_angle, travel_angle);
  wp.positioner = q;
  wp.arc_on = arc_on;
  return wp;
}

}  // namespace

std::vector<ToolPath> build_paths(const SlicePlan& plan, const PathOptions& options) {
  const std::size_t stride = std::max<std::size_t>(1, options.layer_stride);
  std::vector<ToolPath> paths;
  std::optional<ToolPath> spiral;
  std::size_t open_count = 0;

  for (std::size_t i = 0; i < plan.layers.size(); i += stride) {
    const Layer& layer = plan.layers[i];
    if (options.spiral && layer.segments.size() == 1) {
      if (!spiral) spiral.emplace();
      append_segment(*spiral, layer.segments.front(), false);
      continue;
    }
    if (spiral) {
      paths.push_back(std::move(*spiral));
      spiral.reset();
    }
    for (const auto& seg : layer.segments) {
      ToolPath path;
      path.closed = layer.closed && layer.segments.size() == 1;
      const bool reverse = !path.closed && options.alternate && (open_count % 2 == 1);
      if (!path.closed) ++open_count;
      append_segment(path, seg, reverse);
      paths.push_back(std::move(path));
    }
  }
  if (spiral) paths.push_back(std::move(*spiral));
  return paths;
}

ToolPath resample_path(const ToolPath& path, double d_r) {
  ToolPath out;
  out.closed = path.closed;
  for (const auto& st : stations(positions(path), path.closed, d_r)) {
    out.samples.push_back(lerp(path.samples[st.from], path.samples[st.to], st.u));
  }
  return out;
}

Rotation3 torch_orientation(const Vec3& a, const Vec3& t, double work_angle,
                            double travel_angle) {
  const Vec3 z = -a.normalized();
  Vec3 x = t - t.dot(z) * z;
  if (x.norm() < 1e-12) x = any_orthogonal(z);
  x.normalize();
  const Vec3 y = z.cross(x);
  Rotation3 r;
  r.col(0) = x;
  r.col(1) = y;
  r.col(2) = z;
  if (work_angle != 0.0) r = r * axis_rotation(kAxisX, work_angle);
  if (travel_angle != 0.0) r = r * axis_rotation(kAxisY, travel_angle);
  return r;
}

std::vector<Waypoint> discretize(const SlicePlan& plan, const PositionerTrajectory& trajectory,
                                 double d_r, const PathOptions& options) {
  require(d_r > 0.0, ErrorCode::InvalidArgument, "waypoint spacing d_r must be positive");
  const auto paths = build_paths(plan, options);
  require(!paths.empty(), ErrorCode::InvalidArgument, "slice plan is empty");

  std::size_t total = 0;
  for (const auto& p : paths) total += p.samples.size();
  require(trajectory.states.size() == total, ErrorCode::InvalidArgument,
          "trajectory has " + std::to_string(trajectory.states.size()) +
              " states for " + std::to_string(total) + " path samples");

  std::vector<Waypoint> out;
  std::size_t offset = 0;
  for (const auto& path : paths) {
    bool first = true;
    for (const auto& st : stations(positions(path), path.closed, d_r)) {
      const auto& qa = trajectory.states[offset + st.from];
      const auto& qb = trajectory.states[offset + st.to];
      const PositionerState q{(1.0 - st.u) * qa.q1 + st.u * qb.q1,
                              (1.0 - st.u) * qa.q2 + st.u * qb.q2};
      out.push_back(make_waypoint(lerp(path.samples[st.from], path.samples[st.to], st.u), q,
                                  !first, 0.0, 0.0));
      first = false;
    }
    offset += path.samples.size();
  }
  return out;
}

double torch_world_distance(const Waypoint& from, const Waypoint& to) {
  const Point3 a = base_orientation(from.positioner) * from.torch.position;
  const Point3 b = base_orientation(to.positioner) * to.torch.position;
  return (b - a).norm();
}

std::vector<MotionSegment> coordinate_speeds(const std::vector<Waypoint>& waypoints, double d_r,
                                             double v_r, const std::string& group) {
  require(v_r > 0.0, ErrorCode::InvalidArgument, "relative speed v_r must be positive");
  require(d_r > 0.0, ErrorCode::InvalidArgument, "waypoint spacing d_r must be positive");
  const double slot = d_r / v_r;
  std::vector<MotionSegment> out;
  out.reserve(waypoints.size());
  for (std::size_t i = 0; i < waypoints.size(); ++i) {
    MotionSegment seg;
    seg.primitive = Primitive::MoveL;
    seg.target = waypoints[i];
    seg.group = group;
    const double d1 = i == 0 ? 0.0 : torch_world_distance(waypoints[i - 1], waypoints[i]);
    seg.speed = d1 > 0.0 ? d1 / slot : v_r;
    out.push_back(std::move(seg));
  }
  return out;
}

double segment_duration(const MotionProgram& program, std::size_t i) {
  const double slot = program.d_r / program.v_r;
  if (i == 0) return slot;
  const double d1 =
      torch_world_distance(program.segments[i - 1].target, program.segments[i].target);
  return d1 > 0.0 ? d1 / program.segments[i].speed : slot;
}

double torch_duration(const MotionProgram& program) {
  double total = 0.0;
  for (std::size_t i = 0; i < program.segments.size(); ++i) total += segment_duration(program, i);
  return total;
}

double positioner_duration(const MotionProgram& program) {
  return static_cast<double>(program.segments.size()) * program.d_r / program.v_r;
}

PlanResult plan_print(const SlicePlan& plan, const MaterialParams& material,
                      const PlanOptions& options) {
  require(!plan.layers.empty(), ErrorCode::InvalidArgument, "slice plan is empty");
  const double v_r = options.v_r.value_or(material.torch_speed_mm_s);
  require(v_r > 0.0, ErrorCode::InvalidArgument, "relative speed v_r must be positive");

  const SlicePlan& source = plan;
  SlicePlan warped;
  const bool need_warp = options.paths.spiral && !plan.warped;
  if (need_warp) warped = warp_layers(plan);
  const auto paths = build_paths(need_warp ? warped : source, options.paths);

  std::vector<PathSample> samples;
  std::vector<bool> arc;
  for (const auto& path : paths) {
    if (path.samples.size() < 2) continue;
    const ToolPath resampled = resample_path(path, options.d_r);
    for (std::size_t k = 0; k < resampled.samples.size(); ++k) {
      samples.push_back(resampled.samples[k]);
      arc.push_back(k > 0);
    }
  }
  require(!samples.empty(), ErrorCode::InvalidArgument, "slice plan has no printable path");

  PositionerTrajectory raw;
  raw.singular_flags.assign(samples.size(), false);
  std::optional<double> previous_q2;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    try {
      const auto q = select_solution(gravity_align(samples[k].a.normalized()), options.policy,
                                     previous_q2);
      raw.states.push_back(q);
      previous_q2 = q.q2;
    } catch (const Error& e) {
      throw Error(e.code(), "waypoint " + std::to_string(k) + ": " + e.what());
    }
  }
  PositionerTrajectory held = handle_singularity(raw, options.singular_threshold);
  PositionerTrajectory smoothed;
  try {
    smoothed = smooth_trajectory(held, options.smoothing_window);
  } catch (const Error& e) {
    throw Error(e.code(), std::string("positioner smoothing: ") + e.what());
  }

  std::vector<Waypoint> waypoints;
  waypoints.reserve(samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k) {
    waypoints.push_back(make_waypoint(samples[k], smoothed.states[k], arc[k], options.work_angle,
                                      options.travel_angle));
  }

  PlanResult result;
  result.program = MotionProgram::with_default_cell();
  result.program.d_r = options.d_r;
  result.program.v_r = v_r;
  result.program.material = material.name;
  result.program.feed_rate_ipm = material.feed_rate_ipm;
  result.program.segments = coordinate_speeds(waypoints, options.d_r, v_r, "cell");
  result.trajectory = std::move(smoothed);
  return result;
}

std::string trajectory_csv(const PositionerTrajectory& trajectory) {
  std::string out = "index,q1_deg,q2_deg,singular\n";
  char buf[96];
  for (std::size_t i = 0; i < trajectory.states.size(); ++i) {
    const bool flag = i < trajectory.singular_flags.size() && trajectory.singular_flags[i];
    std::snprintf(buf, sizeof buf, "%zu,%.6f,%.6f,%d\n", i, rad2deg(trajectory.states[i].q1),
                  rad2deg(trajectory.states[i].q2), flag ? 1 : 0);
    out += buf;
  }
  return out;
}

}  // namespace waam
