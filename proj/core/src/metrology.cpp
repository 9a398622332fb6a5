#include "waam/metrology.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/SVD>

#include "waam/error.hpp"
#include "waam/kdtree.hpp"
#include "waam/mesh_query.hpp"

namespace waam {

RigidTransform RigidTransform::inverse() const {
  RigidTransform inv;
  inv.rotation = rotation.transpose();
  inv.translation = -(inv.rotation * translation);
  return inv;
}

RigidTransform RigidTransform::operator*(const RigidTransform& other) const {
  RigidTransform out;
  out.rotation = rotation * other.rotation;
  out.translation = rotation * other.translation + translation;
  return out;
}

double RigidTransform::rotation_angle() const {
  return std::acos(std::clamp((rotation.trace() - 1.0) / 2.0, -1.0, 1.0));
}

PointCloud transform_cloud(const PointCloud& cloud, const RigidTransform& t) {
  PointCloud out;
  out.points.reserve(cloud.points.size());
  for (const auto& p : cloud.points) out.points.push_back(t.apply(p));
  if (cloud.has_normals()) {
    out.normals.reserve(cloud.normals.size());
    for (const auto& n : cloud.normals) out.normals.push_back(t.rotation * n);
  }
  return out;
}

PointCloud sample_mesh(const TriMesh& mesh, double density, std::uint64_t seed) {
  require(density > 0.0, ErrorCode::InvalidArgument, "sampling density must be positive");
  std::vector<double> cdf;
  cdf.reserve(mesh.faces.size());
  double total = 0.0;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    total += mesh.face_area(f);
    cdf.push_back(total);
  }
  require(total > 0.0, ErrorCode::Degenerate, "cannot sample a mesh with zero area");

  const auto count = static_cast<std::size_t>(std::llround(total * density));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  PointCloud cloud;
  cloud.points.reserve(count);
  cloud.normals.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double u = unit(rng) * total;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const auto f = static_cast<std::size_t>(std::min<std::ptrdiff_t>(
        it - cdf.begin(), static_cast<std::ptrdiff_t>(cdf.size()) - 1));
    const auto& tri = mesh.faces[f];
    const double s = std::sqrt(unit(rng));
    const double r = unit(rng);
    const Point3& a = mesh.vertices[tri[0]];
    const Point3& b = mesh.vertices[tri[1]];
    const Point3& c = mesh.vertices[tri[2]];
    cloud.points.push_back((1.0 - s) * a + s * (1.0 - r) * b + s * r * c);
    cloud.normals.push_back(mesh.face_normal(f));
  }
  return cloud;
}

RigidTransform best_fit_transform(const std::vector<Point3>& from, const std::vector<Point3>& to) {
  require(from.size() == to.size() && from.size() >= 3, ErrorCode::InvalidArgument,
          "rigid fit needs at least three paired points");
  Point3 cf = Point3::Zero(), ct = Point3::Zero();
  for (std::size_t i = 0; i < from.size(); ++i) {
    cf += from[i];
    ct += to[i];
  }
  cf /= static_cast<double>(from.size());
  ct /= static_cast<double>(to.size());
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < from.size(); ++i) h += (from[i] - cf) * (to[i] - ct).transpose();
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Matrix3d u = svd.matrixU();
  const Eigen::Matrix3d v = svd.matrixV();
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (v * u.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  RigidTransform t;
  t.rotation = v * d * u.transpose();
  t.translation = ct - t.rotation * cf;
  return t;
}

namespace {

struct Match {
  Point3 point;
  Vec3 normal = Vec3::Zero();  // surface normal at the match; zero for cloud targets
};

using Correspond = std::function<Match(const Point3&)>;

Correspond mesh_matcher(const MeshQuery& query) {
  return [&query](const Point3& p) {
    const MeshQuery::Hit hit = query.closest(p);
    return Match{hit.point, query.mesh().face_normal(hit.face)};
  };
}

// Gauss-Newton step on the point-to-surface distance, linearised along the
// direction from each match to its source point.
RigidTransform surface_step(const std::vector<Point3>& from, const std::vector<Point3>& to,
                            const std::vector<Vec3>& dirs) {
  Eigen::Matrix<double, 6, 6> a = Eigen::Matrix<double, 6, 6>::Zero();
  Eigen::Matrix<double, 6, 1> b = Eigen::Matrix<double, 6, 1>::Zero();
  for (std::size_t i = 0; i < from.size(); ++i) {
    Eigen::Matrix<double, 6, 1> j;
    j.head<3>() = from[i].cross(dirs[i]);
    j.tail<3>() = dirs[i];
    a += j * j.transpose();
    b += j * dirs[i].dot(from[i] - to[i]);
  }
  const Eigen::Matrix<double, 6, 1> x = -a.ldlt().solve(b);
  RigidTransform step;
  const double angle = x.head<3>().norm();
  if (std::isfinite(angle) && angle > 0.0)
    step.rotation = Eigen::AngleAxisd(angle, x.head<3>() / angle).toRotationMatrix();
  if (x.tail<3>().allFinite()) step.translation = x.tail<3>();
  return step;
}

// One ICP run. trim_fraction and keep_within_median come from `options`.
RigidTransform icp_stage(const PointCloud& source, const Correspond& nearest, bool surface,
                         const RigidTransform& init, const IcpOptions& options, IcpResult& result) {
  const std::size_t n = source.size();
  const std::size_t keep = std::max<std::size_t>(
      3, static_cast<std::size_t>(std::ceil((1.0 - options.trim_fraction) * static_cast<double>(n))));

  RigidTransform current = init;
  RigidTransform best_transform = init;
  double best = std::numeric_limits<double>::infinity();
  double previous = std::numeric_limits<double>::infinity();
  std::size_t growth = 0;

  std::vector<Point3> moved(n);
  std::vector<Match> matched(n);
  std::vector<double> dist(n);
  std::vector<std::size_t> order(n);
  std::vector<Point3> from, to;
  std::vector<Vec3> dirs;

  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      moved[i] = current.apply(source.points[i]);
      matched[i] = nearest(moved[i]);
      dist[i] = (matched[i].point - moved[i]).norm();
    }
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
    const double gate = options.keep_within_median * dist[order[n / 2]];
    std::size_t used = keep;
    while (used < n && dist[order[used]] <= gate) ++used;
    double sum = 0.0;
    for (std::size_t k = 0; k < used; ++k) sum += dist[order[k]];
    const double mean = sum / static_cast<double>(used);

    ++result.iterations;
    result.history.push_back(mean);
    result.mean_distance = mean;
    if (mean < best) {
      best = mean;
      best_transform = current;
    }
    if (mean == 0.0 || std::abs(previous - mean) < options.tolerance) {
      result.converged = true;
      return current;
    }
    // Trimmed objectives can rise briefly on the way to the true alignment;
    // only sustained growth well above the best seen counts as divergence.
    growth = mean > previous ? growth + 1 : 0;
    if (growth >= options.divergence_window && mean > 2.0 * best) {
      result.diverged = true;
      result.mean_distance = best;
      return best_transform;
    }
    previous = mean;

    from.clear();
    to.clear();
    dirs.clear();
    for (std::size_t k = 0; k < used; ++k) {
      const std::size_t i = order[k];
      from.push_back(moved[i]);
      to.push_back(matched[i].point);
      if (surface) dirs.push_back(dist[i] > 1e-12 ? Vec3((moved[i] - matched[i].point) / dist[i]) : matched[i].normal);
    }
    current = (surface ? surface_step(from, to, dirs) : best_fit_transform(from, to)) * current;
  }
  return current;
}

// Untrimmed first, so points overhanging the target boundary still pull a
// sliding misalignment back; then trimmed, to shed outliers.
IcpResult icp_core(const PointCloud& source, const Correspond& nearest, bool surface, const RigidTransform& init,
                   const IcpOptions& options) {
  require(source.size() >= 3, ErrorCode::InvalidArgument, "ICP source needs at least three points");
  require(options.trim_fraction >= 0.0 && options.trim_fraction < 1.0, ErrorCode::InvalidArgument,
          "trim fraction must lie in [0, 1)");
  IcpResult result;
  IcpOptions coarse = options;
  coarse.trim_fraction = 0.0;
  RigidTransform t = icp_stage(source, nearest, surface, init, coarse, result);
  result.coarse_iterations = result.iterations;
  if (options.trim_fraction > 0.0 && !result.diverged) {
    result.converged = false;
    t = icp_stage(source, nearest, surface, t, options, result);
  }
  result.transform = t;
  return result;
}

}  // namespace

IcpResult icp_register(const PointCloud& source, const PointCloud& target, const RigidTransform& init,
                       const IcpOptions& options) {
  require(!target.points.empty(), ErrorCode::InvalidArgument, "ICP target cloud is empty");
  const KdTree3 index(target.points);
  return icp_core(
      source, [&](const Point3& p) { return Match{target.points[index.nearest(p)]}; }, false, init, options);
}

IcpResult icp_register(const PointCloud& source, const TriMesh& target, const RigidTransform& init,
                       const IcpOptions& options) {
  const MeshQuery query(target);
  return icp_core(source, mesh_matcher(query), true, init, options);
}

namespace {

void assign(EdgeSplit& split, const PointCloud& cloud, std::size_t i, double side) {
  if (std::abs(side) < kEdgeAmbiguity) {
    ++split.ambiguous;
    return;
  }
  PointCloud& dest = side > 0.0 ? split.right : split.left;
  dest.points.push_back(cloud.points[i]);
  if (cloud.has_normals()) dest.normals.push_back(cloud.normals[i]);
}

void check_sides(const EdgeSplit& split) {
  require(!split.left.points.empty(), ErrorCode::EmptyResult, "no points on the inner (left) side");
  require(!split.right.points.empty(), ErrorCode::EmptyResult, "no points on the outer (right) side");
}

}  // namespace

EdgeSplit split_edges(const PointCloud& cloud, const TriMesh& reference) {
  const MeshQuery query(reference);
  EdgeSplit split;
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    assign(split, cloud, i, query.closest(cloud.points[i]).signed_distance);
  }
  check_sides(split);
  return split;
}

EdgeSplit split_edges(const PointCloud& cloud, const SlicePlan& reference) {
  std::vector<Point3> pts;
  std::vector<Vec3> normals;
  for (const auto& layer : reference.layers) {
    for (const auto& seg : layer.segments) {
      for (const auto& lp : seg) {
        pts.push_back(lp.p);
        normals.push_back(lp.n);
      }
    }
  }
  require(!pts.empty(), ErrorCode::InvalidArgument, "reference plan has no points");
  const KdTree3 index(pts);
  EdgeSplit split;
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const std::size_t j = index.nearest(cloud.points[i]);
    assign(split, cloud, i, normals[j].dot(cloud.points[i] - pts[j]));
  }
  check_sides(split);
  return split;
}

WidthResult measure_width(const PointCloud& surface, const PointCloud& left, const PointCloud& right,
                          const WidthOptions& options) {
  require(!surface.points.empty() && surface.has_normals(), ErrorCode::InvalidArgument,
          "width measurement needs mid-surface samples with normals");
  const double cos_cone = std::cos(options.cone_half_angle);
  const std::optional<KdTree3> left_index =
      left.points.empty() ? std::nullopt : std::optional<KdTree3>(std::in_place, left.points);
  const std::optional<KdTree3> right_index =
      right.points.empty() ? std::nullopt : std::optional<KdTree3>(std::in_place, right.points);

  // Projected distance to the nearest edge point inside the cone about `dir`.
  auto reach = [&](const std::optional<KdTree3>& index, const PointCloud& edge, const Point3& s,
                   const Vec3& dir) -> std::optional<double> {
    if (!index) return std::nullopt;
    for (const auto j : index->radius(s, options.search_radius)) {
      const Vec3 v = edge.points[j] - s;
      const double len = v.norm();
      if (len > 0.0 && v.dot(dir) >= len * cos_cone) return v.dot(dir);
    }
    return std::nullopt;
  };

  WidthResult result;
  for (std::size_t i = 0; i < surface.points.size(); ++i) {
    const Vec3 n = surface.normals[i].normalized();
    const auto r = reach(right_index, right, surface.points[i], n);
    const auto l = r ? reach(left_index, left, surface.points[i], -n) : std::nullopt;
    if (!r || !l) {
      ++result.skipped;
      continue;
    }
    result.widths.push_back(*r + *l);
  }
  const double skipped = static_cast<double>(result.skipped) / static_cast<double>(surface.points.size());
  require(skipped <= options.max_skip_fraction, ErrorCode::InsufficientCoverage,
          std::to_string(result.skipped) + " of " + std::to_string(surface.points.size()) +
              " width samples found no edge on one side");
  return result;
}

EvalReport evaluate(const TriMesh& cad, const PointCloud& scan, const EvalConfig& config) {
  require(scan.points.size() >= 10, ErrorCode::InvalidArgument, "evaluation needs at least 10 scan points");
  EvalReport report;
  report.geometry = config.geometry;
  report.material = config.material;
  report.scan_points = scan.points.size();

  const MeshQuery query(cad);
  const IcpResult icp = icp_core(scan, mesh_matcher(query), true, RigidTransform{}, config.icp);
  report.alignment = icp.transform;
  report.icp_residual = icp.mean_distance;
  report.icp_iterations = icp.iterations;
  report.icp_converged = icp.converged;
  report.icp_diverged = icp.diverged;

  const PointCloud aligned = transform_cloud(scan, icp.transform);
  double sum = 0.0;
  for (const auto& p : aligned.points) {
    const double d = query.closest(p).distance;
    sum += d;
    report.e_max = std::max(report.e_max, d);
  }
  report.e_avg = sum / static_cast<double>(aligned.points.size());

  try {
    const EdgeSplit split = split_edges(aligned, cad);
    report.ambiguous_points = split.ambiguous;
    const PointCloud surface = sample_mesh(cad, config.surface_density, config.seed);
    const WidthResult widths = measure_width(surface, split.left, split.right, config.width);
    report.width_samples = widths.widths.size();
    report.width_skipped = widths.skipped;
    double s = 0.0, s2 = 0.0;
    for (const double w : widths.widths) s += w;
    report.width_mean = s / static_cast<double>(widths.widths.size());
    for (const double w : widths.widths) s2 += (w - report.width_mean) * (w - report.width_mean);
    report.width_std = std::sqrt(s2 / static_cast<double>(widths.widths.size()));
    report.width_variation = report.width_mean > 0.0 ? 100.0 * report.width_std / report.width_mean : 0.0;
    report.width_source = "measured";
  } catch (const Error& e) {
    const bool one_sided = e.code() == ErrorCode::EmptyResult || e.code() == ErrorCode::InsufficientCoverage;
    if (!one_sided || !config.nominal_width) throw;
    report.width_mean = *config.nominal_width;
    report.width_std = 0.0;
    report.width_variation = 0.0;
    report.width_source = "nominal";
  }
  return report;
}

namespace {

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

}  // namespace

std::string format_report(const EvalReport& r) {
  std::string out = "WAAM part evaluation\n";
  out += "  Geometry          " + r.geometry + '\n';
  out += "  Material          " + (r.material.empty() ? std::string("-") : r.material) + '\n';
  out += "  e_avg             " + fmt("%.2f", r.e_avg) + " mm\n";
  out += "  e_max             " + fmt("%.2f", r.e_max) + " mm\n";
  out += "  sigma(w)/mu(w)    " + fmt("%.2f", r.width_variation) + " %\n";
  out += "  mu(w)             " + fmt("%.3f", r.width_mean) + " mm (" + r.width_source + ")\n";
  out += "  sigma(w)          " + fmt("%.3f", r.width_std) + " mm\n";
  out += "  width samples     " + std::to_string(r.width_samples) + " (skipped " +
         std::to_string(r.width_skipped) + ")\n";
  out += "  scan points       " + std::to_string(r.scan_points) + " (ambiguous " +
         std::to_string(r.ambiguous_points) + ")\n";
  out += "  ICP               " + std::to_string(r.icp_iterations) + " iterations, residual " +
         fmt("%.6f", r.icp_residual) + " mm" + (r.icp_converged ? ", converged" : "") +
         (r.icp_diverged ? ", diverged" : "") + '\n';
  return out;
}

std::string format_report_kv(const EvalReport& r) {
  std::string out;
  out += "Geometry=" + r.geometry + '\n';
  out += "Material=" + r.material + '\n';
  out += "e_avg_mm=" + fmt("%.9f", r.e_avg) + '\n';
  out += "e_max_mm=" + fmt("%.9f", r.e_max) + '\n';
  out += "width_variation_pct=" + fmt("%.6f", r.width_variation) + '\n';
  out += "width_mean_mm=" + fmt("%.6f", r.width_mean) + '\n';
  out += "width_std_mm=" + fmt("%.6f", r.width_std) + '\n';
  out += "width_source=" + r.width_source + '\n';
  out += "width_samples=" + std::to_string(r.width_samples) + '\n';
  out += "width_skipped=" + std::to_string(r.width_skipped) + '\n';
  out += "ambiguous_points=" + std::to_string(r.ambiguous_points) + '\n';
  out += "icp_residual_mm=" + fmt("%.9f", r.icp_residual) + '\n';
  out += "icp_iterations=" + std::to_string(r.icp_iterations) + '\n';
  out += "icp_converged=" + std::string(r.icp_converged ? "1" : "0") + '\n';
  out += "icp_diverged=" + std::string(r.icp_diverged ? "1" : "0") + '\n';
  return out;
}

}  // namespace waam
