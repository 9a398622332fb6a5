#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "waam/cloud.hpp"
#include "waam/mesh.hpp"
#include "waam/slicer.hpp"
#include "waam/types.hpp"

namespace waam {

struct RigidTransform {
  Rotation3 rotation = Rotation3::Identity();
  Vec3 translation = Vec3::Zero();

  Point3 apply(const Point3& p) const { return rotation * p + translation; }
  RigidTransform inverse() const;
  /// (this * other).apply(p) == this->apply(other.apply(p)).
  RigidTransform operator*(const RigidTransform& other) const;
  double rotation_angle() const;  // rad
};

PointCloud transform_cloud(const PointCloud& cloud, const RigidTransform& t);

/// Area-weighted uniform samples with face normals; round(area * density)
/// points. Identical seeds give identical clouds.
PointCloud sample_mesh(const TriMesh& mesh, double density, std::uint64_t seed = 1);

/// Least-squares rigid transform taking `from` onto `to` (Kabsch, SVD).
RigidTransform best_fit_transform(const std::vector<Point3>& from, const std::vector<Point3>& to);

struct IcpOptions {
  std::size_t max_iterations = 100;
  double tolerance = 1e-6;      // mm, minimum improvement of the mean distance
  double trim_fraction = 0.2;   // worst correspondences dropped each iteration
  double keep_within_median = 3.0;  // ...unless no farther than this multiple of the median
  std::size_t divergence_window = 5;  // consecutive growing iterations, above twice the best
};

struct IcpResult {
  RigidTransform transform;     // maps source onto target
  std::size_t iterations = 0;
  std::size_t coarse_iterations = 0;  // of which untrimmed
  double mean_distance = 0.0;   // trimmed mean at `transform`
  bool converged = false;
  bool diverged = false;        // growth guard fired; transform is the best seen
  std::vector<double> history;  // trimmed mean distance per iteration
};

/// Point-to-point ICP on nearest neighbours: an untrimmed pass, then a
/// trimmed pass from its result. Limits in `options` apply per pass.
IcpResult icp_register(const PointCloud& source, const PointCloud& target,
                       const RigidTransform& init = {}, const IcpOptions& options = {});
/// Same, with closest points on the target surface as correspondences and a
/// Gauss-Newton step on the point-to-surface distance.
IcpResult icp_register(const PointCloud& source, const TriMesh& target,
                       const RigidTransform& init = {}, const IcpOptions& options = {});

inline constexpr double kEdgeAmbiguity = 0.05;  // mm

struct EdgeSplit {
  PointCloud left;   // negative normal side (inner)
  PointCloud right;  // positive normal side (outer)
  std::size_t ambiguous = 0;
};

/// Classifies points by the side of the reference surface they lie on.
/// Throws EmptyResult when either side ends up empty.
EdgeSplit split_edges(const PointCloud& cloud, const TriMesh& reference);
/// Reference given as sliced layers; each point takes the normal of its nearest layer sample.
EdgeSplit split_edges(const PointCloud& cloud, const SlicePlan& reference);

struct WidthOptions {
  double cone_half_angle = deg2rad(30.0);
  double search_radius = 5.0;  // mm
  double max_skip_fraction = 0.5;
};

struct WidthResult {
  std::vector<double> widths;
  std::size_t skipped = 0;
};

/// Perpendicular sum distance to the two edges for each mid-surface sample
/// (which must carry normals). Throws InsufficientCoverage when more than half
/// the samples find no edge point on one side.
WidthResult measure_width(const PointCloud& surface, const PointCloud& left, const PointCloud& right,
                          const WidthOptions& options = {});

struct EvalConfig {
  std::string geometry = "part";
  std::string material;
  IcpOptions icp;
  WidthOptions width;
  double surface_density = 1.0;        // mid-surface samples per mm^2
  std::optional<double> nominal_width; // used when the scan shows a single side
  std::uint64_t seed = 1;
};

struct EvalReport {
  std::string geometry;
  std::string material;
  double e_avg = 0.0;
  double e_max = 0.0;
  double width_mean = 0.0;
  double width_std = 0.0;
  double width_variation = 0.0;  // sigma / mean, percent
  std::string width_source;      // "measured" or "nominal"
  std::size_t width_samples = 0;
  std::size_t width_skipped = 0;
  std::size_t ambiguous_points = 0;
  std::size_t scan_points = 0;
  double icp_residual = 0.0;
  std::size_t icp_iterations = 0;
  bool icp_converged = false;
  bool icp_diverged = false;
  RigidTransform alignment;
};

EvalReport evaluate(const TriMesh& cad, const PointCloud& scan, const EvalConfig& config = {});

std::string format_report(const EvalReport& report);
/// key=value lines; the first five mirror the part evaluation table columns.
std::string format_report_kv(const EvalReport& report);

}  // namespace waam
