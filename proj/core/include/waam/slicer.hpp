#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "waam/geometry.hpp"
#include "waam/mesh.hpp"
#include "waam/types.hpp"

namespace waam {

/// One sample on a sliced curve.
struct LayerPoint {
  Point3 p;           // position, mm
  Vec3 t;             // unit path tangent
  Vec3 n;             // unit outward surface normal, orthogonal to t
  Vec3 a;             // unit increment direction, t x n
  double lambda = 0;  // path length from the start of the segment, mm
};

using LayerSegment = std::vector<LayerPoint>;

struct Layer {
  std::vector<LayerSegment> segments;
  std::size_t index = 0;
  bool closed = false;
  double total_length = 0.0;  // sum of per-segment path lengths, mm
  // Set when some projection failed or a segment end was extended, i.e. the
  // layer touches the surface boundary or was split.
  bool touches_boundary = false;

  bool empty() const noexcept { return segments.empty(); }
  std::size_t point_count() const noexcept;
};

struct SlicePlan {
  std::vector<Layer> layers;
  double h = 1.0;         // height increment, mm
  double sampling = 0.5;  // base-layer point spacing, mm
  std::string source;
  bool warped = false;
};

struct SliceOptions {
  double h = 1.0;
  double sampling = 0.5;
  std::size_t neighbours = kDefaultNeighbours;
  std::size_t max_layers = 100000;
};

/// Meridian profile sample for axisymmetric parts.
struct ProfilePoint {
  double r;  // radius, mm
  double z;  // height, mm
};

/// Intersects the mesh with `base_plane`, chains the crossings into polylines
/// and resamples them at uniform arc length. Segments are oriented so that the
/// increment direction points along +base_plane.normal.
Layer sample_base_layer(const TriMesh& mesh, const Plane& base_plane, double spacing);

/// Advances every point by h along its increment direction and projects it
/// back onto the surface. Failed projections split segments; surviving segment
/// ends are extended along the tangent until two consecutive projections fail.
/// An empty result means the surface is exhausted.
Layer next_layer(const SurfaceProjector& surface, const Layer& layer, double h, double spacing);
Layer next_layer(const TriMesh& mesh, const Layer& layer, double h, std::size_t n,
                 double spacing);

/// Layer 0 is cut at the lowest z of the mesh; layers are generated until one
/// comes back empty or `max_layers` is hit (RunawayGuard).
SlicePlan slice_surface(const TriMesh& mesh, const SliceOptions& options);
SlicePlan slice_surface(const TriMesh& mesh, double h, double spacing, std::size_t n);

/// Concentric circles about the z axis, one per arc-length step h along the profile.
SlicePlan slice_axisymmetric(std::span<const ProfilePoint> profile, double h, double spacing);

/// Blends layer i+1 into layer i by path-length fraction so that the stack
/// becomes one continuous spiral. Layer 0 is unchanged.
SlicePlan warp_layers(const SlicePlan& plan);

/// Uniform arc-length resampling of a polyline with per-vertex normals.
/// Closed polylines wrap and do not repeat the first point.
LayerSegment resample_segment(std::span<const Point3> points, std::span<const Vec3> normals,
                              double spacing, bool closed);

/// Recomputes t (central differences, one-sided at open ends), re-orthogonalised n,
/// a = t x n and cumulative lambda from the positions and raw normals in `segment`.
void recompute_frames(LayerSegment& segment, bool closed);

}  // namespace waam
