#include "waam/slicer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <utility>

#include "waam/error.hpp"

namespace waam {

namespace {

constexpr double kOnPlaneTolerance = 1e-9;

// Uniform resampling at `count` stations; shared by the spacing- and
// count-driven entry points.
LayerSegment resample_count(std::span<const Point3> points, std::span<const Vec3> normals,
                            std::size_t count, bool closed) {
  const std::size_t n = points.size();
  std::vector<double> s(closed ? n + 1 : n, 0.0);
  for (std::size_t i = 1; i < s.size(); ++i) {
    s[i] = s[i - 1] + (points[i % n] - points[i - 1]).norm();
  }
  const double length = s.back();
  const double step = closed ? length / static_cast<double>(count)
                             : length / static_cast<double>(count - 1);

  LayerSegment out;
  out.reserve(count);
  std::size_t seg = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const double target = (!closed && k + 1 == count) ? length : step * static_cast<double>(k);
    while (seg + 2 < s.size() && s[seg + 1] < target) ++seg;
    const double span = s[seg + 1] - s[seg];
    const double u = span > 0.0 ? std::clamp((target - s[seg]) / span, 0.0, 1.0) : 0.0;
    const std::size_t i0 = seg % n;
    const std::size_t i1 = (seg + 1) % n;
    LayerPoint lp;
    lp.p = (1.0 - u) * points[i0] + u * points[i1];
    lp.n = (1.0 - u) * normals[i0] + u * normals[i1];
    out.push_back(lp);
  }
  recompute_frames(out, closed);
  return out;
}

double polyline_length(std::span<const Point3> points, bool closed) {
  double length = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) length += (points[i] - points[i - 1]).norm();
  if (closed && points.size() > 1) length += (points.front() - points.back()).norm();
  return length;
}

void finish_layer(Layer& layer) {
  layer.total_length = 0.0;
  for (const auto& seg : layer.segments) {
    if (!seg.empty()) layer.total_length += seg.back().lambda;
  }
}

struct Chain {
  std::vector<Point3> points;
  std::vector<Vec3> normals;
  bool closed = false;
};

// Node identity for plane/mesh crossings: a vertex lying on the plane is
// (v, v); an edge crossing is (lo, hi) with lo < hi.
using NodeKey = std::pair<std::uint32_t, std::uint32_t>;

std::vector<Chain> intersect_and_chain(const TriMesh& mesh, const Plane& plane) {
  const auto vnormals = mesh.vertex_normals();
  std::vector<double> dist(mesh.vertices.size());
  std::vector<int> side(mesh.vertices.size());
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    dist[i] = plane.signed_distance(mesh.vertices[i]);
    side[i] = std::abs(dist[i]) <= kOnPlaneTolerance ? 0 : (dist[i] > 0.0 ? 1 : -1);
  }

  std::map<NodeKey, std::size_t> node_ids;
  std::vector<Point3> node_pos;
  std::vector<Vec3> node_normal;
  auto node_for = [&](NodeKey key) -> std::size_t {
    auto [it, inserted] = node_ids.try_emplace(key, node_pos.size());
    if (inserted) {
      if (key.first == key.second) {
        node_pos.push_back(mesh.vertices[key.first]);
        node_normal.push_back(vnormals[key.first]);
      } else {
        const auto a = key.first, b = key.second;
        const double u = dist[a] / (dist[a] - dist[b]);
        node_pos.push_back(mesh.vertices[a] + u * (mesh.vertices[b] - mesh.vertices[a]));
        node_normal.push_back(((1.0 - u) * vnormals[a] + u * vnormals[b]).normalized());
      }
    }
    return it->second;
  };

  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::map<std::pair<std::size_t, std::size_t>, bool> seen;
  for (const auto& f : mesh.faces) {
    if (side[f[0]] == 0 && side[f[1]] == 0 && side[f[2]] == 0) continue;
    std::vector<std::size_t> hits;
    for (int k = 0; k < 3; ++k) {
      const auto a = f[k], b = f[(k + 1) % 3];
      if (side[a] == 0) hits.push_back(node_for({a, a}));
      if (side[a] * side[b] < 0) hits.push_back(node_for({std::min(a, b), std::max(a, b)}));
    }
    if (hits.size() != 2 || hits[0] == hits[1]) continue;
    auto key = std::minmax(hits[0], hits[1]);
    if (seen.emplace(key, true).second) edges.emplace_back(hits[0], hits[1]);
  }

  std::vector<std::vector<std::size_t>> incident(node_pos.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    incident[edges[e].first].push_back(e);
    incident[edges[e].second].push_back(e);
  }

  std::vector<bool> used(edges.size(), false);
  std::vector<Chain> chains;
  auto walk = [&](std::size_t start, bool closed) {
    Chain chain;
    chain.closed = closed;
    std::size_t node = start;
    chain.points.push_back(node_pos[node]);
    chain.normals.push_back(node_normal[node]);
    while (true) {
      std::optional<std::size_t> next_edge;
      for (auto e : incident[node]) {
        if (!used[e]) {
          next_edge = e;
          break;
        }
      }
      if (!next_edge) break;
      used[*next_edge] = true;
      const auto& [u, v] = edges[*next_edge];
      node = (u == node) ? v : u;
      if (closed && node == start) break;
      chain.points.push_back(node_pos[node]);
      chain.normals.push_back(node_normal[node]);
    }
    if (chain.points.size() >= 2) chains.push_back(std::move(chain));
  };
  for (std::size_t node = 0; node < node_pos.size(); ++node) {
    if (incident[node].size() == 1 && !used[incident[node][0]]) walk(node, false);
  }
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (!used[e]) walk(edges[e].first, true);
  }
  return chains;
}

LayerSegment resample_run(std::vector<Point3>& pts, std::vector<Vec3>& normals, double spacing,
                          bool closed) {
  if (pts.size() < 2) return {};
  const double length = polyline_length(pts, closed);
  if (length <= 0.0) return {};
  return resample_segment(pts, normals, spacing, closed);
}

// Walks from the last point of `pts` along `dir` in steps of `spacing`,
// accepting projections, until two consecutive projections fail.
bool extend_run(const SurfaceProjector& surface, std::vector<Point3>& pts,
                std::vector<Vec3>& normals, Vec3 dir, double spacing, double max_length) {
  bool extended = false;
  double travelled = 0.0;
  while (travelled < max_length) {
    Point3 probe = pts.back() + spacing * dir;
    auto hit = surface.project(probe);
    if (!hit) {
      probe += spacing * dir;
      hit = surface.project(probe);
      if (!hit) break;
    }
    const Vec3 step = hit->point - pts.back();
    const double len = step.norm();
    if (len < 0.25 * spacing || step.dot(dir) <= 0.0) break;
    dir = step / len;
    pts.push_back(hit->point);
    normals.push_back(hit->normal);
    travelled += len;
    extended = true;
  }
  return extended;
}

}  // namespace

std::size_t Layer::point_count() const noexcept {
  std::size_t count = 0;
  for (const auto& s : segments) count += s.size();
  return count;
}

void recompute_frames(LayerSegment& seg, bool closed) {
  const std::size_t n = seg.size();
  if (n < 2) return;
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t prev = j, next = j;
    if (closed) {
      prev = (j + n - 1) % n;
      next = (j + 1) % n;
    } else {
      prev = j == 0 ? 0 : j - 1;
      next = j + 1 == n ? j : j + 1;
    }
    Vec3 t = seg[next].p - seg[prev].p;
    if (t.norm() == 0.0) t = j > 0 ? seg[j - 1].t : kAxisX;
    seg[j].t = t.normalized();
  }
  for (std::size_t j = 0; j < n; ++j) {
    auto& lp = seg[j];
    Vec3 normal = lp.n - lp.n.dot(lp.t) * lp.t;
    if (normal.norm() < 1e-12) normal = j > 0 ? seg[j - 1].n : any_orthogonal(lp.t);
    lp.n = normal.normalized();
    lp.a = lp.t.cross(lp.n).normalized();
    lp.lambda = j == 0 ? 0.0 : seg[j - 1].lambda + (lp.p - seg[j - 1].p).norm();
  }
}

LayerSegment resample_segment(std::span<const Point3> points, std::span<const Vec3> normals,
                              double spacing, bool closed) {
  require(spacing > 0.0, ErrorCode::InvalidArgument, "sampling distance must be positive");
  require(points.size() == normals.size() && points.size() >= 2, ErrorCode::InvalidArgument,
          "resampling needs at least two points with normals");
  const double length = polyline_length(points, closed);
  // Spacing is an upper bound, closing step of a loop included.
  const auto intervals = static_cast<std::size_t>(std::ceil(length / spacing - 1e-9));
  const std::size_t count = closed ? std::max<std::size_t>(3, intervals)
                                   : std::max<std::size_t>(1, intervals) + 1;
  return resample_count(points, normals, count, closed);
}

Layer sample_base_layer(const TriMesh& mesh, const Plane& base_plane, double spacing) {
  require(spacing > 0.0, ErrorCode::InvalidArgument, "sampling distance must be positive");
  auto chains = intersect_and_chain(mesh, base_plane);
  require(!chains.empty(), ErrorCode::NoIntersection,
          "base plane does not intersect mesh '" + mesh.name + "'");

  Layer layer;
  layer.index = 0;
  for (auto& chain : chains) {
    // Orient so that t x n points away from the base plate.
    double score = 0.0;
    const std::size_t m = chain.points.size();
    for (std::size_t i = 0; i + 1 < m + (chain.closed ? 1 : 0); ++i) {
      const Vec3 t = chain.points[(i + 1) % m] - chain.points[i];
      score += t.cross(chain.normals[i]).dot(base_plane.normal);
    }
    if (score < 0.0) {
      std::reverse(chain.points.begin(), chain.points.end());
      std::reverse(chain.normals.begin(), chain.normals.end());
    }
    auto seg = resample_run(chain.points, chain.normals, spacing, chain.closed);
    if (seg.size() >= 2) layer.segments.push_back(std::move(seg));
  }
  require(!layer.segments.empty(), ErrorCode::NoIntersection,
          "base plane only touches mesh '" + mesh.name + "'");
  layer.closed = layer.segments.size() == 1 && chains.size() == 1 && chains.front().closed;
  finish_layer(layer);
  return layer;
}

Layer next_layer(const SurfaceProjector& surface, const Layer& layer, double h, double spacing) {
  require(h > 0.0, ErrorCode::InvalidArgument, "height increment h must be positive");
  require(spacing > 0.0, ErrorCode::InvalidArgument, "sampling distance must be positive");

  Layer out;
  out.index = layer.index + 1;
  const bool source_closed = layer.closed && layer.segments.size() == 1;

  for (const auto& seg : layer.segments) {
    const std::size_t n = seg.size();
    std::vector<std::optional<SurfaceProjector::Hit>> hits(n);
    std::size_t survivors = 0;
    for (std::size_t j = 0; j < n; ++j) {
      hits[j] = surface.project(seg[j].p + h * seg[j].a);
      if (hits[j]) ++survivors;
    }
    if (survivors == 0) {
      out.touches_boundary = true;
      continue;
    }

    if (source_closed && survivors == n) {
      std::vector<Point3> pts;
      std::vector<Vec3> normals;
      for (const auto& hit : hits) {
        pts.push_back(hit->point);
        normals.push_back(hit->normal);
      }
      auto resampled = resample_run(pts, normals, spacing, true);
      if (resampled.size() >= 3) {
        out.segments.push_back(std::move(resampled));
        out.closed = true;
      }
      continue;
    }
    out.touches_boundary = true;

    // Visit order: for a broken loop start right after a failure so that the
    // run wrapping past the seam stays in one piece.
    std::size_t start = 0;
    if (source_closed) {
      while (hits[start]) ++start;
      start = (start + 1) % n;
    }
    std::vector<std::vector<std::size_t>> runs;
    std::vector<std::size_t> current;
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t j = (start + k) % n;
      if (hits[j]) {
        current.push_back(j);
      } else if (!current.empty()) {
        runs.push_back(std::move(current));
        current.clear();
      }
    }
    if (!current.empty()) runs.push_back(std::move(current));

    const double max_extension = std::max(10.0 * spacing, seg.back().lambda + spacing);
    for (const auto& run : runs) {
      std::vector<Point3> pts;
      std::vector<Vec3> normals;
      for (auto j : run) {
        pts.push_back(hits[j]->point);
        normals.push_back(hits[j]->normal);
      }
      Vec3 forward = pts.size() >= 2 ? Vec3(pts.back() - pts[pts.size() - 2]) : seg[run.back()].t;
      extend_run(surface, pts, normals, forward.normalized(), spacing, max_extension);

      std::reverse(pts.begin(), pts.end());
      std::reverse(normals.begin(), normals.end());
      Vec3 backward = pts.size() >= 2 ? Vec3(pts.back() - pts[pts.size() - 2])
                                      : Vec3(-seg[run.front()].t);
      extend_run(surface, pts, normals, backward.normalized(), spacing, max_extension);
      std::reverse(pts.begin(), pts.end());
      std::reverse(normals.begin(), normals.end());

      auto resampled = resample_run(pts, normals, spacing, false);
      if (resampled.size() >= 2) out.segments.push_back(std::move(resampled));
    }
  }
  finish_layer(out);
  return out;
}

Layer next_layer(const TriMesh& mesh, const Layer& layer, double h, std::size_t n,
                 double spacing) {
  const SurfaceProjector surface(mesh, n);
  return next_layer(surface, layer, h, spacing);
}

SlicePlan slice_surface(const TriMesh& mesh, const SliceOptions& options) {
  require(options.h > 0.0, ErrorCode::InvalidArgument, "height increment h must be positive");
  require(options.sampling > 0.0, ErrorCode::InvalidArgument,
          "sampling distance must be positive");
  require(!mesh.vertices.empty(), ErrorCode::InvalidArgument, "mesh has no vertices");

  double z_min = mesh.vertices.front().z();
  for (const auto& v : mesh.vertices) z_min = std::min(z_min, v.z());
  const Plane base{Point3(0.0, 0.0, z_min), kAxisZ};

  SlicePlan plan;
  plan.h = options.h;
  plan.sampling = options.sampling;
  plan.source = mesh.name;
  plan.layers.push_back(sample_base_layer(mesh, base, options.sampling));

  const SurfaceProjector surface(mesh, options.neighbours);
  while (true) {
    Layer next = next_layer(surface, plan.layers.back(), options.h, options.sampling);
    if (next.empty()) break;
    require(plan.layers.size() < options.max_layers, ErrorCode::RunawayGuard,
            "slicing exceeded " + std::to_string(options.max_layers) +
                " layers; geometry does not terminate for h = " + std::to_string(options.h));
    plan.layers.push_back(std::move(next));
  }
  return plan;
}

SlicePlan slice_surface(const TriMesh& mesh, double h, double spacing, std::size_t n) {
  SliceOptions options;
  options.h = h;
  options.sampling = spacing;
  options.neighbours = n;
  return slice_surface(mesh, options);
}

SlicePlan slice_axisymmetric(std::span<const ProfilePoint> profile, double h, double spacing) {
  require(h > 0.0, ErrorCode::InvalidArgument, "height increment h must be positive");
  require(spacing > 0.0, ErrorCode::InvalidArgument, "sampling distance must be positive");
  require(profile.size() >= 2, ErrorCode::InvalidArgument, "profile needs at least two samples");
  for (const auto& pp : profile) {
    require(pp.r > 0.0, ErrorCode::InvalidArgument, "profile radius must be positive");
  }

  std::vector<double> s(profile.size(), 0.0);
  for (std::size_t i = 1; i < profile.size(); ++i) {
    const double len = std::hypot(profile[i].r - profile[i - 1].r, profile[i].z - profile[i - 1].z);
    require(len > 0.0, ErrorCode::InvalidArgument, "profile has repeated samples");
    s[i] = s[i - 1] + len;
  }
  const double length = s.back();

  SlicePlan plan;
  plan.h = h;
  plan.sampling = spacing;
  plan.source = "axisymmetric";

  std::size_t seg = 0;
  for (std::size_t k = 0;; ++k) {
    const double arc = h * static_cast<double>(k);
    if (arc > length + 1e-9) break;
    while (seg + 2 < s.size() && s[seg + 1] <= arc) ++seg;
    const double span = s[seg + 1] - s[seg];
    const double u = std::clamp((arc - s[seg]) / span, 0.0, 1.0);
    const double r = profile[seg].r + u * (profile[seg + 1].r - profile[seg].r);
    const double z = profile[seg].z + u * (profile[seg + 1].z - profile[seg].z);
    const double dr = (profile[seg + 1].r - profile[seg].r) / span;
    const double dz = (profile[seg + 1].z - profile[seg].z) / span;

    const auto m = std::max<std::size_t>(8, static_cast<std::size_t>(
                                                std::ceil(2.0 * kPi * r / spacing - 1e-9)));
    const double chord = 2.0 * r * std::sin(kPi / static_cast<double>(m));
    LayerSegment circle(m);
    for (std::size_t j = 0; j < m; ++j) {
      // Clockwise seen from +z, which makes t x n run up the profile.
      const double theta = -2.0 * kPi * static_cast<double>(j) / static_cast<double>(m);
      const double c = std::cos(theta), sn = std::sin(theta);
      auto& lp = circle[j];
      lp.p = Point3(r * c, r * sn, z);
      lp.t = Vec3(sn, -c, 0.0);
      lp.n = Vec3(dz * c, dz * sn, -dr);
      lp.a = Vec3(dr * c, dr * sn, dz);
      lp.lambda = chord * static_cast<double>(j);
    }
    Layer layer;
    layer.index = k;
    layer.closed = true;
    layer.segments.push_back(std::move(circle));
    finish_layer(layer);
    plan.layers.push_back(std::move(layer));
  }
  return plan;
}

SlicePlan warp_layers(const SlicePlan& plan) {
  SlicePlan out = plan;
  out.warped = true;
  if (plan.layers.size() < 2) return out;

  for (std::size_t i = 0; i + 1 < plan.layers.size(); ++i) {
    const Layer& lower = plan.layers[i];
    const Layer& upper = plan.layers[i + 1];
    if (lower.segments.size() != upper.segments.size()) continue;

    Layer warped = upper;
    warped.closed = false;
    for (std::size_t s = 0; s < upper.segments.size(); ++s) {
      LayerSegment below = lower.segments[s];
      LayerSegment above = upper.segments[s];
      // Upsampling keeps every step, the seam to the next layer included,
      // within the sampling distance.
      const std::size_t m = std::max(below.size(), above.size());
      auto match = [m](LayerSegment& seg, bool closed) {
        if (seg.size() == m) return;
        std::vector<Point3> pts;
        std::vector<Vec3> normals;
        for (const auto& lp : seg) {
          pts.push_back(lp.p);
          normals.push_back(lp.n);
        }
        seg = resample_count(pts, normals, m, closed);
      };
      match(below, lower.closed);
      match(above, upper.closed);

      const double lambda_f = below.back().lambda;
      LayerSegment blended(m);
      for (std::size_t j = 0; j < m; ++j) {
        const double alpha = lambda_f > 0.0 ? below[j].lambda / lambda_f : 1.0;
        blended[j].p = alpha * above[j].p + (1.0 - alpha) * below[j].p;
        blended[j].n = alpha * above[j].n + (1.0 - alpha) * below[j].n;
      }
      recompute_frames(blended, false);
      warped.segments[s] = std::move(blended);
    }
    finish_layer(warped);
    out.layers[i + 1] = std::move(warped);
  }
  return out;
}

}  // namespace waam
