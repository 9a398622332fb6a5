#pragma once

#include <cstddef>
#include <vector>

#include "waam/mesh.hpp"
#include "waam/slicer.hpp"

namespace waam::fixtures {

/// Square in the z = 0 plane centred on the origin, normal +z.
TriMesh flat_square(double size, double step);

/// Vertical planar wall in the x-z plane, x in [0, length], z in [0, height],
/// normal +y.
TriMesh wall(double length = 100.0, double height = 50.0, double step = 1.0);

/// Open cylinder about z from z = 0 to height, outward normals.
TriMesh cylinder(double radius = 30.0, double height = 50.0, std::size_t segments = 188,
                 double step = 1.0);

/// Sphere band about z between two latitudes (degrees), outward normals,
/// with edges of roughly `step` mm.
TriMesh sphere_cap(double radius = 50.0, double lat_lo = 0.0, double lat_hi = 60.0, double step = 1.0);

/// Cambered, twisted open blade surface rising along z and leaning out of
/// its chord plane (towards +y) by lean_deg.
TriMesh blade(double chord = 60.0, double span = 50.0, double camber = 6.0, double lean_deg = 20.0,
              double twist_deg = 15.0, double step = 1.0);

std::vector<ProfilePoint> cylinder_profile(double radius, double height, double step = 0.5);
std::vector<ProfilePoint> cone_profile(double r0, double r1, double height, double step = 0.5);
/// Flaring cup, r = r0 + (r1 - r0) (z / height)^2.
std::vector<ProfilePoint> cup_profile(double r0, double r1, double height, double step = 0.5);

}  // namespace waam::fixtures
