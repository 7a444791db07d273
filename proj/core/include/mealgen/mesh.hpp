#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "mealgen/math.hpp"

namespace mealgen {

struct TriangleMesh {
    std::vector<Vec3> positions;                     // meters, object space
    std::vector<std::array<uint32_t, 3>> triangles;  // CCW outward winding

    size_t triangle_count() const { return triangles.size(); }
    bool empty() const { return triangles.empty(); }
};

Aabb compute_aabb(const TriangleMesh& mesh);

// Volume/COM/inertia via signed tetrahedron integrals over the surface.
// Exact for closed meshes with outward winding; watertight_ok is false when
// the integrals came out degenerate and the caller should fall back to a
// box approximation.
struct MassProperties {
    double volume = 0.0;
    Vec3 center_of_mass;
    Mat3 inertia_unit_density = Mat3::identity();  // about COM, object axes
    bool watertight_ok = false;
};
MassProperties compute_mass_properties(const TriangleMesh& mesh);

// Primitive tessellations. All deterministic for equal arguments.
// Spheres/ellipsoids are latitude-longitude grids; with segments % 4 == 0
// the axis-extreme vertices (+-x, +-y, +-z) are exact, so the AABB equals
// the nominal extents to machine precision.
TriangleMesh make_uv_sphere(double radius, int rings = 16, int segments = 24);
TriangleMesh make_ellipsoid(const Vec3& semi_axes, int rings = 16, int segments = 24);
TriangleMesh make_box(const Vec3& extents);
TriangleMesh make_cylinder(double radius, double height, int segments = 24);

// Backdrop geometry for rendering. The plate is a solid disk with a short
// upstand rim; the table a large quad at z = 0. The simulator models the
// same solid, so the rim thickness is shared.
inline constexpr double kPlateRimThickness = 0.004;
TriangleMesh make_plate_mesh(double radius, double top_z, double rim_height,
                             double rim_thickness = kPlateRimThickness, int segments = 64);
TriangleMesh make_table_mesh(double half_extent);

} // namespace mealgen
