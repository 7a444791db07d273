#include "mealgen/mesh.hpp"

#include <cmath>

namespace mealgen {

Aabb compute_aabb(const TriangleMesh& mesh) {
    Aabb box;
    for (const auto& p : mesh.positions) box.expand(p);
    return box;
}

MassProperties compute_mass_properties(const TriangleMesh& mesh) {
    // Eberly-style polyhedral integrals: accumulate x, x^2, xy moments per
    // face over the projected tetrahedra against the origin.
    double intg[10] = {0};  // 1, x, y, z, x^2, y^2, z^2, xy, yz, zx

    auto subexpr = [](double w0, double w1, double w2, double& f1, double& f2, double& f3) {
        double t0 = w0 + w1;
        double t1 = w0 * w0;
        double t2 = t1 + w1 * t0;
        f1 = t0 + w2;
        f2 = t2 + w2 * f1;
        f3 = w0 * t1 + w1 * t2 + w2 * f2;
    };

    for (const auto& t : mesh.triangles) {
        const Vec3& p0 = mesh.positions[t[0]];
        const Vec3& p1 = mesh.positions[t[1]];
        const Vec3& p2 = mesh.positions[t[2]];
        const Vec3 d = (p1 - p0).cross(p2 - p0);  // 2x area normal

        double f1x, f2x, f3x, f1y, f2y, f3y, f1z, f2z, f3z;
        subexpr(p0.x, p1.x, p2.x, f1x, f2x, f3x);
        subexpr(p0.y, p1.y, p2.y, f1y, f2y, f3y);
        subexpr(p0.z, p1.z, p2.z, f1z, f2z, f3z);

        double g0x = f2x + p0.x * (f1x + p0.x);
        double g1x = f2x + p1.x * (f1x + p1.x);
        double g2x = f2x + p2.x * (f1x + p2.x);
        double g0y = f2y + p0.y * (f1y + p0.y);
        double g1y = f2y + p1.y * (f1y + p1.y);
        double g2y = f2y + p2.y * (f1y + p2.y);
        double g0z = f2z + p0.z * (f1z + p0.z);
        double g1z = f2z + p1.z * (f1z + p1.z);
        double g2z = f2z + p2.z * (f1z + p2.z);

        intg[0] += d.x * f1x;
        intg[1] += d.x * f2x;
        intg[2] += d.y * f2y;
        intg[3] += d.z * f2z;
        intg[4] += d.x * f3x;
        intg[5] += d.y * f3y;
        intg[6] += d.z * f3z;
        intg[7] += d.x * (p0.y * g0x + p1.y * g1x + p2.y * g2x);
        intg[8] += d.y * (p0.z * g0y + p1.z * g1y + p2.z * g2y);
        intg[9] += d.z * (p0.x * g0z + p1.x * g1z + p2.x * g2z);
    }
    intg[0] /= 6.0;
    for (int i = 1; i < 4; ++i) intg[i] /= 24.0;
    for (int i = 4; i < 7; ++i) intg[i] /= 60.0;
    for (int i = 7; i < 10; ++i) intg[i] /= 120.0;

    MassProperties mp;
    mp.volume = intg[0];
    if (!(std::isfinite(mp.volume)) || mp.volume <= 1e-12) return mp;  // watertight_ok stays false

    mp.center_of_mass = Vec3{intg[1], intg[2], intg[3]} / mp.volume;
    const Vec3& c = mp.center_of_mass;

    Mat3 I;
    I.at(0, 0) = intg[5] + intg[6] - mp.volume * (c.y * c.y + c.z * c.z);
    I.at(1, 1) = intg[4] + intg[6] - mp.volume * (c.z * c.z + c.x * c.x);
    I.at(2, 2) = intg[4] + intg[5] - mp.volume * (c.x * c.x + c.y * c.y);
    I.at(0, 1) = I.at(1, 0) = -(intg[7] - mp.volume * c.x * c.y);
    I.at(1, 2) = I.at(2, 1) = -(intg[8] - mp.volume * c.y * c.z);
    I.at(0, 2) = I.at(2, 0) = -(intg[9] - mp.volume * c.z * c.x);

    if (I.at(0, 0) <= 0 || I.at(1, 1) <= 0 || I.at(2, 2) <= 0) return mp;

    mp.inertia_unit_density = I;
    mp.watertight_ok = true;
    return mp;
}

TriangleMesh make_uv_sphere(double radius, int rings, int segments) {
    return make_ellipsoid({radius, radius, radius}, rings, segments);
}

TriangleMesh make_ellipsoid(const Vec3& semi, int rings, int segments) {
    TriangleMesh m;
    const int R = rings, S = segments;
    // Poles first, then (R-1) interior rings of S vertices.
    m.positions.push_back({0, 0, semi.z});
    m.positions.push_back({0, 0, -semi.z});
    for (int r = 1; r < R; ++r) {
        const double phi = kPi * r / R;  // from +z pole
        const double cz = std::cos(phi), sz = std::sin(phi);
        for (int s = 0; s < S; ++s) {
            const double theta = 2.0 * kPi * s / S;
            m.positions.push_back({semi.x * sz * std::cos(theta),
                                   semi.y * sz * std::sin(theta),
                                   semi.z * cz});
        }
    }
    auto ring_vertex = [S](int r, int s) -> uint32_t {
        return 2 + static_cast<uint32_t>((r - 1) * S + (s % S));
    };
    for (int s = 0; s < S; ++s) {
        m.triangles.push_back({0, ring_vertex(1, s), ring_vertex(1, s + 1)});
        m.triangles.push_back({1, ring_vertex(R - 1, s + 1), ring_vertex(R - 1, s)});
    }
    for (int r = 1; r < R - 1; ++r) {
        for (int s = 0; s < S; ++s) {
            uint32_t a = ring_vertex(r, s), b = ring_vertex(r, s + 1);
            uint32_t c = ring_vertex(r + 1, s), d = ring_vertex(r + 1, s + 1);
            m.triangles.push_back({a, c, d});
            m.triangles.push_back({a, d, b});
        }
    }
    return m;
}

TriangleMesh make_box(const Vec3& e) {
    TriangleMesh m;
    const double hx = e.x / 2, hy = e.y / 2, hz = e.z / 2;
    m.positions = {{-hx, -hy, -hz}, {hx, -hy, -hz}, {hx, hy, -hz}, {-hx, hy, -hz},
                   {-hx, -hy, hz},  {hx, -hy, hz},  {hx, hy, hz},  {-hx, hy, hz}};
    m.triangles = {{0, 2, 1}, {0, 3, 2},   // -z
                   {4, 5, 6}, {4, 6, 7},   // +z
                   {0, 1, 5}, {0, 5, 4},   // -y
                   {2, 3, 7}, {2, 7, 6},   // +y
                   {1, 2, 6}, {1, 6, 5},   // +x
                   {3, 0, 4}, {3, 4, 7}};  // -x
    return m;
}

TriangleMesh make_cylinder(double radius, double height, int segments) {
    TriangleMesh m;
    const double hz = height / 2;
    const int S = segments;
    m.positions.push_back({0, 0, hz});
    m.positions.push_back({0, 0, -hz});
    for (int s = 0; s < S; ++s) {
        const double theta = 2.0 * kPi * s / S;
        const double cx = radius * std::cos(theta), cy = radius * std::sin(theta);
        m.positions.push_back({cx, cy, hz});
        m.positions.push_back({cx, cy, -hz});
    }
    auto top = [S](int s) -> uint32_t { return 2 + 2 * static_cast<uint32_t>(s % S); };
    auto bot = [S](int s) -> uint32_t { return 3 + 2 * static_cast<uint32_t>(s % S); };
    for (int s = 0; s < S; ++s) {
        m.triangles.push_back({0, top(s), top(s + 1)});
        m.triangles.push_back({1, bot(s + 1), bot(s)});
        m.triangles.push_back({top(s), bot(s), bot(s + 1)});
        m.triangles.push_back({top(s), bot(s + 1), top(s + 1)});
    }
    return m;
}

TriangleMesh make_plate_mesh(double radius, double top_z, double rim_height,
                             double rim_thickness, int segments) {
    TriangleMesh m;
    const int S = segments;
    const double r_out = radius + rim_thickness;
    const double z_rim = top_z + rim_height;

    // Vertex layout per segment: top-disk ring, outer bottom, outer rim top,
    // inner rim top (= radius, z_rim). Center vertex closes the top disk.
    m.positions.push_back({0, 0, top_z});  // 0: disk center
    for (int s = 0; s < S; ++s) {
        const double t = 2.0 * kPi * s / S;
        const double c = std::cos(t), sn = std::sin(t);
        m.positions.push_back({radius * c, radius * sn, top_z});   // disk edge
        m.positions.push_back({r_out * c, r_out * sn, 0.0});       // outer base
        m.positions.push_back({r_out * c, r_out * sn, z_rim});     // rim outer top
        m.positions.push_back({radius * c, radius * sn, z_rim});   // rim inner top
    }
    auto v = [S](int s, int k) -> uint32_t { return 1 + 4 * static_cast<uint32_t>(s % S) + static_cast<uint32_t>(k); };
    for (int s = 0; s < S; ++s) {
        // top disk
        m.triangles.push_back({0, v(s, 0), v(s + 1, 0)});
        // inner rim wall (faces the food)
        m.triangles.push_back({v(s, 0), v(s + 1, 3), v(s, 3)});
        m.triangles.push_back({v(s, 0), v(s + 1, 0), v(s + 1, 3)});
        // rim top lip
        m.triangles.push_back({v(s, 3), v(s + 1, 3), v(s + 1, 2)});
        m.triangles.push_back({v(s, 3), v(s + 1, 2), v(s, 2)});
        // outer wall down to the table
        m.triangles.push_back({v(s, 2), v(s + 1, 2), v(s + 1, 1)});
        m.triangles.push_back({v(s, 2), v(s + 1, 1), v(s, 1)});
    }
    return m;
}

TriangleMesh make_table_mesh(double half_extent) {
    TriangleMesh m;
    const double h = half_extent;
    m.positions = {{-h, -h, 0}, {h, -h, 0}, {h, h, 0}, {-h, h, 0}};
    m.triangles = {{0, 1, 2}, {0, 2, 3}};
    return m;
}

} // namespace mealgen
