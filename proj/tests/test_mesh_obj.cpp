#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "mealgen/error.hpp"
#include "mealgen/mesh.hpp"
#include "mealgen/obj_io.hpp"

using namespace mealgen;
namespace fs = std::filesystem;

namespace {

// Icosphere fixture: subdivided icosahedron with every vertex projected to
// radius r. One subdivision level already places vertices on all six axis
// extremes (edge midpoints of the icosahedron normalize onto the axes).
TriangleMesh make_icosphere(double r, int subdivisions) {
    const double p = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> verts = {{-1, p, 0}, {1, p, 0},  {-1, -p, 0}, {1, -p, 0},
                               {0, -1, p}, {0, 1, p},  {0, -1, -p}, {0, 1, -p},
                               {p, 0, -1}, {p, 0, 1},  {-p, 0, -1}, {-p, 0, 1}};
    std::vector<std::array<uint32_t, 3>> faces = {
        {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
        {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
        {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    for (auto& v : verts) v = v.normalized();

    for (int level = 0; level < subdivisions; ++level) {
        std::map<std::pair<uint32_t, uint32_t>, uint32_t> midpoint;
        auto mid = [&](uint32_t a, uint32_t b) {
            const std::pair<uint32_t, uint32_t> key = std::minmax(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            verts.push_back(((verts[a] + verts[b]) * 0.5).normalized());
            const uint32_t idx = static_cast<uint32_t>(verts.size() - 1);
            midpoint.emplace(key, idx);
            return idx;
        };
        std::vector<std::array<uint32_t, 3>> next;
        next.reserve(faces.size() * 4);
        for (const auto& f : faces) {
            const uint32_t ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        faces = std::move(next);
    }

    TriangleMesh mesh;
    for (const auto& v : verts) mesh.positions.push_back(v * r);
    mesh.triangles = faces;
    return mesh;
}

std::string to_obj(const TriangleMesh& mesh) {
    std::string out;
    char buf[128];
    for (const auto& v : mesh.positions) {
        std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", v.x, v.y, v.z);
        out += buf;
    }
    for (const auto& t : mesh.triangles) {
        std::snprintf(buf, sizeof buf, "f %u %u %u\n", t[0] + 1, t[1] + 1, t[2] + 1);
        out += buf;
    }
    return out;
}

} // namespace

TEST_SUITE_BEGIN("mesh_obj");

TEST_CASE("uv sphere vertices sit on the sphere and the aabb is tight") {
    const double r = 0.04;
    const TriangleMesh sphere = make_uv_sphere(r);
    REQUIRE(sphere.triangle_count() > 0);
    for (const auto& v : sphere.positions)
        CHECK(std::abs(v.norm() - r) <= 1e-6);
    const Aabb box = compute_aabb(sphere);
    // segments % 4 == 0 puts vertices exactly on the axis extremes
    CHECK((box.extent() - Vec3{2 * r, 2 * r, 2 * r}).norm() <= 1e-12);
    CHECK(box.center().norm() <= 1e-12);
}

TEST_CASE("box primitive: 12 triangles, aabb equals extents") {
    const Vec3 e{0.02, 0.02, 0.02};
    const TriangleMesh box = make_box(e);
    CHECK(box.triangle_count() == 12);
    CHECK(box.positions.size() == 8);
    const Aabb aabb = compute_aabb(box);
    CHECK((aabb.extent() - e).norm() == 0.0);
    CHECK(aabb.center() == Vec3{});
}

TEST_CASE("ellipsoid and cylinder aabbs match nominal extents") {
    const Vec3 semi{0.03, 0.02, 0.01};
    const Aabb eb = compute_aabb(make_ellipsoid(semi));
    CHECK((eb.extent() - semi * 2.0).norm() <= 1e-12);

    const Aabb cb = compute_aabb(make_cylinder(0.025, 0.06));
    CHECK((cb.extent() - Vec3{0.05, 0.05, 0.06}).norm() <= 1e-12);
}

TEST_CASE("primitive tessellation is deterministic") {
    const TriangleMesh a = make_uv_sphere(0.037, 12, 20);
    const TriangleMesh b = make_uv_sphere(0.037, 12, 20);
    CHECK(a.positions == b.positions);
    CHECK(a.triangles == b.triangles);
}

TEST_CASE("mass properties of a box match the analytic formulas") {
    const Vec3 e{0.04, 0.06, 0.02};
    const MassProperties mp = compute_mass_properties(make_box(e));
    REQUIRE(mp.watertight_ok);
    const double vol = e.x * e.y * e.z;
    CHECK(mp.volume == doctest::Approx(vol).epsilon(1e-12));
    CHECK(mp.center_of_mass.norm() <= 1e-12);
    // unit-density solid box about its COM
    CHECK(mp.inertia_unit_density.at(0, 0) ==
          doctest::Approx(vol / 12.0 * (e.y * e.y + e.z * e.z)).epsilon(1e-10));
    CHECK(mp.inertia_unit_density.at(1, 1) ==
          doctest::Approx(vol / 12.0 * (e.x * e.x + e.z * e.z)).epsilon(1e-10));
    CHECK(mp.inertia_unit_density.at(2, 2) ==
          doctest::Approx(vol / 12.0 * (e.x * e.x + e.y * e.y)).epsilon(1e-10));
    CHECK(std::abs(mp.inertia_unit_density.at(0, 1)) <= 1e-15);
}

TEST_CASE("mass properties track an off-center mesh") {
    TriangleMesh box = make_box({0.02, 0.02, 0.02});
    const Vec3 shift{0.1, -0.05, 0.03};
    for (auto& v : box.positions) v += shift;
    const MassProperties mp = compute_mass_properties(box);
    REQUIRE(mp.watertight_ok);
    CHECK((mp.center_of_mass - shift).norm() <= 1e-12);
    CHECK(mp.volume == doctest::Approx(8e-6).epsilon(1e-12));
}

TEST_CASE("sphere volume approaches the analytic value from below") {
    const double r = 0.05;
    const MassProperties mp = compute_mass_properties(make_uv_sphere(r, 32, 48));
    REQUIRE(mp.watertight_ok);
    const double exact = 4.0 / 3.0 * kPi * r * r * r;
    CHECK(mp.volume < exact);              // inscribed tessellation
    CHECK(mp.volume > 0.98 * exact);       // but close at this resolution
    CHECK(mp.center_of_mass.norm() <= 1e-9);
}

TEST_CASE("open meshes are flagged as non-watertight") {
    TriangleMesh tri;
    tri.positions = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    tri.triangles = {{0, 1, 2}};
    CHECK_FALSE(compute_mass_properties(tri).watertight_ok);
}

TEST_CASE("plate and table meshes span their nominal bounds") {
    const double R = 0.12, top = 0.02, rim = 0.008;
    const Aabb pb = compute_aabb(make_plate_mesh(R, top, rim));
    CHECK(pb.hi.z == doctest::Approx(top + rim));
    CHECK(pb.lo.z == doctest::Approx(0.0));
    CHECK(pb.hi.x == doctest::Approx(R + kPlateRimThickness).epsilon(1e-9));

    const Aabb tb = compute_aabb(make_table_mesh(0.6));
    CHECK(tb.extent().x == doctest::Approx(1.2));
    CHECK(tb.extent().z == doctest::Approx(0.0));
}

TEST_CASE("parse_obj reads a unit cube") {
    const TriangleMesh cube = parse_obj(to_obj(make_box({1, 1, 1})));
    CHECK(cube.positions.size() == 8);
    CHECK(cube.triangle_count() == 12);
    CHECK((compute_aabb(cube).extent() - Vec3{1, 1, 1}).norm() <= 1e-12);
}

TEST_CASE("parse_obj accepts slash-style and negative references, skips noise") {
    const std::string text =
        "# comment\n"
        "o thing\n"
        "v 0 0 0\nv 1 0 0\nv 0 1 0\n"
        "vt 0 0\nvn 0 0 1\n"
        "s off\n"
        "f 1/1/1 2/1/1 3/1/1\n"
        "f -3//1 -2//1 -1//1\n";
    const TriangleMesh m = parse_obj(text);
    CHECK(m.positions.size() == 3);
    CHECK(m.triangle_count() == 2);
    CHECK(m.triangles[0] == m.triangles[1]);
}

TEST_CASE("parse_obj errors carry the offending line") {
    // quad face
    try {
        parse_obj("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n");
        FAIL("quad face accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == Error::Kind::Parse);
        CHECK(e.line == 5);
        CHECK(std::string(e.what()).find("triangles") != std::string::npos);
    }
    // non-finite vertex
    try {
        parse_obj("v 0 0 0\nv nan 0 0\n");
        FAIL("NaN vertex accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == Error::Kind::Parse);
        CHECK(e.line == 2);
    }
    // out-of-range face reference
    CHECK_THROWS_AS(parse_obj("v 0 0 0\nf 1 2 3\n"), Error);
    // truncated vertex
    CHECK_THROWS_AS(parse_obj("v 1 2\n"), Error);
}

TEST_CASE("load_obj round-trips through a file and names it on failure") {
    const fs::path dir = fs::temp_directory_path() / "mealgen_test_obj";
    fs::create_directories(dir);
    const fs::path file = dir / "cube.obj";
    {
        std::ofstream out(file);
        out << to_obj(make_box({0.5, 0.5, 0.5}));
    }
    const TriangleMesh m = load_obj(file);
    CHECK(m.triangle_count() == 12);

    try {
        load_obj(dir / "missing.obj");
        FAIL("missing file accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == Error::Kind::Io);
        CHECK(e.path.find("missing.obj") != std::string::npos);
    }
    fs::remove_all(dir);
}

TEST_CASE("icosphere of radius 0.05 parses back with aabb extent 0.1 per axis") {
    const double r = 0.05;
    const TriangleMesh ico = make_icosphere(r, 2);

    // independent oracle: plain min/max scan over the generated vertices
    Vec3 lo = ico.positions.front(), hi = lo;
    for (const auto& v : ico.positions) {
        lo = min(lo, v);
        hi = max(hi, v);
    }
    const Vec3 oracle_extent = hi - lo;
    CHECK(std::abs(oracle_extent.x - 0.1) <= 1e-6);
    CHECK(std::abs(oracle_extent.y - 0.1) <= 1e-6);
    CHECK(std::abs(oracle_extent.z - 0.1) <= 1e-6);

    // the parse + compute_aabb path must agree with the oracle
    const TriangleMesh parsed = parse_obj(to_obj(ico));
    REQUIRE(parsed.positions.size() == ico.positions.size());
    const Aabb box = compute_aabb(parsed);
    CHECK((box.extent() - oracle_extent).norm() <= 1e-12);
    for (const auto& v : parsed.positions) CHECK(std::abs(v.norm() - r) <= 1e-9);
}

TEST_SUITE_END();
