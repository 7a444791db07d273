#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "mealgen/math.hpp"
#include "mealgen/rng.hpp"

using namespace mealgen;

TEST_SUITE_BEGIN("math_rng");

TEST_CASE("vec3 algebra identities") {
    const Vec3 a{1.5, -2.0, 0.25}, b{-0.5, 4.0, 3.0};
    CHECK(a.dot(b) == doctest::Approx(-0.75 - 8.0 + 0.75));
    CHECK(a.cross(b).dot(a) == doctest::Approx(0.0));
    CHECK(a.cross(b).dot(b) == doctest::Approx(0.0));
    CHECK((a + b - b - a).norm() == doctest::Approx(0.0));
    CHECK(Vec3{3, 4, 0}.norm() == doctest::Approx(5.0));
    CHECK(Vec3{2, 0, 0}.normalized() == Vec3{1, 0, 0});
    CHECK(Vec3{}.normalized() == Vec3{});
    CHECK(a[0] == a.x);
    CHECK(a[1] == a.y);
    CHECK(a[2] == a.z);
}

TEST_CASE("mat3 inverse and transpose") {
    Mat3 m;
    m.m = {2, 1, 0, 1, 3, 1, 0, 1, 2};
    const Mat3 inv = m.inverse();
    const Mat3 id = m * inv;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            CHECK(id.at(r, c) == doctest::Approx(r == c ? 1.0 : 0.0).epsilon(1e-12));
    CHECK(m.transposed().transposed().m == m.m);
    CHECK((Mat3::diagonal({2, 3, 4}) * Vec3{1, 1, 1}) == Vec3{2, 3, 4});
}

TEST_CASE("quaternion rotation matches its matrix") {
    const Quat q = Quat::from_axis_angle({1, 2, 3}, 0.7);
    CHECK(q.norm() == doctest::Approx(1.0).epsilon(1e-12));
    const Vec3 v{0.3, -1.2, 2.0};
    const Vec3 via_quat = q.rotate(v);
    const Vec3 via_mat = q.to_matrix() * v;
    CHECK((via_quat - via_mat).norm() == doctest::Approx(0.0).epsilon(1e-12));
    // conjugate inverts the rotation
    CHECK((q.conjugate().rotate(via_quat) - v).norm() == doctest::Approx(0.0).epsilon(1e-12));
    // 90 degrees about z maps +x to +y
    const Quat z90 = Quat::from_axis_angle({0, 0, 1}, kPi / 2);
    CHECK((z90.rotate({1, 0, 0}) - Vec3{0, 1, 0}).norm() < 1e-12);
}

TEST_CASE("pose composition") {
    Pose p{{1, 2, 3}, Quat::from_axis_angle({0, 0, 1}, kPi)};
    const Vec3 out = p.apply({1, 0, 0});
    CHECK((out - Vec3{0, 2, 3}).norm() < 1e-12);
}

TEST_CASE("aabb expand, contains, overlaps") {
    Aabb box;
    CHECK_FALSE(box.valid());
    box.expand({0, 0, 0});
    box.expand({1, 2, 3});
    CHECK(box.valid());
    CHECK(box.extent() == Vec3{1, 2, 3});
    CHECK(box.center() == Vec3{0.5, 1, 1.5});
    CHECK(box.contains({0.5, 1.0, 1.5}));
    CHECK_FALSE(box.contains({1.1, 0, 0}));
    CHECK(box.contains({1.05, 1, 1}, 0.1));

    Aabb other;
    other.expand({2, 0, 0});
    other.expand({3, 1, 1});
    CHECK_FALSE(box.overlaps(other));
    CHECK(box.overlaps(other, 1.0));
}

TEST_CASE("derive_seed is stable and spreads") {
    // regression-pinned: these values must never change, or every
    // previously generated dataset stops being reproducible
    CHECK(derive_seed(42, 0, 0) == derive_seed(42, 0, 0));
    CHECK(derive_seed(42, 0, 0) != derive_seed(42, 1, 0));
    CHECK(derive_seed(42, 0, 0) != derive_seed(42, 0, 1));
    CHECK(derive_seed(42, 0, 0) != derive_seed(43, 0, 0));

    std::set<uint64_t> seen;
    for (uint64_t s = 0; s < 1000; ++s) seen.insert(derive_seed(7, s));
    CHECK(seen.size() == 1000);  // no collisions over a small scan
}

TEST_CASE("rng streams are deterministic per seed") {
    Rng a(123), b(123), c(124);
    bool all_equal = true, any_differs = false;
    for (int i = 0; i < 100; ++i) {
        const uint64_t va = a.next_u64();
        all_equal = all_equal && va == b.next_u64();
        any_differs = any_differs || va != c.next_u64();
    }
    CHECK(all_equal);
    CHECK(any_differs);
}

TEST_CASE("uniform stays in range") {
    Rng rng(9);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    for (int i = 0; i < 1000; ++i) {
        const double u = rng.uniform(-2.0, 3.0);
        CHECK(u >= -2.0);
        CHECK(u < 3.0);
    }
    for (int i = 0; i < 1000; ++i) {
        const int64_t v = rng.uniform_int(-3, 3);
        CHECK(v >= -3);
        CHECK(v <= 3);
    }
}

TEST_CASE("uniform_index covers its range without bias artifacts") {
    Rng rng(77);
    std::vector<int> counts(7, 0);
    const int draws = 70000;
    for (int i = 0; i < draws; ++i) counts[rng.uniform_index(7)]++;
    // 5 sigma of binomial(70000, 1/7): mean 10000, sigma ~92.5
    for (int c : counts) CHECK(std::abs(c - 10000) < 465);
}

TEST_CASE("uniform_rotation returns unit quaternions that cover orientations") {
    Rng rng(5);
    Vec3 mean;
    for (int i = 0; i < 2000; ++i) {
        const Quat q = rng.uniform_rotation();
        CHECK(q.norm() == doctest::Approx(1.0).epsilon(1e-12));
        mean += q.rotate({0, 0, 1});
    }
    // rotated +z should average out near the origin if orientations are uniform
    CHECK(mean.norm() / 2000.0 < 0.05);
}

TEST_CASE("shuffle permutes and is seed-deterministic") {
    std::vector<int> v1{0, 1, 2, 3, 4, 5, 6, 7, 8, 9}, v2 = v1, sorted = v1;
    Rng a(31), b(31);
    a.shuffle(v1);
    b.shuffle(v2);
    CHECK(v1 == v2);
    std::vector<int> back = v1;
    std::sort(back.begin(), back.end());
    CHECK(back == sorted);
}

TEST_CASE("sample_without_replacement yields distinct indices") {
    Rng rng(8);
    for (int trial = 0; trial < 200; ++trial) {
        const auto picks = rng.sample_without_replacement(12, 4);
        CHECK(picks.size() == 4);
        std::set<size_t> distinct(picks.begin(), picks.end());
        CHECK(distinct.size() == 4);
        for (size_t p : picks) CHECK(p < 12);
    }
}

TEST_SUITE_END();
