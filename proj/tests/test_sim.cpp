#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "mealgen/convex.hpp"
#include "mealgen/error.hpp"
#include "mealgen/mesh.hpp"
#include "mealgen/rng.hpp"
#include "mealgen/sim.hpp"

using namespace mealgen;

namespace {

NutritionFacts some_nutrition() { return {120, 95, 12, 3, 2}; }

AssetLibrary sphere_library(double diameter) {
    AssetLibrary lib;
    lib.add(make_primitive_asset(PrimitiveKind::Sphere, {diameter, diameter, diameter},
                                 "fruit", some_nutrition(), 11));
    return lib;
}

// Distance from a point to the plate solid's surface (top disc, rim lip,
// rim walls) or the table plane -- the same solid the simulator collides
// against, recomputed here independently for the support check.
double resting_surface_distance(const Vec3& p, const PlateSpec& plate) {
    const double rim_r_out = plate.radius_m + kPlateRimThickness;
    const double z_top = plate.top_z_m, z_rim = plate.top_z_m + plate.rim_height_m;
    const double r = std::hypot(p.x - plate.center.x, p.y - plate.center.y);
    auto face = [](double du, double dv) { return std::hypot(du, dv); };
    const double d_disc = face(std::max(r - plate.radius_m, 0.0), p.z - z_top);
    const double d_lip =
        face(std::max({plate.radius_m - r, r - rim_r_out, 0.0}), p.z - z_rim);
    const double d_inner = face(r - plate.radius_m, std::max({z_top - p.z, p.z - z_rim, 0.0}));
    const double d_outer = face(r - rim_r_out, std::max({0.0 - p.z, p.z - z_rim, 0.0}));
    const double d_table = std::abs(p.z);
    return std::min({d_disc, d_lip, d_inner, d_outer, d_table});
}

bool reports_equal(const SettleReport& a, const SettleReport& b) {
    if (a.settled.size() != b.settled.size() || a.rejected.size() != b.rejected.size() ||
        a.steps_simulated != b.steps_simulated)
        return false;
    for (size_t i = 0; i < a.settled.size(); ++i) {
        const auto& x = a.settled[i];
        const auto& y = b.settled[i];
        if (x.asset_id != y.asset_id || !(x.state.position == y.state.position) ||
            !(x.state.orientation == y.state.orientation))
            return false;
    }
    for (size_t i = 0; i < a.rejected.size(); ++i)
        if (a.rejected[i].asset_id != b.rejected[i].asset_id ||
            a.rejected[i].reason != b.rejected[i].reason)
            return false;
    return true;
}

} // namespace

TEST_SUITE_BEGIN("sim");

TEST_CASE("sim params validation") {
    SimParams p;
    CHECK_NOTHROW(validate_sim_params(p));
    p.timestep_s = 0.0;
    CHECK_THROWS_AS(validate_sim_params(p), Error);
    p = SimParams{};
    p.settle_hold_s = 20.0;  // hold longer than max_sim_s
    CHECK_THROWS_AS(validate_sim_params(p), Error);
}

TEST_CASE("plan_drops assigns distinct segments and in-segment points") {
    const AssetLibrary lib = make_builtin_library();
    std::vector<std::string> items;
    for (size_t i = 0; i < 7; ++i) items.push_back(lib.at_index(i).asset_id);

    PlateSpec plate;  // segment_count 8
    SimParams params;
    Rng rng(99);
    const DropPlan plan = plan_drops(items, plate, params, rng);
    REQUIRE(plan.entries.size() == 7);

    const double seg_width = 2.0 * kPi / plate.segment_count;
    std::set<int> segments;
    for (const auto& e : plan.entries) {
        segments.insert(e.segment_index);
        CHECK(e.drop_height_m >= params.drop_height_min_m);
        CHECK(e.drop_height_m <= params.drop_height_max_m);
        CHECK(e.initial_orientation.norm() == doctest::Approx(1.0).epsilon(1e-9));

        // independent recheck of segment membership and the radial band
        const Vec2 d = e.drop_point - Vec2{plate.center.x, plate.center.y};
        const double radius = d.norm();
        CHECK(radius >= 0.20 * plate.radius_m - 1e-12);
        CHECK(radius <= 0.75 * plate.radius_m + 1e-12);
        double angle = std::atan2(d.y, d.x);
        if (angle < 0) angle += 2.0 * kPi;
        const int seg = static_cast<int>(angle / seg_width);
        CHECK(seg == e.segment_index);
        // 10% angular margin per side keeps points in the segment interior
        const double local = angle - seg * seg_width;
        CHECK(local >= 0.10 * seg_width - 1e-12);
        CHECK(local <= 0.90 * seg_width + 1e-12);
    }
    CHECK(segments.size() == 7);
}

TEST_CASE("adjacent-segment drop points keep their angular separation") {
    // two items forced into adjacent segments by repetition: with 8 segments
    // and the interior margin, any two points in different segments are at
    // least the double margin apart in angle
    const AssetLibrary lib = make_builtin_library();
    PlateSpec plate;
    SimParams params;
    const double seg_width = 2.0 * kPi / plate.segment_count;
    const double min_separation = seg_width - 0.80 * seg_width;  // interior width is 80%

    for (uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(seed);
        const DropPlan plan =
            plan_drops({lib.at_index(0).asset_id, lib.at_index(1).asset_id}, plate, params, rng);
        REQUIRE(plan.entries.size() == 2);
        if (std::abs(plan.entries[0].segment_index - plan.entries[1].segment_index) != 1)
            continue;  // only adjacent pairs are constrained here
        auto angle_of = [&](const DropEntry& e) {
            const Vec2 d = e.drop_point - Vec2{plate.center.x, plate.center.y};
            double a = std::atan2(d.y, d.x);
            return a < 0 ? a + 2.0 * kPi : a;
        };
        double delta = std::abs(angle_of(plan.entries[0]) - angle_of(plan.entries[1]));
        delta = std::min(delta, 2.0 * kPi - delta);
        CHECK(delta >= min_separation - 1e-9);
    }
}

TEST_CASE("plan_drops rejects more items than segments") {
    const AssetLibrary lib = make_builtin_library();
    std::vector<std::string> items;
    for (size_t i = 0; i < 5; ++i) items.push_back(lib.at_index(i).asset_id);
    PlateSpec plate;
    plate.segment_count = 4;
    SimParams params;
    Rng rng(1);
    try {
        plan_drops(items, plate, params, rng);
        FAIL("overfull plan accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == Error::Kind::Planning);
    }
}

TEST_CASE("plan_drops is deterministic per rng seed") {
    const AssetLibrary lib = make_builtin_library();
    std::vector<std::string> items{lib.at_index(0).asset_id, lib.at_index(3).asset_id};
    PlateSpec plate;
    SimParams params;
    Rng a(7), b(7);
    const DropPlan pa = plan_drops(items, plate, params, a);
    const DropPlan pb = plan_drops(items, plate, params, b);
    REQUIRE(pa.entries.size() == pb.entries.size());
    for (size_t i = 0; i < pa.entries.size(); ++i) {
        CHECK(pa.entries[i].drop_point == pb.entries[i].drop_point);
        CHECK(pa.entries[i].drop_height_m == pb.entries[i].drop_height_m);
        CHECK(pa.entries[i].initial_orientation == pb.entries[i].initial_orientation);
    }
}

TEST_CASE("a sphere dropped over the plate center settles at the analytic height") {
    const double radius = 0.03;
    const AssetLibrary lib = sphere_library(2 * radius);
    PlateSpec plate;  // top_z 0.02
    SimParams params;

    DropPlan plan;
    plan.entries.push_back({lib.at_index(0).asset_id, 0,
                            Vec2{plate.center.x, plate.center.y}, 0.15, Quat::identity()});
    const SettleReport report = simulate(plan, plate, lib, params);
    REQUIRE(report.settled.size() == 1);
    CHECK(report.rejected.empty());

    // analytic rest pose: sphere center one radius above the plate surface
    const RigidState& st = report.settled[0].state;
    CHECK(std::abs(st.position.z - (plate.top_z_m + radius)) <= 1e-3);
    CHECK(st.linear_velocity.norm() < params.settle_speed_eps);
    CHECK(st.angular_velocity.norm() < params.settle_speed_eps);
    CHECK(st.orientation.norm() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(report.had_contact);
    CHECK(report.kinetic_energy_final < report.kinetic_energy_first_contact);
}

TEST_CASE("empty plan yields an empty report") {
    const AssetLibrary lib = make_builtin_library();
    const SettleReport report = simulate(DropPlan{}, PlateSpec{}, lib, SimParams{});
    CHECK(report.settled.empty());
    CHECK(report.rejected.empty());
    CHECK(report.steps_simulated == 0);
}

TEST_CASE("a drop point outside the plate is rejected as off_plate") {
    const AssetLibrary lib = sphere_library(0.04);
    PlateSpec plate;
    SimParams params;
    DropPlan plan;  // malicious plan: over the bare table, far from the plate
    plan.entries.push_back(
        {lib.at_index(0).asset_id, 0, Vec2{plate.radius_m * 3.0, 0.0}, 0.15, Quat::identity()});
    const SettleReport report = simulate(plan, plate, lib, params);
    CHECK(report.settled.empty());
    REQUIRE(report.rejected.size() == 1);
    CHECK(report.rejected[0].reason == RejectReason::OffPlate);
    CHECK(std::string(to_string(RejectReason::OffPlate)) == "off_plate");
}

TEST_CASE("multi-item batch: partition, support, interpenetration, energy, determinism") {
    const AssetLibrary lib = make_builtin_library();
    PlateSpec plate;
    SimParams params;

    for (uint64_t scene = 0; scene < 10; ++scene) {
        const uint64_t seed = derive_seed(1234, scene);
        Rng rng_items(derive_seed(seed, 1)), rng_plan(derive_seed(seed, 2));
        const auto items = sample_items(lib, 7, rng_items);
        Rng rng_plan_copy = rng_plan;
        const DropPlan plan = plan_drops(items, plate, params, rng_plan);
        const SettleReport report = simulate(plan, plate, lib, params);

        // partition: settled + rejected ids == planned ids, no duplicates
        std::set<std::string> planned(items.begin(), items.end());
        std::set<std::string> outcome;
        for (const auto& s : report.settled) CHECK(outcome.insert(s.asset_id).second);
        for (const auto& r : report.rejected) CHECK(outcome.insert(r.asset_id).second);
        CHECK(outcome == planned);

        // support invariant for every settled item
        std::vector<std::vector<Vec3>> hulls;
        for (const auto& s : report.settled)
            hulls.push_back(transformed_hull(lib.at(s.asset_id),
                                             Pose{s.state.position, s.state.orientation}));
        for (size_t i = 0; i < report.settled.size(); ++i) {
            const auto& s = report.settled[i];
            const Vec3 low = lowest_hull_point(lib.at(s.asset_id),
                                               Pose{s.state.position, s.state.orientation});
            double support = resting_surface_distance(low, plate);
            for (size_t j = 0; j < hulls.size(); ++j)
                if (j != i) support = std::min(support, point_hull_distance(low, hulls[j]));
            CHECK(support <= 1e-3);

            // quaternions stay unit through stepping
            CHECK(s.state.orientation.norm() == doctest::Approx(1.0).epsilon(1e-6));
        }

        // interpenetration between settled hulls stays within tolerance
        for (size_t i = 0; i < hulls.size(); ++i)
            for (size_t j = i + 1; j < hulls.size(); ++j)
                if (gjk_distance(hulls[i], hulls[j]).intersecting) {
                    const PenetrationResult p = epa_penetration(hulls[i], hulls[j]);
                    CHECK(p.depth <= 2e-3);
                }

        // dissipative contacts
        if (report.had_contact && !report.settled.empty())
            CHECK(report.kinetic_energy_final < report.kinetic_energy_first_contact);

        // re-run with an identical plan: bit-identical report
        const DropPlan plan2 = plan_drops(items, plate, params, rng_plan_copy);
        const SettleReport report2 = simulate(plan2, plate, lib, params);
        CHECK(reports_equal(report, report2));
    }
}

TEST_CASE("compose_dynamic_scene returns settled items only, deterministically") {
    const AssetLibrary lib = make_builtin_library();
    PlateSpec plate;
    SimParams params;

    const Scene scene = compose_dynamic_scene(lib, plate, params, 7, 2468);
    CHECK(scene.items.size() >= 1);
    CHECK(scene.items.size() <= 7);
    CHECK(scene.plating_mode == "dynamic");
    CHECK(scene.seed == 2468);

    const Scene again = compose_dynamic_scene(lib, plate, params, 7, 2468);
    REQUIRE(again.items.size() == scene.items.size());
    for (size_t i = 0; i < scene.items.size(); ++i) {
        CHECK(scene.items[i].asset_id == again.items[i].asset_id);
        CHECK(scene.items[i].pose == again.items[i].pose);
    }
}

TEST_CASE("compose_dynamic_scene with a single-sphere library settles that sphere") {
    const AssetLibrary lib = sphere_library(0.05);
    const Scene scene = compose_dynamic_scene(lib, PlateSpec{}, SimParams{}, 7, 99);
    REQUIRE(scene.items.size() == 1);
    CHECK(scene.items[0].asset_id == lib.at_index(0).asset_id);
}

TEST_CASE("compose_dynamic_scene rejects an empty library") {
    AssetLibrary empty;
    CHECK_THROWS_AS(compose_dynamic_scene(empty, PlateSpec{}, SimParams{}, 7, 1), Error);
}

TEST_SUITE_END();
