#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mealgen/asset.hpp"
#include "mealgen/error.hpp"
#include "mealgen/rng.hpp"
#include "mealgen/rules.hpp"

using namespace mealgen;

namespace {

std::string builtin_id(size_t i) { return make_builtin_library().at_index(i).asset_id; }

PlatingRuleSet random_rule_set(Rng& rng) {
    PlatingRuleSet rs;
    rs.plate.radius_m = rng.uniform(0.08, 0.2);
    rs.plate.rim_height_m = rng.uniform(0.002, 0.02);
    rs.plate.top_z_m = rng.uniform(0.005, 0.05);
    rs.plate.segment_count = static_cast<int>(rng.uniform_int(1, 16));
    rs.plate.center = {rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1), 0.0};
    if (rng.uniform() < 0.5) rs.seed = rng.next_u64();

    const int n_rules = static_cast<int>(rng.uniform_int(1, 4));
    for (int i = 0; i < n_rules; ++i) {
        PlatingRule r;
        r.item = "item_" + std::to_string(rng.uniform_index(20));
        switch (rng.uniform_index(4)) {
            case 0:
                r.kind = RuleKind::Ring;
                r.count = static_cast<int>(rng.uniform_int(1, 8));
                r.center = {rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05)};
                r.radius_m = rng.uniform(0.01, 0.1);
                r.start_angle_rad = rng.uniform(0.0, 2.0 * kPi);
                break;
            case 1:
                r.kind = RuleKind::Grid;
                r.rows = static_cast<int>(rng.uniform_int(1, 4));
                r.cols = static_cast<int>(rng.uniform_int(1, 4));
                r.count = r.rows * r.cols;
                r.pitch_m = rng.uniform(0.01, 0.08);
                r.origin = {rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05)};
                break;
            case 2:
                r.kind = RuleKind::Stack;
                r.count = static_cast<int>(rng.uniform_int(1, 5));
                r.base = {rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05)};
                r.vertical_gap_m = rng.uniform(0.0, 0.01);
                break;
            default: {
                r.kind = RuleKind::Explicit;
                const int n_poses = static_cast<int>(rng.uniform_int(1, 4));
                for (int p = 0; p < n_poses; ++p)
                    r.poses.push_back(Pose{{rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2),
                                            rng.uniform(0.0, 0.2)},
                                           rng.uniform_rotation()});
                r.count = n_poses;
                break;
            }
        }
        if (rng.uniform() < 0.4)
            r.jitter = Jitter{rng.uniform(0.0, 0.01), rng.uniform(0.0, 0.3)};
        rs.rules.push_back(std::move(r));
    }
    return rs;
}

} // namespace

TEST_SUITE_BEGIN("rules");

TEST_CASE("parse a minimal ring document") {
    const PlatingRuleSet rs = parse_rules(
        "plate: {radius_m: 0.12}\n"
        "rules:\n"
        "  - kind: ring\n"
        "    item: apple\n"
        "    count: 4\n"
        "    radius_m: 0.08\n");
    REQUIRE(rs.rules.size() == 1);
    CHECK(rs.rules[0].kind == RuleKind::Ring);
    CHECK(rs.rules[0].count == 4);
    CHECK(rs.rules[0].radius_m == 0.08);
    CHECK(rs.plate.radius_m == 0.12);
    CHECK_FALSE(rs.seed.has_value());
}

TEST_CASE("unknown rule kind is rejected by name") {
    try {
        parse_rules("rules:\n  - kind: spiral\n    item: apple\n    count: 3\n");
        FAIL("unknown kind accepted");
    } catch (const Error& e) {
        CHECK(e.field == "kind");
        CHECK(std::string(e.what()).find("spiral") != std::string::npos);
    }
}

TEST_CASE("missing required field names the rule index and field") {
    try {
        parse_rules("rules:\n  - kind: ring\n    item: apple\n    count: 3\n");
        FAIL("ring without radius accepted");
    } catch (const Error& e) {
        CHECK(e.field == "radius_m");
        CHECK(std::string(e.what()).find("rules[0]") != std::string::npos);
    }
}

TEST_CASE("non-positive dimensions are range errors") {
    try {
        parse_rules("rules:\n  - {kind: ring, item: a, count: 3, radius_m: -0.1}\n");
        FAIL("negative radius accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == Error::Kind::Range);
    }
    CHECK_THROWS_AS(parse_rules("rules:\n  - {kind: grid, item: a, rows: 0, cols: 2, pitch_m: 0.04}\n"),
                    Error);
    CHECK_THROWS_AS(parse_rules("rules:\n  - {kind: stack, item: a, count: 0}\n"), Error);
}

TEST_CASE("unknown keys anywhere are hard errors") {
    CHECK_THROWS_AS(parse_rules("rules:\n  - {kind: ring, item: a, count: 1, radius_m: 0.05, wobble: 2}\n"),
                    Error);
    CHECK_THROWS_AS(parse_rules("plate: {radius_m: 0.1, colour: red}\nrules:\n"
                                "  - {kind: stack, item: a, count: 1}\n"),
                    Error);
    CHECK_THROWS_AS(parse_rules("typo_section: 1\nrules:\n  - {kind: stack, item: a, count: 1}\n"),
                    Error);
}

TEST_CASE("yaml syntax errors carry line information") {
    try {
        parse_rules("rules:\n  - kind: ring\n   bad indent: [\n");
        FAIL("syntax error accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == Error::Kind::Parse);
        CHECK(e.line >= 1);
    }
}

TEST_CASE("empty or no-item documents are rejected") {
    CHECK_THROWS_AS(parse_rules(""), Error);
    CHECK_THROWS_AS(parse_rules("plate: {radius_m: 0.1}\n"), Error);
    CHECK_THROWS_AS(parse_rules("rules: []\n"), Error);
}

TEST_CASE("round-trip stability over 200 random rule sets") {
    Rng rng(314159);
    for (int i = 0; i < 200; ++i) {
        const PlatingRuleSet rs = random_rule_set(rng);
        const std::string text = serialize_rules(rs);
        PlatingRuleSet back;
        try {
            back = parse_rules(text);
        } catch (const Error& e) {
            CAPTURE(text);
            FAIL("serialized document rejected: " << e.what());
        }
        CHECK(back == rs);
        // and a second hop stays fixed
        CHECK(serialize_rules(back) == text);
    }
}

TEST_CASE("fuzz: arbitrary bytes never crash the parser") {
    Rng rng(0xF00D);
    int parsed = 0, rejected = 0;
    for (int i = 0; i < 1000; ++i) {
        const size_t len = rng.uniform_index(300);
        std::string input;
        input.reserve(len);
        for (size_t b = 0; b < len; ++b) {
            // bias toward structural YAML bytes so the parser gets deeper
            const int roll = static_cast<int>(rng.uniform_index(10));
            if (roll < 6)
                input.push_back(" -:{}[]\n\"'#&*!|>%@`,?"[rng.uniform_index(22)]);
            else
                input.push_back(static_cast<char>(rng.uniform_index(256)));
        }
        try {
            parse_rules(input);
            ++parsed;
        } catch (const Error&) {
            ++rejected;  // structured rejection is the contract
        }
    }
    CHECK(parsed + rejected == 1000);
}

TEST_CASE("instantiate: ring places items at equal angles and radius") {
    const AssetLibrary lib = make_builtin_library();
    const std::string id = builtin_id(0);
    PlatingRuleSet rs;
    rs.plate.radius_m = 0.12;
    PlatingRule r;
    r.kind = RuleKind::Ring;
    r.item = id;
    r.count = 4;
    r.radius_m = 0.08;
    r.start_angle_rad = 0.0;
    rs.rules.push_back(r);

    Rng rng(1);
    const Scene scene = instantiate(rs, lib, rng);
    REQUIRE(scene.items.size() == 4);
    CHECK(scene.plating_mode == "procedural");
    for (int k = 0; k < 4; ++k) {
        const Vec3& p = scene.items[k].pose.position;
        const double expected_angle = kPi / 2.0 * k;
        CHECK(std::abs(p.x - 0.08 * std::cos(expected_angle)) <= 1e-9);
        CHECK(std::abs(p.y - 0.08 * std::sin(expected_angle)) <= 1e-9);
        CHECK(std::hypot(p.x, p.y) == doctest::Approx(0.08).epsilon(1e-9));
        // items rest on the plate surface: hull bottom at top_z
        const double bottom = p.z + lib.at(id).aabb_object.lo.z;
        CHECK(bottom == doctest::Approx(rs.plate.top_z_m).epsilon(1e-12));
    }
}

TEST_CASE("instantiate: explicit poses pass through exactly without jitter") {
    const AssetLibrary lib = make_builtin_library();
    PlatingRuleSet rs;
    PlatingRule r;
    r.kind = RuleKind::Explicit;
    r.item = builtin_id(1);
    const Pose pose{{0.31, -0.07, 0.045}, Quat::from_axis_angle({0, 0, 1}, 0.4)};
    r.poses = {pose};
    r.count = 1;
    rs.rules.push_back(r);

    Rng rng(2);
    const Scene scene = instantiate(rs, lib, rng);
    REQUIRE(scene.items.size() == 1);
    CHECK(scene.items[0].pose.position == pose.position);
    // identity yaw multiplication then renormalization may touch the last ulp
    CHECK(std::abs(scene.items[0].pose.orientation.w - pose.orientation.w) <= 1e-15);
    CHECK(std::abs(scene.items[0].pose.orientation.z - pose.orientation.z) <= 1e-15);
}

TEST_CASE("instantiate: grid nearest-neighbor distance equals the pitch") {
    const AssetLibrary lib = make_builtin_library();
    PlatingRuleSet rs;
    PlatingRule r;
    r.kind = RuleKind::Grid;
    r.item = builtin_id(0);
    r.rows = 2;
    r.cols = 3;
    r.count = 6;
    r.pitch_m = 0.04;
    r.origin = {-0.04, -0.02};
    rs.rules.push_back(r);

    Rng rng(3);
    const Scene scene = instantiate(rs, lib, rng);
    REQUIRE(scene.items.size() == 6);
    for (size_t i = 0; i < 6; ++i) {
        double nearest = 1e9;
        for (size_t j = 0; j < 6; ++j) {
            if (i == j) continue;
            const Vec3 d = scene.items[i].pose.position - scene.items[j].pose.position;
            nearest = std::min(nearest, d.norm());
        }
        CHECK(nearest == doctest::Approx(0.04).epsilon(1e-9));
    }
}

TEST_CASE("instantiate: stack raises each item by extent plus gap") {
    const AssetLibrary lib = make_builtin_library();
    const std::string id = builtin_id(0);
    const double item_h = lib.at(id).aabb_object.extent().z;
    PlatingRuleSet rs;
    PlatingRule r;
    r.kind = RuleKind::Stack;
    r.item = id;
    r.count = 3;
    r.vertical_gap_m = 0.002;
    rs.rules.push_back(r);

    Rng rng(4);
    const Scene scene = instantiate(rs, lib, rng);
    REQUIRE(scene.items.size() == 3);
    const double z0 = scene.items[0].pose.position.z;
    CHECK(scene.items[1].pose.position.z ==
          doctest::Approx(z0 + item_h + 0.002).epsilon(1e-12));
    CHECK(scene.items[2].pose.position.z ==
          doctest::Approx(z0 + 2 * (item_h + 0.002)).epsilon(1e-12));
}

TEST_CASE("instantiate: jitter stays within its declared bounds") {
    const AssetLibrary lib = make_builtin_library();
    PlatingRuleSet rs;
    PlatingRule r;
    r.kind = RuleKind::Grid;
    r.item = builtin_id(0);
    r.rows = 2;
    r.cols = 2;
    r.count = 4;
    r.pitch_m = 0.05;
    r.origin = {-0.025, -0.025};
    r.jitter = Jitter{0.004, 0.2};
    rs.rules.push_back(r);

    for (uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        const Scene scene = instantiate(rs, lib, rng);
        REQUIRE(scene.items.size() == 4);
        for (int k = 0; k < 4; ++k) {
            const int row = k / 2, col = k % 2;
            const Vec3& p = scene.items[k].pose.position;
            CHECK(std::abs(p.x - (-0.025 + col * 0.05)) <= 0.004 + 1e-12);
            CHECK(std::abs(p.y - (-0.025 + row * 0.05)) <= 0.004 + 1e-12);
            // yaw magnitude from the quaternion w component
            const double yaw = 2.0 * std::acos(std::min(1.0, std::abs(scene.items[k].pose.orientation.w)));
            CHECK(yaw <= 0.2 + 1e-9);
        }
    }
}

TEST_CASE("instantiate resolves semantic classes and rejects unknown selectors") {
    const AssetLibrary lib = make_builtin_library();
    const std::string cls = lib.class_names().front();

    PlatingRuleSet rs;
    PlatingRule r;
    r.kind = RuleKind::Stack;
    r.item = cls;  // class selector: sample members of the class
    r.count = 3;
    rs.rules.push_back(r);
    Rng rng(5);
    const Scene scene = instantiate(rs, lib, rng);
    REQUIRE(scene.items.size() == 3);
    for (const auto& item : scene.items) CHECK(lib.at(item.asset_id).semantic_class == cls);

    rs.rules[0].item = "not_a_thing";
    try {
        Rng rng2(5);
        instantiate(rs, lib, rng2);
        FAIL("unknown selector accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == Error::Kind::Lookup);
        CHECK(std::string(e.what()).find("not_a_thing") != std::string::npos);
    }
}

TEST_CASE("instantiate rejects on-plate placements beyond the plate radius") {
    const AssetLibrary lib = make_builtin_library();
    PlatingRuleSet rs;
    rs.plate.radius_m = 0.05;
    PlatingRule r;
    r.kind = RuleKind::Ring;
    r.item = builtin_id(0);
    r.count = 2;
    r.radius_m = 0.09;  // beyond the 0.05 plate
    rs.rules.push_back(r);
    Rng rng(6);
    try {
        instantiate(rs, lib, rng);
        FAIL("off-plate ring accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == Error::Kind::Placement);
    }
}

TEST_CASE("instantiate is deterministic for equal seeds") {
    const AssetLibrary lib = make_builtin_library();
    PlatingRuleSet rs;
    PlatingRule r;
    r.kind = RuleKind::Grid;
    r.item = lib.class_names().front();
    r.rows = 2;
    r.cols = 2;
    r.count = 4;
    r.pitch_m = 0.03;
    r.origin = {-0.015, -0.015};
    r.jitter = Jitter{0.003, 0.5};
    rs.rules.push_back(r);

    Rng a(42), b(42);
    const Scene sa = instantiate(rs, lib, a);
    const Scene sb = instantiate(rs, lib, b);
    REQUIRE(sa.items.size() == sb.items.size());
    for (size_t i = 0; i < sa.items.size(); ++i) {
        CHECK(sa.items[i].asset_id == sb.items[i].asset_id);
        CHECK(sa.items[i].pose == sb.items[i].pose);
    }
}

TEST_SUITE_END();
