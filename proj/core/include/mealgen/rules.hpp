#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mealgen/asset.hpp"
#include "mealgen/rng.hpp"
#include "mealgen/scene.hpp"

namespace mealgen {

// Rule-based ("procedural") plating: scenes described by a small YAML
// vocabulary and instantiated at fixed poses, with no physics involved.
//
// YAML schema (frozen; see configs/plating_rules.example.yaml):
//   plate:   {center: [x,y,z], radius_m, rim_height_m, top_z_m, segment_count}
//   seed:    optional integer
//   rules:
//     - kind: ring | grid | stack | explicit
//       item: <asset id or semantic class>
//       jitter: {pos_m, yaw_rad}            # optional, uniform bounds
//       # ring:     count, center: [x,y], radius_m, start_angle_rad
//       # grid:     rows, cols, pitch_m, origin: [x,y]
//       # stack:    count, base: [x,y], vertical_gap_m
//       # explicit: poses: [{position: [x,y,z], orientation: [w,x,y,z]}]
//
// Ring/grid/stack coordinates are relative to the plate center; items rest
// on the plate surface (or on the previous item, for stacks). Explicit poses
// are absolute world poses. Unknown keys anywhere are hard errors.

enum class RuleKind { Explicit, Ring, Grid, Stack };

const char* to_string(RuleKind k);

struct Jitter {
    double pos_m = 0.0;    // uniform in [-pos_m, +pos_m] per horizontal axis
    double yaw_rad = 0.0;  // uniform in [-yaw_rad, +yaw_rad] about +z

    bool operator==(const Jitter& o) const {
        return pos_m == o.pos_m && yaw_rad == o.yaw_rad;
    }
};

struct PlatingRule {
    RuleKind kind = RuleKind::Ring;
    std::string item;  // asset id, or semantic class to sample from
    int count = 1;

    // ring
    Vec2 center{0, 0};
    double radius_m = 0.0;
    double start_angle_rad = 0.0;
    // grid
    Vec2 origin{0, 0};
    int rows = 0, cols = 0;
    double pitch_m = 0.0;
    // stack
    Vec2 base{0, 0};
    double vertical_gap_m = 0.0;
    // explicit
    std::vector<Pose> poses;

    std::optional<Jitter> jitter;

    bool operator==(const PlatingRule& o) const {
        return kind == o.kind && item == o.item && count == o.count &&
               center == o.center && radius_m == o.radius_m &&
               start_angle_rad == o.start_angle_rad && origin == o.origin &&
               rows == o.rows && cols == o.cols && pitch_m == o.pitch_m &&
               base == o.base && vertical_gap_m == o.vertical_gap_m &&
               poses == o.poses && jitter == o.jitter;
    }
};

struct PlatingRuleSet {
    PlateSpec plate;
    std::optional<uint64_t> seed;
    std::vector<PlatingRule> rules;

    bool operator==(const PlatingRuleSet& o) const {
        return plate == o.plate && seed == o.seed && rules == o.rules;
    }
};

// Parses and fully validates a YAML document. Never crashes on arbitrary
// bytes: any malformed input raises Error (Parse/Validation/Range) instead.
PlatingRuleSet parse_rules(const std::string& yaml_text);

PlatingRuleSet load_rules(const std::string& path);

// Emits YAML that parse_rules() accepts; parse(serialize(R)) == R.
std::string serialize_rules(const PlatingRuleSet& rules);

// Places every rule's items at their (jittered) nominal poses, in rule and
// then placement order. Throws Lookup for unresolvable selectors, Placement
// when a plate-relative rule lands an item center outside the plate radius.
Scene instantiate(const PlatingRuleSet& rules, const AssetLibrary& library, Rng& rng);

} // namespace mealgen
