#pragma once

#include <string>
#include <vector>

#include "mealgen/math.hpp"

namespace mealgen {

struct PlateSpec {
    Vec3 center{0, 0, 0};     // world, at table level
    double radius_m = 0.12;
    double rim_height_m = 0.008;
    double top_z_m = 0.02;    // plate surface height
    int segment_count = 8;

    bool operator==(const PlateSpec& o) const {
        return center == o.center && radius_m == o.radius_m &&
               rim_height_m == o.rim_height_m && top_z_m == o.top_z_m &&
               segment_count == o.segment_count;
    }
};

struct PlacedItem {
    std::string asset_id;
    Pose pose;  // object frame -> world
};

struct Scene {
    uint64_t seed = 0;  // provenance: the seed that produced this scene
    PlateSpec plate;
    std::vector<PlacedItem> items;
    std::string plating_mode;  // "dynamic" | "procedural"
};

} // namespace mealgen
