#pragma once

#include <vector>

#include "mealgen/math.hpp"

namespace mealgen {

// Queries against the convex hulls of point sets, via support mappings only
// (no face enumeration). Points are expected in a common (world) frame.

struct DistanceResult {
    double distance = 0.0;   // 0 when the hulls intersect
    Vec3 witness_a, witness_b;
    bool intersecting = false;
};

DistanceResult gjk_distance(const std::vector<Vec3>& a, const std::vector<Vec3>& b);

struct PenetrationResult {
    bool ok = false;
    Vec3 normal;      // unit, pushes A out of B
    double depth = 0.0;
    Vec3 contact_point;  // midpoint of the witness pair
};

// Valid only when the hulls actually intersect (gjk says so).
PenetrationResult epa_penetration(const std::vector<Vec3>& a, const std::vector<Vec3>& b);

double point_hull_distance(const Vec3& p, const std::vector<Vec3>& hull);

} // namespace mealgen
