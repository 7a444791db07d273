#pragma once

#include <string>
#include <vector>

#include "mealgen/asset.hpp"
#include "mealgen/rng.hpp"
#include "mealgen/scene.hpp"

namespace mealgen {

struct SimParams {
    double gravity = 9.81;            // m/s^2, downward
    double timestep_s = 1.0 / 240.0;
    double friction_coeff = 0.5;
    double restitution = 0.1;
    double settle_speed_eps = 0.01;   // m/s linear, rad/s angular
    double settle_hold_s = 0.5;
    double max_sim_s = 10.0;
    double drop_height_min_m = 0.10;  // above the plate surface
    double drop_height_max_m = 0.30;
    double linear_damping = 0.05;     // 1/s
    double angular_damping = 0.05;    // 1/s
    double rolling_resistance = 0.02; // torque budget, fraction of normal impulse x lever arm
    int solver_iterations = 12;
};

void validate_sim_params(const SimParams& p);

struct RigidState {
    Vec3 position;                    // object-frame origin, world
    Quat orientation = Quat::identity();
    Vec3 linear_velocity;
    Vec3 angular_velocity;
};

struct DropEntry {
    std::string asset_id;
    int segment_index = 0;
    Vec2 drop_point;        // world xy over the plate
    double drop_height_m = 0.0;
    Quat initial_orientation = Quat::identity();
};

struct DropPlan {
    std::vector<DropEntry> entries;
};

enum class RejectReason { OffPlate, Unsettled };
const char* to_string(RejectReason r);

struct SettleReport {
    struct Settled {
        std::string asset_id;
        RigidState state;
    };
    struct Rejected {
        std::string asset_id;
        RejectReason reason;
    };
    std::vector<Settled> settled;
    std::vector<Rejected> rejected;
    long steps_simulated = 0;
    // dissipation diagnostics
    double kinetic_energy_first_contact = 0.0;
    double kinetic_energy_final = 0.0;
    bool had_contact = false;
};

// One distinct angular segment per item; drop points uniform over the
// segment's annular sector (radial band [0.20, 0.75] of the plate radius,
// 10% angular margin per side); heights uniform in the configured range;
// orientations uniform over rotations. Throws a planning error when there
// are more items than segments.
DropPlan plan_drops(const std::vector<std::string>& items, const PlateSpec& plate,
                    const SimParams& params, Rng& rng);

// Semi-implicit rigid-body settling with impulse contacts between item
// convex hulls, the plate and the table. Bit-deterministic for equal inputs.
SettleReport simulate(const DropPlan& plan, const PlateSpec& plate,
                      const AssetLibrary& library, const SimParams& params);

// Sample items, plan, simulate; keep only settled items. Scenes that settle
// zero items are regenerated with an attempt-derived seed, up to
// retry_budget retries; exhaustion throws a generation error.
Scene compose_dynamic_scene(const AssetLibrary& library, const PlateSpec& plate,
                            const SimParams& params, int max_items, uint64_t seed,
                            int retry_budget = 3);

// Lowest world-space point of an item's collision hull (support along -z).
Vec3 lowest_hull_point(const FoodAsset& asset, const Pose& pose);

// World-space hull point cloud for invariant checks.
std::vector<Vec3> transformed_hull(const FoodAsset& asset, const Pose& pose);

} // namespace mealgen
