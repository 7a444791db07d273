#include "mealgen/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "mealgen/convex.hpp"
#include "mealgen/error.hpp"
#include "mealgen/mesh.hpp"

namespace mealgen {

const char* to_string(RejectReason r) {
    return r == RejectReason::OffPlate ? "off_plate" : "unsettled";
}

void validate_sim_params(const SimParams& p) {
    if (!(p.timestep_s > 0.0))
        throw validation_error("timestep_s must be > 0", "timestep_s");
    if (!(p.settle_hold_s > 0.0))
        throw validation_error("settle_hold_s must be > 0", "settle_hold_s");
    if (!(p.max_sim_s >= p.settle_hold_s))
        throw validation_error("max_sim_s must be >= settle_hold_s", "max_sim_s");
    if (!(p.drop_height_min_m <= p.drop_height_max_m))
        throw validation_error("drop height range is inverted", "drop_height_min_m");
    if (!(p.settle_speed_eps > 0.0))
        throw validation_error("settle_speed_eps must be > 0", "settle_speed_eps");
    if (!(p.rolling_resistance >= 0.0))
        throw validation_error("rolling_resistance must be >= 0", "rolling_resistance");
}

DropPlan plan_drops(const std::vector<std::string>& items, const PlateSpec& plate,
                    const SimParams& params, Rng& rng) {
    validate_sim_params(params);
    if (plate.segment_count < 1 || plate.radius_m <= 0.0)
        throw validation_error("plate needs radius > 0 and segment_count >= 1");
    if (items.size() > static_cast<size_t>(plate.segment_count)) {
        Error e(Error::Kind::Planning,
                "cannot plan " + std::to_string(items.size()) + " items over " +
                    std::to_string(plate.segment_count) +
                    " plate segments; raise segment_count");
        throw e;
    }

    constexpr double kAngularMargin = 0.10;  // fraction of a segment, per side
    constexpr double kInnerFrac = 0.20;      // radial band of the plate radius
    constexpr double kOuterFrac = 0.75;

    const double seg_step = 2.0 * kPi / plate.segment_count;
    const double r0 = kInnerFrac * plate.radius_m;
    const double r1 = kOuterFrac * plate.radius_m;

    std::vector<size_t> segments =
        rng.sample_without_replacement(static_cast<size_t>(plate.segment_count), items.size());

    DropPlan plan;
    plan.entries.reserve(items.size());
    for (size_t i = 0; i < items.size(); ++i) {
        DropEntry e;
        e.asset_id = items[i];
        e.segment_index = static_cast<int>(segments[i]);
        const double a_lo = (segments[i] + kAngularMargin) * seg_step;
        const double a_hi = (segments[i] + 1.0 - kAngularMargin) * seg_step;
        const double theta = rng.uniform(a_lo, a_hi);
        const double r = std::sqrt(rng.uniform(r0 * r0, r1 * r1));  // uniform in area
        e.drop_point = {plate.center.x + r * std::cos(theta),
                        plate.center.y + r * std::sin(theta)};
        e.drop_height_m = rng.uniform(params.drop_height_min_m, params.drop_height_max_m);
        e.initial_orientation = rng.uniform_rotation();
        plan.entries.push_back(std::move(e));
    }
    return plan;
}

namespace {

struct Body {
    const FoodAsset* asset = nullptr;
    std::string asset_id;
    double inv_mass = 0.0;
    Mat3 inv_inertia_body = Mat3::identity();  // about COM, object axes
    Vec3 com_object;

    // state, tracked at the center of mass
    Vec3 pos;
    Quat orn;
    Vec3 vel, ang;
    Vec3 pseudo_vel, pseudo_ang;  // split-impulse correction, discarded each step

    // per-step caches
    Mat3 inv_inertia_world = Mat3::identity();
    std::vector<Vec3> world_hull;
    Aabb world_aabb;

    double quiet_time = 0.0;
};

struct Contact {
    int a = -1, b = -1;  // body indices; b < 0 means static geometry
    Vec3 point, normal;  // normal pushes A along +normal
    double depth = 0.0;
    Vec3 ra, rb;
    Vec3 local_a;            // anchor in A's body frame, for warm-start matching
    double bias = 0.0;       // positional target, solved on pseudo-velocities
    double rest_bias = 0.0;  // restitution target, solved on real velocities
    Vec3 t1, t2;
    double mass_n = 0.0, mass_t1 = 0.0, mass_t2 = 0.0;
    double p_n = 0.0, p_t1 = 0.0, p_t2 = 0.0, p_b = 0.0;
};

// accumulated impulses from the previous step, for warm starting
struct CachedContact {
    Vec3 local_a;
    double p_n = 0.0;
    Vec3 friction;  // world space; re-projected onto the new tangent basis
};

void tangent_basis(const Vec3& n, Vec3& t1, Vec3& t2) {
    if (std::abs(n.z) < 0.9)
        t1 = n.cross(Vec3{0, 0, 1}).normalized();
    else
        t1 = n.cross(Vec3{1, 0, 0}).normalized();
    t2 = n.cross(t1);
}

Body make_body(const FoodAsset& asset, const DropEntry& entry, const PlateSpec& plate) {
    Body b;
    b.asset = &asset;
    b.asset_id = asset.asset_id;

    constexpr double kMassFloorKg = 1e-3;
    const double mass = std::max(asset.nutrition.mass_g / 1000.0, kMassFloorKg);
    b.inv_mass = 1.0 / mass;

    MassProperties mp = compute_mass_properties(asset.mesh);
    Mat3 inertia;
    if (mp.watertight_ok) {
        b.com_object = mp.center_of_mass;
        inertia = mp.inertia_unit_density * (mass / mp.volume);
    } else {
        // box approximation over the AABB
        b.com_object = asset.aabb_object.center();
        const Vec3 e = asset.aabb_object.extent();
        inertia = Mat3::diagonal({mass / 12.0 * (e.y * e.y + e.z * e.z),
                                  mass / 12.0 * (e.z * e.z + e.x * e.x),
                                  mass / 12.0 * (e.x * e.x + e.y * e.y)});
    }
    b.inv_inertia_body = inertia.inverse();

    b.orn = entry.initial_orientation.normalized();
    b.pos = Vec3{entry.drop_point.x, entry.drop_point.y,
                 plate.center.z + plate.top_z_m + entry.drop_height_m};
    return b;
}

void update_caches(Body& b) {
    const Mat3 R = b.orn.to_matrix();
    b.inv_inertia_world = R * b.inv_inertia_body * R.transposed();
    const Vec3 origin = b.pos - R * b.com_object;
    b.world_hull.resize(b.asset->collision_hull.size());
    Aabb box;
    for (size_t i = 0; i < b.asset->collision_hull.size(); ++i) {
        b.world_hull[i] = R * b.asset->collision_hull[i] + origin;
        box.expand(b.world_hull[i]);
    }
    b.world_aabb = box;
}

double kinetic_energy(const std::vector<Body>& bodies) {
    double ke = 0.0;
    for (const auto& b : bodies) {
        ke += 0.5 / b.inv_mass * b.vel.norm2();
        // world inertia = (I_world_inv)^-1; use the body-frame tensor instead
        const Mat3 R = b.orn.to_matrix();
        const Vec3 w_body = R.transposed() * b.ang;
        const Mat3 I_body = b.inv_inertia_body.inverse();
        ke += 0.5 * w_body.dot(I_body * w_body);
    }
    return ke;
}

} // namespace

std::vector<Vec3> transformed_hull(const FoodAsset& asset, const Pose& pose) {
    std::vector<Vec3> out;
    out.reserve(asset.collision_hull.size());
    for (const auto& p : asset.collision_hull) out.push_back(pose.apply(p));
    return out;
}

Vec3 lowest_hull_point(const FoodAsset& asset, const Pose& pose) {
    Vec3 best = pose.apply(asset.collision_hull.front());
    for (const auto& p : asset.collision_hull) {
        Vec3 w = pose.apply(p);
        if (w.z < best.z) best = w;
    }
    return best;
}

SettleReport simulate(const DropPlan& plan, const PlateSpec& plate,
                      const AssetLibrary& library, const SimParams& params) {
    validate_sim_params(params);

    SettleReport report;
    if (plan.entries.empty()) return report;

    std::vector<Body> bodies;
    bodies.reserve(plan.entries.size());
    for (const auto& entry : plan.entries)
        bodies.push_back(make_body(library.at(entry.asset_id), entry, plate));

    const double dt = params.timestep_s;
    const long max_steps = static_cast<long>(std::ceil(params.max_sim_s / dt));
    const Vec3 gravity{0, 0, -params.gravity};

    constexpr double kSlop = 3e-4;
    constexpr double kBaumgarte = 0.2;
    constexpr double kMaxBias = 0.5;  // caps positional correction at ~2 mm/step
    constexpr double kRestitutionThreshold = 0.25;  // m/s
    constexpr double kPairMargin = 5e-4;
    constexpr int kRimProbeCount = 128;  // lip circle samples, ~6 mm apart
    const double kSnapSpeed = 0.5 * params.settle_speed_eps;

    const double lin_damp = std::max(0.0, 1.0 - params.linear_damping * dt);
    const double ang_damp = std::max(0.0, 1.0 - params.angular_damping * dt);
    const double plate_r2 = plate.radius_m * plate.radius_m;
    const double table_z = plate.center.z;
    const double plate_top = plate.center.z + plate.top_z_m;
    // The plate solid matches make_plate_mesh: a top disc (r <= R, z <= top)
    // plus a rim ring (R < r <= R + thickness, z <= top + rim_height), both
    // resting on the table plane.
    const double rim_r_out = plate.radius_m + kPlateRimThickness;
    const double z_rim = plate_top + plate.rim_height_m;

    std::vector<Contact> contacts;
    std::unordered_map<int, std::vector<CachedContact>> warm;  // key: pair ids
    const auto pair_key = [](int a, int b) { return a * 64 + b + 1; };
    long step = 0;
    for (; step < max_steps; ++step) {
        // integrate velocities
        for (auto& b : bodies) {
            b.vel += gravity * dt;
            b.vel *= lin_damp;
            b.ang *= ang_damp;
            b.pseudo_vel = {0, 0, 0};
            b.pseudo_ang = {0, 0, 0};
        }
        for (auto& b : bodies) update_caches(b);

        // contact generation, canonical order: statics by body then vertex,
        // pairs by (i, j) ascending
        contacts.clear();
        std::vector<Vec3> probe(1);
        for (size_t bi = 0; bi < bodies.size(); ++bi) {
            Body& b = bodies[bi];
            for (const Vec3& v : b.world_hull) {
                const double dx = v.x - plate.center.x;
                const double dy = v.y - plate.center.y;
                const double r2 = dx * dx + dy * dy;
                // Speculative reach: a fast vertex can cross the whole margin
                // band in one step, so extend detection by this step's motion
                // and let the velocity solver stop it exactly at the surface.
                const double vz = (b.vel + b.ang.cross(v - b.pos)).z;
                const double reach = kPairMargin + std::max(0.0, -vz) * dt;
                Contact c;
                c.a = static_cast<int>(bi);
                c.point = v;
                if (r2 <= plate_r2) {
                    // over the disc only the top face can be hit
                    if (v.z < plate_top + reach) {
                        c.normal = {0, 0, 1};
                        c.depth = plate_top + kPairMargin - v.z;
                        contacts.push_back(c);
                    }
                    continue;
                }
                const double r = std::sqrt(r2);
                if (r < rim_r_out + kPairMargin && v.z < z_rim + reach) {
                    // in or near the rim ring: exit through the nearest face.
                    // The inner wall only exists above the disc top.
                    const double d_top = z_rim + kPairMargin - v.z;
                    const double d_out = rim_r_out + kPairMargin - r;
                    const double d_in = v.z > plate_top
                                            ? r - plate.radius_m + kPairMargin
                                            : std::numeric_limits<double>::infinity();
                    if (d_top <= d_out && d_top <= d_in) {
                        c.normal = {0, 0, 1};
                        c.depth = d_top;
                    } else if (d_out <= d_in) {
                        c.normal = {dx / r, dy / r, 0.0};
                        c.depth = d_out;
                    } else {
                        c.normal = {-dx / r, -dy / r, 0.0};
                        c.depth = d_in;
                    }
                    contacts.push_back(c);
                } else if (v.z < table_z + reach) {
                    c.normal = {0, 0, 1};
                    c.depth = table_z + kPairMargin - v.z;
                    contacts.push_back(c);
                }
            }

            // Rim lip probes: the lip is thinner than the hull vertex
            // spacing, so an edge straddling the rim can pass between the
            // vertex tests above. Probe the lip's top corner circles against
            // the hull itself.
            if (b.world_aabb.lo.z < z_rim + kPairMargin) {
                for (int s = 0; s < kRimProbeCount; ++s) {
                    const double t = 2.0 * kPi * s / kRimProbeCount;
                    const double ct = std::cos(t), st = std::sin(t);
                    for (double rr : {plate.radius_m, rim_r_out}) {
                        const Vec3 p = plate.center + Vec3{rr * ct, rr * st, z_rim};
                        if (!b.world_aabb.contains(p, kPairMargin)) continue;
                        probe[0] = p;
                        Vec3 n;
                        double depth;
                        const DistanceResult d = gjk_distance(b.world_hull, probe);
                        if (d.intersecting) {
                            const PenetrationResult pen =
                                epa_penetration(b.world_hull, probe);
                            if (!pen.ok) continue;
                            n = pen.normal;
                            if (n.dot(b.pos - p) < 0.0) n = n * -1.0;
                            depth = kPairMargin + pen.depth;
                        } else if (d.distance > 1e-12 && d.distance < kPairMargin) {
                            n = (d.witness_a - p) / d.distance;
                            depth = kPairMargin - d.distance;
                        } else {
                            continue;
                        }
                        Contact c;
                        c.a = static_cast<int>(bi);
                        c.point = p;
                        c.normal = n;
                        c.depth = depth;
                        contacts.push_back(c);
                    }
                }
            }
        }
        for (size_t i = 0; i + 1 < bodies.size(); ++i) {
            for (size_t j = i + 1; j < bodies.size(); ++j) {
                // Speculative reach for the pair: bound this step's closing
                // motion by the linear speeds plus the surface speed from
                // rotation, so fast drops cannot tunnel through each other.
                const Body& A = bodies[i];
                const Body& B = bodies[j];
                const double radius_a = A.world_aabb.extent().norm() * 0.5 +
                                        (A.world_aabb.center() - A.pos).norm();
                const double radius_b = B.world_aabb.extent().norm() * 0.5 +
                                        (B.world_aabb.center() - B.pos).norm();
                const double reach =
                    kPairMargin + dt * (A.vel.norm() + B.vel.norm() +
                                        A.ang.norm() * radius_a + B.ang.norm() * radius_b);
                if (!A.world_aabb.overlaps(B.world_aabb, reach)) continue;
                DistanceResult d = gjk_distance(A.world_hull, B.world_hull);

                Vec3 n;                   // unit, pushes i out of j
                Vec3 anchor_a, anchor_b;  // surface points on i and j
                double central_depth;
                if (d.intersecting) {
                    PenetrationResult pen = epa_penetration(bodies[i].world_hull, bodies[j].world_hull);
                    if (pen.ok) {
                        n = pen.normal;
                        anchor_a = pen.contact_point + n * (0.5 * pen.depth);
                        anchor_b = pen.contact_point - n * (0.5 * pen.depth);
                        central_depth = kPairMargin + pen.depth;
                    } else {
                        Vec3 axis = bodies[i].pos - bodies[j].pos;
                        n = axis.norm2() > 1e-18 ? axis.normalized() : Vec3{0, 0, 1};
                        anchor_a = anchor_b = (bodies[i].pos + bodies[j].pos) * 0.5;
                        central_depth = kPairMargin + 1e-4;
                    }
                } else if (d.distance < reach) {
                    n = (d.witness_a - d.witness_b).normalized();
                    if (n.norm2() < 0.5) continue;
                    anchor_a = d.witness_a;
                    anchor_b = d.witness_b;
                    central_depth = kPairMargin - d.distance;  // negative while separated
                } else {
                    continue;
                }

                // Deep, near-centered overlaps make the minimum-translation
                // direction ambiguous: EPA can alternate between opposite
                // faces on consecutive steps, and a flipped normal crushes
                // the pair together. The COM axis disambiguates; for
                // separated pairs it provably agrees with the witness normal
                // already, so this only rewrites the pathological cases.
                if (n.dot(bodies[i].pos - bodies[j].pos) < 0.0) {
                    n = n * -1.0;
                    std::swap(anchor_a, anchor_b);
                }

                // Single-point contacts cannot support stacked items, so
                // assemble a manifold: every hull vertex close to the other
                // body's support plane and laterally inside the other hull
                // becomes a contact point.
                auto add_point = [&](const Vec3& point, double depth) {
                    Contact c;
                    c.a = static_cast<int>(i);
                    c.b = static_cast<int>(j);
                    c.normal = n;
                    c.point = point;
                    c.depth = depth;
                    contacts.push_back(c);
                };
                // The central point always stays: edge-face crossings (a box
                // lying across a cylinder mid-span) have no hull vertex
                // inside the other body, so the vertex sweep below would
                // report a shallow manifold for what is a deep overlap. Only
                // this point carries the true penetration depth there.
                add_point((anchor_a + anchor_b) * 0.5, central_depth);
                for (const Vec3& v : bodies[i].world_hull) {
                    const double gap = n.dot(v - anchor_b);
                    if (gap >= kPairMargin) continue;
                    if (point_hull_distance(v, bodies[j].world_hull) >= kPairMargin) continue;
                    add_point(v, kPairMargin - gap);
                }
                for (const Vec3& u : bodies[j].world_hull) {
                    const double gap = n.dot(anchor_a - u);
                    if (gap >= kPairMargin) continue;
                    if (point_hull_distance(u, bodies[i].world_hull) >= kPairMargin) continue;
                    add_point(u, kPairMargin - gap);
                }
            }
        }

        if (!contacts.empty() && !report.had_contact) {
            report.had_contact = true;
            report.kinetic_energy_first_contact = kinetic_energy(bodies);
        }

        // precompute effective masses and bias velocities
        for (auto& c : contacts) {
            Body& A = bodies[c.a];
            Body* B = c.b >= 0 ? &bodies[c.b] : nullptr;
            c.ra = c.point - A.pos;
            c.rb = B ? c.point - B->pos : Vec3{};
            c.local_a = A.orn.to_matrix().transposed() * c.ra;
            tangent_basis(c.normal, c.t1, c.t2);

            auto eff_mass = [&](const Vec3& dir) {
                double m = A.inv_mass;
                Vec3 ra_x = c.ra.cross(dir);
                m += dir.dot((A.inv_inertia_world * ra_x).cross(c.ra));
                if (B) {
                    Vec3 rb_x = c.rb.cross(dir);
                    m += B->inv_mass + dir.dot((B->inv_inertia_world * rb_x).cross(c.rb));
                }
                return m > 0.0 ? 1.0 / m : 0.0;
            };
            c.mass_n = eff_mass(c.normal);
            c.mass_t1 = eff_mass(c.t1);
            c.mass_t2 = eff_mass(c.t2);

            Vec3 rel = A.vel + A.ang.cross(c.ra);
            if (B) rel -= B->vel + B->ang.cross(c.rb);
            const double vn = rel.dot(c.normal);
            // True penetration (beyond the margin) is recovered positionally.
            // The velocity row never pushes, it only stops approach: its
            // lower bound lets a separated body close all but kSlop of its
            // gap in one step, which lands fast drops on the surface instead
            // of letting them tunnel through the detection band.
            c.bias = std::min(kBaumgarte / dt * std::max(c.depth - kPairMargin, 0.0), kMaxBias);
            const double gap = kPairMargin - c.depth;  // distance to the surface
            c.rest_bias = -std::max(gap - kSlop, 0.0) / dt;
            if (vn < -kRestitutionThreshold)
                c.rest_bias = std::max(c.rest_bias, -params.restitution * vn);
        }

        // warm start from last step's matching contact points; accumulated
        // clamping lets the iterations unwind anything overapplied
        for (auto& c : contacts) {
            const auto it = warm.find(pair_key(c.a, c.b));
            if (it == warm.end()) continue;
            const CachedContact* best = nullptr;
            double best_d2 = 1e-6;  // 1 mm matching radius
            for (const auto& cc : it->second) {
                const double d2 = (cc.local_a - c.local_a).norm2();
                if (d2 < best_d2) {
                    best_d2 = d2;
                    best = &cc;
                }
            }
            if (!best) continue;
            c.p_n = best->p_n;
            c.p_t1 = best->friction.dot(c.t1);
            c.p_t2 = best->friction.dot(c.t2);
            const Vec3 P = c.normal * c.p_n + c.t1 * c.p_t1 + c.t2 * c.p_t2;
            Body& A = bodies[c.a];
            A.vel += P * A.inv_mass;
            A.ang += A.inv_inertia_world * c.ra.cross(P);
            if (c.b >= 0) {
                Body& B = bodies[c.b];
                B.vel -= P * B.inv_mass;
                B.ang -= B.inv_inertia_world * c.rb.cross(P);
            }
        }

        // sequential impulses with accumulated clamping
        for (int it = 0; it < params.solver_iterations; ++it) {
            for (auto& c : contacts) {
                Body& A = bodies[c.a];
                Body* B = c.b >= 0 ? &bodies[c.b] : nullptr;

                Vec3 rel = A.vel + A.ang.cross(c.ra);
                if (B) rel -= B->vel + B->ang.cross(c.rb);

                // normal
                const double vn = rel.dot(c.normal);
                double dp = c.mass_n * (c.rest_bias - vn);
                const double p0 = c.p_n;
                c.p_n = std::max(p0 + dp, 0.0);
                dp = c.p_n - p0;
                Vec3 impulse = c.normal * dp;
                A.vel += impulse * A.inv_mass;
                A.ang += A.inv_inertia_world * c.ra.cross(impulse);
                if (B) {
                    B->vel -= impulse * B->inv_mass;
                    B->ang -= B->inv_inertia_world * c.rb.cross(impulse);
                }

                // friction, against both tangents, Coulomb-clamped
                const double max_f = params.friction_coeff * c.p_n;
                rel = A.vel + A.ang.cross(c.ra);
                if (B) rel -= B->vel + B->ang.cross(c.rb);
                for (int t = 0; t < 2; ++t) {
                    const Vec3& tan = t == 0 ? c.t1 : c.t2;
                    double& acc = t == 0 ? c.p_t1 : c.p_t2;
                    double& m = t == 0 ? c.mass_t1 : c.mass_t2;
                    double vt = rel.dot(tan);
                    double dpt = m * -vt;
                    double acc0 = acc;
                    acc = std::clamp(acc0 + dpt, -max_f, max_f);
                    dpt = acc - acc0;
                    Vec3 fi = tan * dpt;
                    A.vel += fi * A.inv_mass;
                    A.ang += A.inv_inertia_world * c.ra.cross(fi);
                    if (B) {
                        B->vel -= fi * B->inv_mass;
                        B->ang -= B->inv_inertia_world * c.rb.cross(fi);
                    }
                    rel = A.vel + A.ang.cross(c.ra);
                    if (B) rel -= B->vel + B->ang.cross(c.rb);
                }
            }
        }

        // Split-impulse depenetration: the positional bias is solved on
        // pseudo-velocities that move bodies this step and are then thrown
        // away, so overlap recovery never pumps energy into the real state.
        for (int it = 0; it < params.solver_iterations; ++it) {
            for (auto& c : contacts) {
                Body& A = bodies[c.a];
                Body* B = c.b >= 0 ? &bodies[c.b] : nullptr;
                Vec3 rel = A.pseudo_vel + A.pseudo_ang.cross(c.ra);
                if (B) rel -= B->pseudo_vel + B->pseudo_ang.cross(c.rb);
                double dp = c.mass_n * (c.bias - rel.dot(c.normal));
                const double p0 = c.p_b;
                c.p_b = std::max(p0 + dp, 0.0);
                dp = c.p_b - p0;
                const Vec3 impulse = c.normal * dp;
                A.pseudo_vel += impulse * A.inv_mass;
                A.pseudo_ang += A.inv_inertia_world * c.ra.cross(impulse);
                if (B) {
                    B->pseudo_vel -= impulse * B->inv_mass;
                    B->pseudo_ang -= B->inv_inertia_world * c.rb.cross(impulse);
                }
            }
        }

        // Rolling resistance: tangential friction alone cannot stop a body
        // that rolls without slipping, so bleed relative angular velocity
        // with a torque impulse budgeted by the normal impulse and lever arm.
        if (params.rolling_resistance > 0.0) {
            for (const auto& c : contacts) {
                if (c.p_n <= 0.0) continue;
                Body& A = bodies[c.a];
                Body* B = c.b >= 0 ? &bodies[c.b] : nullptr;
                Vec3 w_rel = A.ang;
                if (B) w_rel -= B->ang;
                const double w = w_rel.norm();
                if (w < 1e-12) continue;
                const Vec3 u = w_rel / w;
                double k = u.dot(A.inv_inertia_world * u);
                if (B) k += u.dot(B->inv_inertia_world * u);
                if (k <= 0.0) continue;
                const double to_stop = w / k;
                const double budget = params.rolling_resistance * c.p_n * c.ra.norm();
                const double mag = std::min(to_stop, budget);
                A.ang -= (A.inv_inertia_world * u) * mag;
                if (B) B->ang += (B->inv_inertia_world * u) * mag;
            }
        }

        // Bodies hovering at the contact margin never reach exact rest on
        // their own (bias keeps feeding micro-velocities), so snap supported
        // bodies below half the settle threshold to a full stop. Real shoves
        // exceed the snap band and move the body normally.
        std::vector<char> touched(bodies.size(), 0);
        for (const auto& c : contacts) {
            touched[static_cast<size_t>(c.a)] = 1;
            if (c.b >= 0) touched[static_cast<size_t>(c.b)] = 1;
        }
        for (size_t bi = 0; bi < bodies.size(); ++bi) {
            Body& b = bodies[bi];
            if (touched[bi] && b.vel.norm() < kSnapSpeed && b.ang.norm() < kSnapSpeed) {
                b.vel = {0, 0, 0};
                b.ang = {0, 0, 0};
            }
        }

        // save accumulated impulses for next step's warm start
        warm.clear();
        for (const auto& c : contacts) {
            if (c.p_n == 0.0 && c.p_t1 == 0.0 && c.p_t2 == 0.0) continue;
            warm[pair_key(c.a, c.b)].push_back(
                {c.local_a, c.p_n, c.t1 * c.p_t1 + c.t2 * c.p_t2});
        }

        // integrate positions
        bool all_quiet = true;
        for (auto& b : bodies) {
            b.pos += (b.vel + b.pseudo_vel) * dt;
            const Vec3 w = b.ang + b.pseudo_ang;
            Quat wq{0, w.x, w.y, w.z};
            Quat dq = wq * b.orn;
            b.orn = Quat{b.orn.w + 0.5 * dt * dq.w, b.orn.x + 0.5 * dt * dq.x,
                         b.orn.y + 0.5 * dt * dq.y, b.orn.z + 0.5 * dt * dq.z}
                        .normalized();

            if (!b.pos.finite() || !b.vel.finite() || !b.ang.finite() || !b.orn.finite())
                throw Error(Error::Kind::Simulation,
                            "simulation diverged (non-finite state for '" + b.asset_id +
                                "' at step " + std::to_string(step) + ")");

            // positional correction counts as motion: a body being extracted
            // from an overlap must not be declared settled mid-extraction
            if (b.vel.norm() < params.settle_speed_eps &&
                b.ang.norm() < params.settle_speed_eps &&
                b.pseudo_vel.norm() < params.settle_speed_eps &&
                b.pseudo_ang.norm() < params.settle_speed_eps)
                b.quiet_time += dt;
            else
                b.quiet_time = 0.0;
            if (b.quiet_time < params.settle_hold_s) all_quiet = false;
        }

        if (all_quiet) {
            ++step;
            break;
        }
    }

    report.steps_simulated = step;
    report.kinetic_energy_final = kinetic_energy(bodies);

    std::vector<size_t> settled_idx;
    for (size_t bi = 0; bi < bodies.size(); ++bi) {
        Body& b = bodies[bi];
        if (b.quiet_time < params.settle_hold_s) {
            report.rejected.push_back({b.asset_id, RejectReason::Unsettled});
            continue;
        }
        // on-plate test: the hull centroid's projection, not the COM
        update_caches(b);
        Vec3 centroid{};
        for (const Vec3& v : b.world_hull) centroid += v;
        centroid = centroid / static_cast<double>(b.world_hull.size());
        const double dx = centroid.x - plate.center.x;
        const double dy = centroid.y - plate.center.y;
        if (dx * dx + dy * dy <= plate_r2)
            settled_idx.push_back(bi);
        else
            report.rejected.push_back({b.asset_id, RejectReason::OffPlate});
    }

    // Support closure: an item can come to rest on a neighbour that is
    // itself rejected (straddling the rim with its centroid past the edge,
    // say). Removing the neighbour would leave it floating, so rejection
    // cascades until every kept item rests on the plate or on another kept
    // item.
    constexpr double kContactEps = 1e-3;
    auto plate_surface_dist = [&](const Vec3& p) {
        const double r = std::hypot(p.x - plate.center.x, p.y - plate.center.y);
        const double z = p.z;
        auto face = [](double du, double dv) { return std::hypot(du, dv); };
        const double d_disc = face(std::max(r - plate.radius_m, 0.0), z - plate_top);
        const double d_lip = face(std::max({plate.radius_m - r, r - rim_r_out, 0.0}), z - z_rim);
        const double d_inner =
            face(r - plate.radius_m, std::max({plate_top - z, z - z_rim, 0.0}));
        const double d_outer =
            face(r - rim_r_out, std::max({table_z - z, z - z_rim, 0.0}));
        return std::min({d_disc, d_lip, d_inner, d_outer});
    };
    std::vector<char> kept(settled_idx.size(), 1);
    for (bool changed = true; changed;) {
        changed = false;
        for (size_t k = 0; k < settled_idx.size(); ++k) {
            if (!kept[k]) continue;
            const Body& b = bodies[settled_idx[k]];
            Vec3 low = b.world_hull.front();
            for (const Vec3& v : b.world_hull)
                if (v.z < low.z) low = v;
            if (plate_surface_dist(low) <= kContactEps) continue;
            bool held = false;
            for (size_t o = 0; o < settled_idx.size() && !held; ++o)
                if (o != k && kept[o] &&
                    point_hull_distance(low, bodies[settled_idx[o]].world_hull) <= kContactEps)
                    held = true;
            if (!held) {
                kept[k] = 0;
                changed = true;
                report.rejected.push_back({b.asset_id, RejectReason::Unsettled});
            }
        }
    }
    for (size_t k = 0; k < settled_idx.size(); ++k) {
        if (!kept[k]) continue;
        const Body& b = bodies[settled_idx[k]];
        const Mat3 R = b.orn.to_matrix();
        RigidState st;
        st.position = b.pos - R * b.com_object;  // back to the object frame
        st.orientation = b.orn;
        st.linear_velocity = b.vel;
        st.angular_velocity = b.ang;
        report.settled.push_back({b.asset_id, st});
    }
    return report;
}

Scene compose_dynamic_scene(const AssetLibrary& library, const PlateSpec& plate,
                            const SimParams& params, int max_items, uint64_t seed,
                            int retry_budget) {
    if (library.empty())
        throw Error(Error::Kind::Config, "compose_dynamic_scene: asset library is empty");

    for (int attempt = 0; attempt <= retry_budget; ++attempt) {
        const uint64_t attempt_seed = attempt == 0 ? seed : derive_seed(seed, 0xA77E, static_cast<uint64_t>(attempt));
        Rng rng_items(derive_seed(attempt_seed, 1));
        Rng rng_plan(derive_seed(attempt_seed, 2));

        std::vector<std::string> items = sample_items(library, max_items, rng_items);
        DropPlan plan = plan_drops(items, plate, params, rng_plan);
        SettleReport report = simulate(plan, plate, library, params);
        if (report.settled.empty()) continue;

        Scene scene;
        scene.seed = attempt_seed;
        scene.plate = plate;
        scene.plating_mode = "dynamic";
        for (const auto& s : report.settled)
            scene.items.push_back({s.asset_id, Pose{s.state.position, s.state.orientation}});
        return scene;
    }
    throw Error(Error::Kind::Generation,
                "dynamic plating produced zero settled items after " +
                    std::to_string(retry_budget + 1) + " attempts (seed " +
                    std::to_string(seed) + ")");
}

} // namespace mealgen
