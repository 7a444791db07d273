#include "mealgen/rules.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "mealgen/error.hpp"
#include "yaml_util.hpp"

namespace mealgen {

using namespace yamlutil;

const char* to_string(RuleKind k) {
    switch (k) {
        case RuleKind::Explicit: return "explicit";
        case RuleKind::Ring: return "ring";
        case RuleKind::Grid: return "grid";
        case RuleKind::Stack: return "stack";
    }
    return "?";
}

namespace {

Pose parse_pose(const YAML::Node& n, const std::string& ctx) {
    require_map(n, ctx);
    reject_unknown_keys(n, ctx, {"position", "orientation"});
    if (!n["position"]) missing(ctx, "position");
    Pose p;
    p.position = as_vec3(n["position"], ctx, "position");
    if (n["orientation"]) {
        auto q = as_number_list(n["orientation"], 4, ctx, "orientation");
        p.orientation = Quat{q[0], q[1], q[2], q[3]};
        const double norm = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
        if (std::abs(norm - 1.0) > 1e-6)
            throw validation_error(ctx + ": 'orientation' must be a unit quaternion (|q| = " +
                                       std::to_string(norm) + ")",
                                   "orientation");
    }
    return p;
}

PlatingRule parse_rule(const YAML::Node& n, size_t index) {
    const std::string ctx = "rules[" + std::to_string(index) + "]";
    require_map(n, ctx);
    if (!n["kind"]) missing(ctx, "kind");
    const std::string kind = as_scalar<std::string>(n["kind"], ctx, "kind");

    PlatingRule r;
    if (kind == "explicit") r.kind = RuleKind::Explicit;
    else if (kind == "ring") r.kind = RuleKind::Ring;
    else if (kind == "grid") r.kind = RuleKind::Grid;
    else if (kind == "stack") r.kind = RuleKind::Stack;
    else {
        Error e(Error::Kind::Validation, ctx + ": unknown rule kind '" + kind + "'");
        e.field = "kind";
        throw e;
    }

    if (!n["item"]) missing(ctx, "item");
    r.item = as_scalar<std::string>(n["item"], ctx, "item");
    if (r.item.empty()) throw validation_error(ctx + ": 'item' must be non-empty", "item");

    if (n["jitter"]) {
        const YAML::Node j = n["jitter"];
        require_map(j, ctx + ".jitter");
        reject_unknown_keys(j, ctx + ".jitter", {"pos_m", "yaw_rad"});
        Jitter jt;
        if (j["pos_m"])
            jt.pos_m = non_negative(as_scalar<double>(j["pos_m"], ctx, "pos_m"), ctx, "pos_m");
        if (j["yaw_rad"])
            jt.yaw_rad =
                non_negative(as_scalar<double>(j["yaw_rad"], ctx, "yaw_rad"), ctx, "yaw_rad");
        r.jitter = jt;
    }

    switch (r.kind) {
        case RuleKind::Ring: {
            reject_unknown_keys(
                n, ctx, {"kind", "item", "count", "center", "radius_m", "start_angle_rad", "jitter"});
            if (!n["count"]) missing(ctx, "count");
            r.count = as_scalar<int>(n["count"], ctx, "count");
            if (!n["radius_m"]) missing(ctx, "radius_m");
            r.radius_m = positive(as_scalar<double>(n["radius_m"], ctx, "radius_m"), ctx, "radius_m");
            if (n["center"]) r.center = as_vec2(n["center"], ctx, "center");
            if (n["start_angle_rad"])
                r.start_angle_rad = as_scalar<double>(n["start_angle_rad"], ctx, "start_angle_rad");
            break;
        }
        case RuleKind::Grid: {
            reject_unknown_keys(n, ctx, {"kind", "item", "rows", "cols", "pitch_m", "origin", "jitter"});
            if (!n["rows"]) missing(ctx, "rows");
            if (!n["cols"]) missing(ctx, "cols");
            if (!n["pitch_m"]) missing(ctx, "pitch_m");
            r.rows = as_scalar<int>(n["rows"], ctx, "rows");
            r.cols = as_scalar<int>(n["cols"], ctx, "cols");
            if (r.rows < 1 || r.cols < 1) {
                Error e(Error::Kind::Range, ctx + ": 'rows'/'cols' must be >= 1");
                e.field = r.rows < 1 ? "rows" : "cols";
                throw e;
            }
            r.pitch_m = positive(as_scalar<double>(n["pitch_m"], ctx, "pitch_m"), ctx, "pitch_m");
            if (n["origin"]) r.origin = as_vec2(n["origin"], ctx, "origin");
            r.count = r.rows * r.cols;
            break;
        }
        case RuleKind::Stack: {
            reject_unknown_keys(n, ctx, {"kind", "item", "count", "base", "vertical_gap_m", "jitter"});
            if (!n["count"]) missing(ctx, "count");
            r.count = as_scalar<int>(n["count"], ctx, "count");
            if (n["base"]) r.base = as_vec2(n["base"], ctx, "base");
            if (n["vertical_gap_m"])
                r.vertical_gap_m = non_negative(
                    as_scalar<double>(n["vertical_gap_m"], ctx, "vertical_gap_m"), ctx, "vertical_gap_m");
            break;
        }
        case RuleKind::Explicit: {
            reject_unknown_keys(n, ctx, {"kind", "item", "poses", "jitter"});
            if (!n["poses"]) missing(ctx, "poses");
            const YAML::Node poses = n["poses"];
            if (!poses.IsSequence() || poses.size() == 0)
                throw validation_error(ctx + ": 'poses' must be a non-empty sequence", "poses");
            for (size_t i = 0; i < poses.size(); ++i)
                r.poses.push_back(parse_pose(poses[i], ctx + ".poses[" + std::to_string(i) + "]"));
            r.count = static_cast<int>(r.poses.size());
            break;
        }
    }
    if (r.count < 1) {
        Error e(Error::Kind::Range, ctx + ": 'count' must be >= 1, got " + std::to_string(r.count));
        e.field = "count";
        throw e;
    }
    return r;
}

PlatingRuleSet parse_rules_node(const YAML::Node& root) {
    if (!root.IsDefined() || root.IsNull())
        throw validation_error("rule document is empty");
    require_map(root, "document");
    reject_unknown_keys(root, "document", {"plate", "seed", "rules"});

    PlatingRuleSet rs;
    if (root["plate"]) rs.plate = parse_plate(root["plate"]);
    if (root["seed"]) rs.seed = as_scalar<uint64_t>(root["seed"], "document", "seed");

    if (!root["rules"]) missing("document", "rules");
    const YAML::Node rules = root["rules"];
    if (!rules.IsSequence())
        throw validation_error("document: 'rules' must be a sequence", "rules");
    for (size_t i = 0; i < rules.size(); ++i) rs.rules.push_back(parse_rule(rules[i], i));

    size_t total = 0;
    for (const auto& r : rs.rules) total += static_cast<size_t>(r.count);
    if (total < 1)
        throw validation_error("document: rules place zero items in total", "rules");
    return rs;
}

} // namespace

PlatingRuleSet parse_rules(const std::string& yaml_text) {
    // Cheap guard against pathological inputs before handing to the parser.
    if (yaml_text.size() > (8u << 20))
        throw parse_error("rule document exceeds 8 MiB", 1, 1);
    try {
        YAML::Node root = YAML::Load(yaml_text);
        return parse_rules_node(root);
    } catch (const Error&) {
        throw;
    } catch (const YAML::ParserException& e) {
        throw parse_error(std::string("YAML syntax error: ") + e.msg, e.mark.line + 1,
                          e.mark.column + 1);
    } catch (const YAML::Exception& e) {
        throw parse_error(std::string("YAML error: ") + e.msg,
                          e.mark.line >= 0 ? e.mark.line + 1 : 0,
                          e.mark.column >= 0 ? e.mark.column + 1 : 0);
    } catch (const std::exception& e) {
        throw Error(Error::Kind::Parse, std::string("rule document rejected: ") + e.what());
    }
}

PlatingRuleSet load_rules(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        Error e(Error::Kind::Io, "cannot open rule file: " + path);
        e.path = path;
        throw e;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_rules(ss.str());
    } catch (Error& e) {
        e.path = path;
        throw;
    }
}

namespace {

void emit_vec2(YAML::Emitter& out, const Vec2& v) {
    out << YAML::Flow << YAML::BeginSeq << v.x << v.y << YAML::EndSeq;
}

void emit_vec3(YAML::Emitter& out, const Vec3& v) {
    out << YAML::Flow << YAML::BeginSeq << v.x << v.y << v.z << YAML::EndSeq;
}

} // namespace

std::string serialize_rules(const PlatingRuleSet& rules) {
    YAML::Emitter out;
    out.SetDoublePrecision(17);  // exact double round-trips
    out << YAML::BeginMap;

    out << YAML::Key << "plate" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "center" << YAML::Value;
    emit_vec3(out, rules.plate.center);
    out << YAML::Key << "radius_m" << YAML::Value << rules.plate.radius_m;
    out << YAML::Key << "rim_height_m" << YAML::Value << rules.plate.rim_height_m;
    out << YAML::Key << "top_z_m" << YAML::Value << rules.plate.top_z_m;
    out << YAML::Key << "segment_count" << YAML::Value << rules.plate.segment_count;
    out << YAML::EndMap;

    if (rules.seed) out << YAML::Key << "seed" << YAML::Value << *rules.seed;

    out << YAML::Key << "rules" << YAML::Value << YAML::BeginSeq;
    for (const auto& r : rules.rules) {
        out << YAML::BeginMap;
        out << YAML::Key << "kind" << YAML::Value << to_string(r.kind);
        out << YAML::Key << "item" << YAML::Value << r.item;
        switch (r.kind) {
            case RuleKind::Ring:
                out << YAML::Key << "count" << YAML::Value << r.count;
                out << YAML::Key << "center" << YAML::Value;
                emit_vec2(out, r.center);
                out << YAML::Key << "radius_m" << YAML::Value << r.radius_m;
                out << YAML::Key << "start_angle_rad" << YAML::Value << r.start_angle_rad;
                break;
            case RuleKind::Grid:
                out << YAML::Key << "rows" << YAML::Value << r.rows;
                out << YAML::Key << "cols" << YAML::Value << r.cols;
                out << YAML::Key << "pitch_m" << YAML::Value << r.pitch_m;
                out << YAML::Key << "origin" << YAML::Value;
                emit_vec2(out, r.origin);
                break;
            case RuleKind::Stack:
                out << YAML::Key << "count" << YAML::Value << r.count;
                out << YAML::Key << "base" << YAML::Value;
                emit_vec2(out, r.base);
                out << YAML::Key << "vertical_gap_m" << YAML::Value << r.vertical_gap_m;
                break;
            case RuleKind::Explicit:
                out << YAML::Key << "poses" << YAML::Value << YAML::BeginSeq;
                for (const auto& p : r.poses) {
                    out << YAML::BeginMap;
                    out << YAML::Key << "position" << YAML::Value;
                    emit_vec3(out, p.position);
                    out << YAML::Key << "orientation" << YAML::Value << YAML::Flow
                        << YAML::BeginSeq << p.orientation.w << p.orientation.x
                        << p.orientation.y << p.orientation.z << YAML::EndSeq;
                    out << YAML::EndMap;
                }
                out << YAML::EndSeq;
                break;
        }
        if (r.jitter) {
            out << YAML::Key << "jitter" << YAML::Value << YAML::Flow << YAML::BeginMap;
            out << YAML::Key << "pos_m" << YAML::Value << r.jitter->pos_m;
            out << YAML::Key << "yaw_rad" << YAML::Value << r.jitter->yaw_rad;
            out << YAML::EndMap;
        }
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::EndMap;

    if (!out.good())
        throw Error(Error::Kind::Io, std::string("YAML emit failed: ") + out.GetLastError());
    return std::string(out.c_str()) + "\n";
}

namespace {

// Direct asset id, or every asset of a semantic class (sorted by id).
std::vector<std::string> resolve_selector(const AssetLibrary& library, const std::string& item,
                                          const std::string& ctx) {
    if (library.contains(item)) return {item};
    auto it = library.class_index().find(item);
    if (it != library.class_index().end() && !it->second.empty()) return it->second;
    Error e(Error::Kind::Lookup,
            ctx + ": selector '" + item + "' matches no asset id or semantic class");
    e.field = "item";
    throw e;
}

} // namespace

Scene instantiate(const PlatingRuleSet& rules, const AssetLibrary& library, Rng& rng) {
    Scene scene;
    scene.plate = rules.plate;
    scene.plating_mode = "procedural";
    scene.seed = rules.seed.value_or(0);

    const Vec3 pc = rules.plate.center;
    const double plate_top = pc.z + rules.plate.top_z_m;

    for (size_t ri = 0; ri < rules.rules.size(); ++ri) {
        const PlatingRule& r = rules.rules[ri];
        const std::string ctx = "rules[" + std::to_string(ri) + "]";
        const std::vector<std::string> pool = resolve_selector(library, r.item, ctx);

        double stack_z = plate_top;  // running top of the stack

        for (int k = 0; k < r.count; ++k) {
            const std::string& asset_id =
                pool.size() == 1 ? pool[0] : pool[rng.uniform_index(pool.size())];
            const FoodAsset& asset = library.at(asset_id);

            double dx = 0, dy = 0, dyaw = 0;
            if (r.jitter) {
                dx = rng.uniform(-r.jitter->pos_m, r.jitter->pos_m);
                dy = rng.uniform(-r.jitter->pos_m, r.jitter->pos_m);
                dyaw = rng.uniform(-r.jitter->yaw_rad, r.jitter->yaw_rad);
            }
            const Quat yaw = Quat::from_axis_angle({0, 0, 1}, dyaw);

            Pose pose;
            bool on_plate = true;
            switch (r.kind) {
                case RuleKind::Ring: {
                    const double a = r.start_angle_rad + 2.0 * kPi * k / r.count;
                    pose.position = {pc.x + r.center.x + r.radius_m * std::cos(a) + dx,
                                     pc.y + r.center.y + r.radius_m * std::sin(a) + dy, 0.0};
                    pose.orientation = yaw;
                    pose.position.z = plate_top - asset.aabb_object.lo.z;
                    break;
                }
                case RuleKind::Grid: {
                    const int row = k / r.cols, col = k % r.cols;
                    pose.position = {pc.x + r.origin.x + col * r.pitch_m + dx,
                                     pc.y + r.origin.y + row * r.pitch_m + dy, 0.0};
                    pose.orientation = yaw;
                    pose.position.z = plate_top - asset.aabb_object.lo.z;
                    break;
                }
                case RuleKind::Stack: {
                    pose.position = {pc.x + r.base.x + dx, pc.y + r.base.y + dy, 0.0};
                    pose.orientation = yaw;
                    pose.position.z = stack_z - asset.aabb_object.lo.z;
                    stack_z += asset.aabb_object.extent().z + r.vertical_gap_m;
                    break;
                }
                case RuleKind::Explicit: {
                    pose = r.poses[static_cast<size_t>(k)];
                    pose.position.x += dx;
                    pose.position.y += dy;
                    pose.orientation = (yaw * pose.orientation).normalized();
                    on_plate = false;  // absolute world pose, user-controlled
                    break;
                }
            }

            if (on_plate) {
                const double ox = pose.position.x - pc.x;
                const double oy = pose.position.y - pc.y;
                const double dist = std::sqrt(ox * ox + oy * oy);
                if (dist > rules.plate.radius_m + 1e-12) {
                    Error e(Error::Kind::Placement,
                            ctx + ": placement " + std::to_string(k) + " lands " +
                                std::to_string(dist) + " m from the plate center (radius " +
                                std::to_string(rules.plate.radius_m) + " m)");
                    throw e;
                }
            }
            scene.items.push_back({asset_id, pose});
        }
    }
    return scene;
}

} // namespace mealgen
