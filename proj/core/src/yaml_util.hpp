#pragma once

// Shared YAML validation helpers for the rule and pipeline-config parsers.
// Internal to core; not installed.

#include <cmath>
#include <initializer_list>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "mealgen/error.hpp"
#include "mealgen/math.hpp"
#include "mealgen/scene.hpp"

namespace mealgen::yamlutil {

[[noreturn]] inline void missing(const std::string& ctx, const std::string& field) {
    Error e(Error::Kind::Validation, ctx + ": missing required field '" + field + "'");
    e.field = field;
    throw e;
}

inline void reject_unknown_keys(const YAML::Node& map, const std::string& ctx,
                                std::initializer_list<const char*> known) {
    for (const auto& kv : map) {
        const std::string key = kv.first.Scalar();
        bool ok = false;
        for (const char* k : known)
            if (key == k) { ok = true; break; }
        if (!ok) {
            Error e(Error::Kind::Validation, ctx + ": unknown key '" + key + "'");
            e.field = key;
            if (kv.first.Mark().line >= 0) {
                e.line = kv.first.Mark().line + 1;
                e.column = kv.first.Mark().column + 1;
            }
            throw e;
        }
    }
}

inline void require_map(const YAML::Node& n, const std::string& ctx) {
    if (!n.IsMap()) throw validation_error(ctx + ": expected a mapping");
}

template <typename T>
T as_scalar(const YAML::Node& n, const std::string& ctx, const std::string& field) {
    if (!n.IsScalar())
        throw validation_error(ctx + ": '" + field + "' must be a scalar", field);
    try {
        return n.as<T>();
    } catch (const std::exception&) {
        throw validation_error(
            ctx + ": '" + field + "' has the wrong type ('" + n.Scalar() + "')", field);
    }
}

inline double positive(double v, const std::string& ctx, const std::string& field) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        Error e(Error::Kind::Range,
                ctx + ": '" + field + "' must be > 0, got " + std::to_string(v));
        e.field = field;
        throw e;
    }
    return v;
}

inline double non_negative(double v, const std::string& ctx, const std::string& field) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
        Error e(Error::Kind::Range,
                ctx + ": '" + field + "' must be >= 0, got " + std::to_string(v));
        e.field = field;
        throw e;
    }
    return v;
}

inline std::vector<double> as_number_list(const YAML::Node& n, size_t want,
                                          const std::string& ctx, const std::string& field) {
    if (!n.IsSequence() || n.size() != want)
        throw validation_error(ctx + ": '" + field + "' must be a sequence of " +
                                   std::to_string(want) + " numbers",
                               field);
    std::vector<double> out;
    for (const auto& e : n) out.push_back(as_scalar<double>(e, ctx, field));
    for (double v : out)
        if (!std::isfinite(v))
            throw validation_error(ctx + ": '" + field + "' must be finite", field);
    return out;
}

inline Vec2 as_vec2(const YAML::Node& n, const std::string& ctx, const std::string& field) {
    auto v = as_number_list(n, 2, ctx, field);
    return {v[0], v[1]};
}

inline Vec3 as_vec3(const YAML::Node& n, const std::string& ctx, const std::string& field) {
    auto v = as_number_list(n, 3, ctx, field);
    return {v[0], v[1], v[2]};
}

inline PlateSpec parse_plate(const YAML::Node& n) {
    const std::string ctx = "plate";
    require_map(n, ctx);
    reject_unknown_keys(n, ctx,
                        {"center", "radius_m", "rim_height_m", "top_z_m", "segment_count"});
    PlateSpec p;
    if (n["center"]) p.center = as_vec3(n["center"], ctx, "center");
    if (n["radius_m"])
        p.radius_m = positive(as_scalar<double>(n["radius_m"], ctx, "radius_m"), ctx, "radius_m");
    if (n["rim_height_m"])
        p.rim_height_m = non_negative(as_scalar<double>(n["rim_height_m"], ctx, "rim_height_m"),
                                      ctx, "rim_height_m");
    if (n["top_z_m"])
        p.top_z_m = positive(as_scalar<double>(n["top_z_m"], ctx, "top_z_m"), ctx, "top_z_m");
    if (n["segment_count"]) {
        p.segment_count = as_scalar<int>(n["segment_count"], ctx, "segment_count");
        if (p.segment_count < 1) {
            Error e(Error::Kind::Range, "plate: 'segment_count' must be >= 1");
            e.field = "segment_count";
            throw e;
        }
    }
    return p;
}

} // namespace mealgen::yamlutil
