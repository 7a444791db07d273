#include "mealgen/config.hpp"

#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "mealgen/error.hpp"
#include "yaml_util.hpp"

namespace mealgen {

using namespace yamlutil;
using Json = nlohmann::json;

namespace {

AssetsConfig parse_assets(const YAML::Node& n) {
    const std::string ctx = "assets";
    require_map(n, ctx);
    reject_unknown_keys(n, ctx, {"source", "dir"});
    AssetsConfig a;
    if (n["source"]) a.source = as_scalar<std::string>(n["source"], ctx, "source");
    if (n["dir"]) a.dir = as_scalar<std::string>(n["dir"], ctx, "dir");
    if (a.source != "builtin" && a.source != "dir")
        throw validation_error("assets: 'source' must be 'builtin' or 'dir'", "source");
    if (a.source == "dir" && a.dir.empty()) missing(ctx, "dir");
    return a;
}

SimParams parse_sim(const YAML::Node& n) {
    const std::string ctx = "plating.sim";
    require_map(n, ctx);
    reject_unknown_keys(n, ctx,
                        {"gravity", "timestep_s", "friction_coeff", "restitution",
                         "settle_speed_eps", "settle_hold_s", "max_sim_s", "drop_height_min_m",
                         "drop_height_max_m", "linear_damping", "angular_damping",
                         "rolling_resistance", "solver_iterations"});
    SimParams s;
    auto grab = [&](const char* key, double& into, bool must_be_positive) {
        if (!n[key]) return;
        const double v = as_scalar<double>(n[key], ctx, key);
        into = must_be_positive ? positive(v, ctx, key) : non_negative(v, ctx, key);
    };
    grab("gravity", s.gravity, true);
    grab("timestep_s", s.timestep_s, true);
    grab("friction_coeff", s.friction_coeff, false);
    grab("restitution", s.restitution, false);
    grab("settle_speed_eps", s.settle_speed_eps, true);
    grab("settle_hold_s", s.settle_hold_s, true);
    grab("max_sim_s", s.max_sim_s, true);
    grab("drop_height_min_m", s.drop_height_min_m, false);
    grab("drop_height_max_m", s.drop_height_max_m, false);
    grab("linear_damping", s.linear_damping, false);
    grab("angular_damping", s.angular_damping, false);
    grab("rolling_resistance", s.rolling_resistance, false);
    if (n["solver_iterations"]) {
        s.solver_iterations = as_scalar<int>(n["solver_iterations"], ctx, "solver_iterations");
        if (s.solver_iterations < 1)
            throw validation_error(ctx + ": 'solver_iterations' must be >= 1",
                                   "solver_iterations");
    }
    validate_sim_params(s);
    return s;
}

PlatingConfig parse_plating(const YAML::Node& n) {
    const std::string ctx = "plating";
    require_map(n, ctx);
    reject_unknown_keys(n, ctx, {"mode", "max_items", "rules", "plate", "sim"});
    PlatingConfig p;
    if (n["mode"]) p.mode = as_scalar<std::string>(n["mode"], ctx, "mode");
    if (p.mode != "dynamic" && p.mode != "procedural")
        throw validation_error("plating: 'mode' must be 'dynamic' or 'procedural'", "mode");
    if (n["max_items"]) {
        p.max_items = as_scalar<int>(n["max_items"], ctx, "max_items");
        if (p.max_items < 1)
            throw validation_error("plating: 'max_items' must be >= 1", "max_items");
    }
    if (n["rules"]) p.rules_path = as_scalar<std::string>(n["rules"], ctx, "rules");
    if (p.mode == "procedural" && p.rules_path.empty()) missing(ctx, "rules");
    if (n["plate"]) p.plate = parse_plate(n["plate"]);
    if (n["sim"]) p.sim = parse_sim(n["sim"]);
    return p;
}

RigConfig parse_rig(const YAML::Node& n) {
    const std::string ctx = "rig";
    require_map(n, ctx);
    reject_unknown_keys(n, ctx,
                        {"n_views", "hemisphere_radius_m", "min_elevation_deg", "focal_min_mm",
                         "focal_max_mm", "sensor_width_mm"});
    RigConfig r;
    if (n["n_views"]) r.n_views = as_scalar<int>(n["n_views"], ctx, "n_views");
    if (n["hemisphere_radius_m"])
        r.hemisphere_radius_m = positive(
            as_scalar<double>(n["hemisphere_radius_m"], ctx, "hemisphere_radius_m"), ctx,
            "hemisphere_radius_m");
    if (n["min_elevation_deg"])
        r.min_elevation_rad =
            radians(as_scalar<double>(n["min_elevation_deg"], ctx, "min_elevation_deg"));
    if (n["focal_min_mm"])
        r.focal_min_mm = positive(as_scalar<double>(n["focal_min_mm"], ctx, "focal_min_mm"),
                                  ctx, "focal_min_mm");
    if (n["focal_max_mm"])
        r.focal_max_mm = positive(as_scalar<double>(n["focal_max_mm"], ctx, "focal_max_mm"),
                                  ctx, "focal_max_mm");
    if (n["sensor_width_mm"])
        r.sensor_width_mm = positive(
            as_scalar<double>(n["sensor_width_mm"], ctx, "sensor_width_mm"), ctx, "sensor_width_mm");
    return r;
}

RenderConfig parse_render(const YAML::Node& n) {
    const std::string ctx = "render";
    require_map(n, ctx);
    reject_unknown_keys(n, ctx, {"width", "height", "light", "brightness_min", "brightness_max"});
    RenderConfig r;
    if (n["width"]) r.width = as_scalar<int>(n["width"], ctx, "width");
    if (n["height"]) r.height = as_scalar<int>(n["height"], ctx, "height");
    if (r.width < 1 || r.height < 1)
        throw validation_error("render: resolution must be >= 1 px", "width");
    if (n["light"]) {
        const YAML::Node l = n["light"];
        require_map(l, ctx + ".light");
        reject_unknown_keys(l, ctx + ".light", {"to_light", "ambient", "diffuse"});
        if (l["to_light"]) r.light.to_light = as_vec3(l["to_light"], ctx, "to_light");
        if (r.light.to_light.norm2() < 1e-12)
            throw validation_error("render.light: 'to_light' must be nonzero", "to_light");
        if (l["ambient"])
            r.light.ambient = non_negative(as_scalar<double>(l["ambient"], ctx, "ambient"),
                                           ctx, "ambient");
        if (l["diffuse"])
            r.light.diffuse = non_negative(as_scalar<double>(l["diffuse"], ctx, "diffuse"),
                                           ctx, "diffuse");
    }
    if (n["brightness_min"])
        r.brightness_min = as_scalar<double>(n["brightness_min"], ctx, "brightness_min");
    if (n["brightness_max"])
        r.brightness_max = as_scalar<double>(n["brightness_max"], ctx, "brightness_max");
    return r;
}

OutputConfig parse_output(const YAML::Node& n) {
    const std::string ctx = "output";
    require_map(n, ctx);
    reject_unknown_keys(n, ctx, {"dir"});
    OutputConfig o;
    if (n["dir"]) o.dir = as_scalar<std::string>(n["dir"], ctx, "dir");
    return o;
}

} // namespace

void validate_pipeline_config(const PipelineConfig& c) {
    validate_rig_config(c.rig);
    validate_sim_params(c.plating.sim);
    if (!(c.render.brightness_min >= 1.0 && c.render.brightness_max <= 2.0 &&
          c.render.brightness_min <= c.render.brightness_max))
        throw validation_error("render: brightness range must lie within [1, 2]",
                               "brightness_min");
    if (c.plating.mode == "dynamic" && c.plating.max_items > c.plating.plate.segment_count)
        throw validation_error(
            "plating: max_items exceeds plate segment_count (" +
                std::to_string(c.plating.max_items) + " > " +
                std::to_string(c.plating.plate.segment_count) + ")",
            "max_items");
}

PipelineConfig parse_pipeline_config(const std::string& yaml_text) {
    try {
        YAML::Node root = YAML::Load(yaml_text);
        PipelineConfig c;
        if (root.IsNull() || !root.IsDefined()) {
            // empty document: all defaults
        } else {
            require_map(root, "config");
            reject_unknown_keys(root, "config", {"assets", "plating", "rig", "render", "output"});
            if (root["assets"]) c.assets = parse_assets(root["assets"]);
            if (root["plating"]) c.plating = parse_plating(root["plating"]);
            if (root["rig"]) c.rig = parse_rig(root["rig"]);
            if (root["render"]) c.render = parse_render(root["render"]);
            if (root["output"]) c.output = parse_output(root["output"]);
        }
        c.rig.image_width_px = c.render.width;
        c.rig.image_height_px = c.render.height;
        validate_pipeline_config(c);
        return c;
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
        throw Error(Error::Kind::Parse, std::string("config rejected: ") + e.what());
    }
}

PipelineConfig load_pipeline_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        Error e(Error::Kind::Io, "cannot open config: " + path);
        e.path = path;
        throw e;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_pipeline_config(ss.str());
    } catch (Error& e) {
        if (e.path.empty()) e.path = path;
        throw;
    }
}

Json config_to_json(const PipelineConfig& c) {
    Json j;
    j["assets"] = {{"source", c.assets.source}, {"dir", c.assets.dir}};
    j["plating"] = {{"mode", c.plating.mode},
                    {"max_items", c.plating.max_items},
                    {"rules", c.plating.rules_path},
                    {"plate",
                     {{"center", Json::array({c.plating.plate.center.x, c.plating.plate.center.y,
                                              c.plating.plate.center.z})},
                      {"radius_m", c.plating.plate.radius_m},
                      {"rim_height_m", c.plating.plate.rim_height_m},
                      {"top_z_m", c.plating.plate.top_z_m},
                      {"segment_count", c.plating.plate.segment_count}}},
                    {"sim",
                     {{"gravity", c.plating.sim.gravity},
                      {"timestep_s", c.plating.sim.timestep_s},
                      {"friction_coeff", c.plating.sim.friction_coeff},
                      {"restitution", c.plating.sim.restitution},
                      {"settle_speed_eps", c.plating.sim.settle_speed_eps},
                      {"settle_hold_s", c.plating.sim.settle_hold_s},
                      {"max_sim_s", c.plating.sim.max_sim_s},
                      {"drop_height_min_m", c.plating.sim.drop_height_min_m},
                      {"drop_height_max_m", c.plating.sim.drop_height_max_m},
                      {"linear_damping", c.plating.sim.linear_damping},
                      {"angular_damping", c.plating.sim.angular_damping},
                      {"rolling_resistance", c.plating.sim.rolling_resistance},
                      {"solver_iterations", c.plating.sim.solver_iterations}}}};
    j["rig"] = {{"n_views", c.rig.n_views},
                {"hemisphere_radius_m", c.rig.hemisphere_radius_m},
                {"min_elevation_rad", c.rig.min_elevation_rad},
                {"focal_min_mm", c.rig.focal_min_mm},
                {"focal_max_mm", c.rig.focal_max_mm},
                {"sensor_width_mm", c.rig.sensor_width_mm}};
    j["render"] = {{"width", c.render.width},
                   {"height", c.render.height},
                   {"light",
                    {{"to_light", Json::array({c.render.light.to_light.x,
                                               c.render.light.to_light.y,
                                               c.render.light.to_light.z})},
                     {"ambient", c.render.light.ambient},
                     {"diffuse", c.render.light.diffuse}}},
                   {"brightness_min", c.render.brightness_min},
                   {"brightness_max", c.render.brightness_max}};
    j["output"] = {{"dir", c.output.dir}};
    return j;
}

PipelineConfig config_from_json(const Json& j) {
    try {
        PipelineConfig c;
        j.at("assets").at("source").get_to(c.assets.source);
        j.at("assets").at("dir").get_to(c.assets.dir);

        const Json& p = j.at("plating");
        p.at("mode").get_to(c.plating.mode);
        p.at("max_items").get_to(c.plating.max_items);
        p.at("rules").get_to(c.plating.rules_path);
        const Json& plate = p.at("plate");
        c.plating.plate.center = {plate.at("center").at(0).get<double>(),
                                  plate.at("center").at(1).get<double>(),
                                  plate.at("center").at(2).get<double>()};
        plate.at("radius_m").get_to(c.plating.plate.radius_m);
        plate.at("rim_height_m").get_to(c.plating.plate.rim_height_m);
        plate.at("top_z_m").get_to(c.plating.plate.top_z_m);
        plate.at("segment_count").get_to(c.plating.plate.segment_count);
        const Json& sim = p.at("sim");
        sim.at("gravity").get_to(c.plating.sim.gravity);
        sim.at("timestep_s").get_to(c.plating.sim.timestep_s);
        sim.at("friction_coeff").get_to(c.plating.sim.friction_coeff);
        sim.at("restitution").get_to(c.plating.sim.restitution);
        sim.at("settle_speed_eps").get_to(c.plating.sim.settle_speed_eps);
        sim.at("settle_hold_s").get_to(c.plating.sim.settle_hold_s);
        sim.at("max_sim_s").get_to(c.plating.sim.max_sim_s);
        sim.at("drop_height_min_m").get_to(c.plating.sim.drop_height_min_m);
        sim.at("drop_height_max_m").get_to(c.plating.sim.drop_height_max_m);
        sim.at("linear_damping").get_to(c.plating.sim.linear_damping);
        sim.at("angular_damping").get_to(c.plating.sim.angular_damping);
        sim.at("rolling_resistance").get_to(c.plating.sim.rolling_resistance);
        sim.at("solver_iterations").get_to(c.plating.sim.solver_iterations);

        const Json& r = j.at("rig");
        r.at("n_views").get_to(c.rig.n_views);
        r.at("hemisphere_radius_m").get_to(c.rig.hemisphere_radius_m);
        r.at("min_elevation_rad").get_to(c.rig.min_elevation_rad);
        r.at("focal_min_mm").get_to(c.rig.focal_min_mm);
        r.at("focal_max_mm").get_to(c.rig.focal_max_mm);
        r.at("sensor_width_mm").get_to(c.rig.sensor_width_mm);

        const Json& rr = j.at("render");
        rr.at("width").get_to(c.render.width);
        rr.at("height").get_to(c.render.height);
        const Json& light = rr.at("light");
        c.render.light.to_light = {light.at("to_light").at(0).get<double>(),
                                   light.at("to_light").at(1).get<double>(),
                                   light.at("to_light").at(2).get<double>()};
        light.at("ambient").get_to(c.render.light.ambient);
        light.at("diffuse").get_to(c.render.light.diffuse);
        rr.at("brightness_min").get_to(c.render.brightness_min);
        rr.at("brightness_max").get_to(c.render.brightness_max);

        j.at("output").at("dir").get_to(c.output.dir);

        c.rig.image_width_px = c.render.width;
        c.rig.image_height_px = c.render.height;
        validate_pipeline_config(c);
        return c;
    } catch (const Json::exception& ex) {
        throw Error(Error::Kind::Parse,
                    std::string("config snapshot structure invalid: ") + ex.what());
    }
}

AssetLibrary build_library(const AssetsConfig& assets) {
    if (assets.source == "builtin") return make_builtin_library();
    return load_library(assets.dir);
}

} // namespace mealgen
