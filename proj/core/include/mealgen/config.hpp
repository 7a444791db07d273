#pragma once

#include <string>

#include <json.hpp>

#include "mealgen/asset.hpp"
#include "mealgen/camera.hpp"
#include "mealgen/render.hpp"
#include "mealgen/scene.hpp"
#include "mealgen/sim.hpp"

namespace mealgen {

// Pipeline configuration, one YAML document with sections:
//   assets:  {source: builtin | dir, dir: <library path>}
//   plating: {mode: dynamic | procedural, max_items, rules: <path>,
//             plate: {...}, sim: {...}}
//   rig:     {n_views, hemisphere_radius_m, min_elevation_deg, focal_min_mm,
//             focal_max_mm, sensor_width_mm}
//   render:  {width, height, light: {to_light, ambient, diffuse},
//             brightness_min, brightness_max}
//   output:  {dir}
// Every section is optional (defaults apply); unknown keys are hard errors.

struct AssetsConfig {
    std::string source = "builtin";  // "builtin" | "dir"
    std::string dir;
};

struct PlatingConfig {
    std::string mode = "dynamic";  // "dynamic" | "procedural"
    int max_items = 7;
    std::string rules_path;  // procedural mode only
    PlateSpec plate;
    SimParams sim;
};

struct RenderConfig {
    int width = 512;
    int height = 512;
    LightSpec light;
    double brightness_min = 1.0;
    double brightness_max = 2.0;
};

struct OutputConfig {
    std::string dir;  // default output directory; CLI --out overrides
};

struct PipelineConfig {
    AssetsConfig assets;
    PlatingConfig plating;
    RigConfig rig;  // resolution fields mirrored from `render`
    RenderConfig render;
    OutputConfig output;
};

PipelineConfig parse_pipeline_config(const std::string& yaml_text);
PipelineConfig load_pipeline_config(const std::string& path);
void validate_pipeline_config(const PipelineConfig& config);

// Round-trippable snapshot embedded in manifests.
nlohmann::json config_to_json(const PipelineConfig& config);
PipelineConfig config_from_json(const nlohmann::json& j);

// Builds the asset library the config names: the built-in primitive set or
// an on-disk library directory.
AssetLibrary build_library(const AssetsConfig& assets);

} // namespace mealgen
