#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mealgen/camera.hpp"
#include "mealgen/nutrition.hpp"
#include "mealgen/render.hpp"
#include "mealgen/scene.hpp"

namespace mealgen {

using Json = nlohmann::json;

// JSON codecs (ADL hooks for nlohmann)
void to_json(Json& j, const Vec3& v);
void from_json(const Json& j, Vec3& v);
void to_json(Json& j, const Quat& q);
void from_json(const Json& j, Quat& q);
void to_json(Json& j, const Pose& p);
void from_json(const Json& j, Pose& p);
void to_json(Json& j, const NutritionFacts& n);
void from_json(const Json& j, NutritionFacts& n);
void to_json(Json& j, const CameraPose& c);
void from_json(const Json& j, CameraPose& c);
void to_json(Json& j, const Bbox2D& b);
void from_json(const Json& j, Bbox2D& b);
void to_json(Json& j, const Bbox3D& b);
void from_json(const Json& j, Bbox3D& b);
void to_json(Json& j, const ItemAnnotation& a);
void from_json(const Json& j, ItemAnnotation& a);
void to_json(Json& j, const PlateSpec& p);
void from_json(const Json& j, PlateSpec& p);

struct SceneItemRecord {
    int instance_id = 0;
    std::string asset_id;
    std::string semantic_class;
    double mass_g = 0.0;  // per-item, so stats stay computable from the manifest alone
};

struct SceneRecord {
    std::string scene_id;
    uint64_t seed = 0;
    int attempt = 0;  // retry index that produced the scene
    std::string plating_mode;
    std::vector<SceneItemRecord> items;
    NutritionFacts nutrition_totals;
    std::string scene_path;      // all paths relative to the dataset root
    std::string nutrition_path;
};

struct ImageRecord {
    std::string scene_id;
    std::string view_id;
    int view_index = 0;
    CameraPose camera;
    std::string rgb_path;
    std::string depth_path;
    std::string semantic_path;
    std::string instance_path;
    std::string annotations_path;
    std::string amodal_dir;
};

struct Manifest {
    std::string tool_version;
    uint64_t master_seed = 0;
    Json config_snapshot;  // full pipeline config; enough to regenerate
    int views_per_scene = 0;
    std::map<std::string, uint16_t> legend;  // semantic class -> mask id
    std::vector<SceneRecord> scenes;
    std::vector<ImageRecord> images;
    std::vector<std::string> provenance;  // human-readable derivation notes
};

void to_json(Json& j, const SceneItemRecord& r);
void from_json(const Json& j, SceneItemRecord& r);
void to_json(Json& j, const SceneRecord& r);
void from_json(const Json& j, SceneRecord& r);
void to_json(Json& j, const ImageRecord& r);
void from_json(const Json& j, ImageRecord& r);
void to_json(Json& j, const Manifest& m);
void from_json(const Json& j, Manifest& m);

// SHA-256 over the canonical (sorted-key) JSON dump, excluding the hash field.
std::string manifest_content_hash(const Manifest& m);

// Writes the manifest with an embedded "content_hash"; load verifies it.
void save_manifest(const std::string& path, const Manifest& m);
Manifest load_manifest(const std::string& path, bool verify_hash = true);

// Keeps exactly k views per scene, chosen by select_views with a
// scene-index-derived seed. Errors when some scene has fewer than k views.
Manifest subsample_views(const Manifest& manifest, int k, uint64_t seed);

struct SplitAssignment {
    std::map<std::string, std::string> split_of_scene;  // scene_id -> train|val|test
    std::array<double, 3> ratios{0.6, 0.2, 0.2};
    uint64_t seed = 0;

    std::array<size_t, 3> counts() const;
};

// Largest-remainder apportionment of n into three parts; ties go to the
// earlier split (train, val, test order).
std::array<size_t, 3> largest_remainder_sizes(size_t n, const std::array<double, 3>& ratios);

SplitAssignment split_scenes(const Manifest& manifest, const std::array<double, 3>& ratios,
                             uint64_t seed);

void save_splits(const std::string& path, const SplitAssignment& s);
SplitAssignment load_splits(const std::string& path);

struct Histogram {
    double lo = 0.0, hi = 0.0;  // value range covered by the bins
    std::vector<uint64_t> counts;
    double min_value = 0.0, max_value = 0.0, mean = 0.0;
    uint64_t total = 0;
};

Histogram make_histogram(const std::vector<double>& values, int bins = 10);

struct StatsReport {
    uint64_t scene_count = 0;
    uint64_t image_count = 0;
    double mean_items_per_scene = 0.0;
    double mean_scenes_per_item = 0.0;  // over distinct asset ids that appear
    std::map<std::string, Histogram> per_scene;  // calories/carbs/fat/protein/mass/items
    ClassStats classes;
};

StatsReport stats_report(const Manifest& manifest);
Json stats_to_json(const StatsReport& r);

} // namespace mealgen
