#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mealgen/mesh.hpp"
#include "mealgen/rng.hpp"

namespace mealgen {

struct NutritionFacts {
    double mass_g = 0.0;
    double calories_kcal = 0.0;
    double carbs_g = 0.0;
    double fat_g = 0.0;
    double protein_g = 0.0;
};

// Throws a validation error naming the offending field.
void validate_nutrition(const NutritionFacts& n);

struct FoodAsset {
    std::string asset_id;
    std::string display_name;
    std::string semantic_class;
    TriangleMesh mesh;                // meters, object space
    Vec3 albedo{0.8, 0.8, 0.8};      // flat color, [0,1]^3
    std::vector<Vec3> collision_hull; // deduplicated vertex set; its convex
                                      // hull covers the mesh by construction
    Aabb aabb_object;
    NutritionFacts nutrition;
};

void validate_asset(const FoodAsset& asset);

// Immutable after construction; safe to share across scene workers.
class AssetLibrary {
public:
    void add(FoodAsset asset);  // rejects duplicate asset ids

    const FoodAsset& at(const std::string& asset_id) const;
    const FoodAsset& at_index(size_t i) const { return assets_[i]; }
    bool contains(const std::string& asset_id) const { return index_.count(asset_id) != 0; }
    size_t size() const { return assets_.size(); }
    bool empty() const { return assets_.empty(); }

    const std::vector<FoodAsset>& assets() const { return assets_; }
    const std::map<std::string, std::vector<std::string>>& class_index() const { return class_index_; }
    // Sorted class names; index+1 is the stable semantic id used in masks.
    std::vector<std::string> class_names() const;
    std::map<std::string, uint16_t> semantic_legend() const;

private:
    std::vector<FoodAsset> assets_;
    std::map<std::string, size_t> index_;
    std::map<std::string, std::vector<std::string>> class_index_;
};

// metadata_file schema:
//   {"asset_id", "display_name", "semantic_class", "albedo":[r,g,b],
//    "scale": optional, "nutrition": {"mass_g","calories_kcal","carbs_g","fat_g","protein_g"}}
// Unknown fields are ignored with a warning on stderr. The optional uniform
// `scale` is applied to the mesh at load; nutrition is NOT rescaled (values
// are per asset instance as authored).
FoodAsset load_asset(const std::filesystem::path& mesh_file,
                     const std::filesystem::path& metadata_file);

// Directory layout: one subdirectory per asset with mesh.obj + meta.json.
AssetLibrary load_library(const std::filesystem::path& dir);

enum class PrimitiveKind { Sphere, Box, Ellipsoid, Cylinder };

// size_m is the full AABB extent of the primitive:
//   sphere   -> diameter size_m.x (extents must be equal)
//   box      -> extents as given
//   ellipsoid-> per-axis diameters
//   cylinder -> diameter size_m.x, height size_m.z
// The mesh is a fixed tessellation, byte-identical for equal inputs; `seed`
// deterministically picks the albedo and the asset id suffix.
FoodAsset make_primitive_asset(PrimitiveKind kind, const Vec3& size_m,
                               const std::string& semantic_class,
                               const NutritionFacts& nutrition, uint64_t seed);

// Desk-scale stand-in library: 8 assets over 4 classes.
AssetLibrary make_builtin_library();

// Distinct asset ids, count uniform over {3..max_items} (clamped to the
// library size and to max_items when smaller). Deterministic per rng state.
std::vector<std::string> sample_items(const AssetLibrary& library, int max_items, Rng& rng);

} // namespace mealgen
