#pragma once

#include <map>
#include <string>
#include <vector>

#include "mealgen/asset.hpp"
#include "mealgen/scene.hpp"

namespace mealgen {

struct SceneIngredient {
    std::string asset_id;
    std::string semantic_class;
};

struct SceneNutrition {
    NutritionFacts totals;  // componentwise sum over placed items
    int ingredient_count = 0;
    std::vector<SceneIngredient> ingredients;
};

SceneNutrition aggregate(const Scene& scene, const AssetLibrary& library);

struct ClassEntry {
    uint64_t scene_frequency = 0;  // scenes containing >= 1 instance
    uint64_t instance_count = 0;
    double mean_mass_g = 0.0;
};

// keyed by semantic class name
using ClassStats = std::map<std::string, ClassEntry>;

ClassStats class_stats(const std::vector<Scene>& scenes, const AssetLibrary& library);

} // namespace mealgen
