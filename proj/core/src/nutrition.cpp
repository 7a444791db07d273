#include "mealgen/nutrition.hpp"

#include <set>

namespace mealgen {

SceneNutrition aggregate(const Scene& scene, const AssetLibrary& library) {
    SceneNutrition out;
    for (const auto& item : scene.items) {
        const FoodAsset& asset = library.at(item.asset_id);
        out.totals.mass_g += asset.nutrition.mass_g;
        out.totals.calories_kcal += asset.nutrition.calories_kcal;
        out.totals.carbs_g += asset.nutrition.carbs_g;
        out.totals.fat_g += asset.nutrition.fat_g;
        out.totals.protein_g += asset.nutrition.protein_g;
        out.ingredients.push_back({asset.asset_id, asset.semantic_class});
    }
    out.ingredient_count = static_cast<int>(out.ingredients.size());
    return out;
}

ClassStats class_stats(const std::vector<Scene>& scenes, const AssetLibrary& library) {
    ClassStats stats;
    std::map<std::string, double> mass_sum;
    for (const auto& scene : scenes) {
        std::set<std::string> classes_here;
        for (const auto& item : scene.items) {
            const FoodAsset& asset = library.at(item.asset_id);
            ClassEntry& e = stats[asset.semantic_class];
            e.instance_count += 1;
            mass_sum[asset.semantic_class] += asset.nutrition.mass_g;
            classes_here.insert(asset.semantic_class);
        }
        for (const auto& c : classes_here) stats[c].scene_frequency += 1;
    }
    for (auto& [name, e] : stats)
        e.mean_mass_g = e.instance_count ? mass_sum[name] / static_cast<double>(e.instance_count) : 0.0;
    return stats;
}

} // namespace mealgen
