#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mealgen/asset.hpp"
#include "mealgen/bvh.hpp"
#include "mealgen/camera.hpp"
#include "mealgen/image.hpp"
#include "mealgen/scene.hpp"

namespace mealgen {

struct LightSpec {
    Vec3 to_light{0.35, 0.25, 0.9};  // surface-to-light direction (normalized on use)
    double ambient = 0.35;
    double diffuse = 0.65;
};

struct Bbox2D {
    int x_min = 0, y_min = 0, x_max = 0, y_max = 0;  // inclusive pixels
};

struct Bbox3D {
    Vec3 center;
    Vec3 half_extents;
    Quat orientation = Quat::identity();  // object AABB carried rigidly by the pose
};

struct ItemAnnotation {
    int instance_id = 0;  // 1-based index into scene.items
    std::string asset_id;
    std::string semantic_class;
    uint16_t semantic_id = 0;
    std::optional<Bbox2D> bbox2d;  // absent when fully occluded or off-frame
    Bbox3D bbox3d;
    double brightness_factor = 1.0;
    uint64_t visible_pixel_count = 0;
    uint64_t amodal_pixel_count = 0;
};

struct RenderBundle {
    RgbImage rgb;
    DepthMap depth;
    MaskImage semantic;
    MaskImage instance;
    std::vector<BinaryMask> amodal;  // one per scene item, instance order
    std::vector<ItemAnnotation> items;
};

// Scene geometry prepared for raycasting: per-item object-space BVHs (cached
// per asset) plus the plate and table backdrop. Build once, render all views.
class SceneGeometry {
public:
    SceneGeometry(const Scene& scene, const AssetLibrary& library);

    SceneGeometry(const SceneGeometry&) = delete;
    SceneGeometry& operator=(const SceneGeometry&) = delete;

    size_t item_count() const { return items_.size(); }
    const Scene& scene() const { return scene_; }

    struct Instance {
        const Bvh* bvh = nullptr;
        Pose world_from_object;
        Quat object_from_world_rot;  // inverse rotation
        Vec3 albedo;
        uint16_t semantic_id = 0;    // 0 for backdrop
        int instance_id = 0;         // 1-based for items, 0 for backdrop
        std::string asset_id;
        std::string semantic_class;
        Aabb aabb_object;
    };

    const std::vector<Instance>& items() const { return items_; }
    const std::vector<Instance>& backdrop() const { return backdrop_; }

    // Nearest hit of a world-space ray against one instance. The same code
    // path serves the visible pass and the amodal pass, so the containment
    // property visible(i) <= amodal(i) holds bit-exactly.
    static RayHit intersect_instance(const Instance& inst, const Ray& world_ray);

private:
    Scene scene_;
    std::vector<Bvh> owned_bvhs_;
    std::vector<Instance> items_;
    std::vector<Instance> backdrop_;
};

// Shades every pixel (albedo * brightness * (ambient + diffuse * max(0, n.l)),
// clamped then quantized), writes planar depth, id masks, amodal masks, and
// per-item boxes. brightness_factors: one value in [1, 2] per scene item.
RenderBundle render_view(const SceneGeometry& geometry, const CameraPose& camera,
                         const LightSpec& light, const std::vector<double>& brightness_factors);

// Amodal-only rendering: each item raycast alone, ignoring occluders.
std::vector<BinaryMask> amodal_masks(const SceneGeometry& geometry, const CameraPose& camera);

std::optional<Bbox2D> bbox2d_from_mask(const BinaryMask& mask);

Bbox3D bbox3d_for_item(const Aabb& aabb_object, const Pose& pose);

} // namespace mealgen
