#include "mealgen/render.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "mealgen/error.hpp"
#include "mealgen/mesh.hpp"

namespace mealgen {

namespace {

constexpr double kTableHalfExtent = 1.0;  // m; large enough to fill the frame

uint8_t quantize(double v) {
    return static_cast<uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

// Inclusive pixel rectangle; empty when x_min > x_max.
struct PixelRect {
    int x_min = 0, y_min = 0, x_max = -1, y_max = -1;
    bool contains(int x, int y) const {
        return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
    }
    bool empty() const { return x_min > x_max || y_min > y_max; }
};

PixelRect full_frame(const CameraFrame& f) { return {0, 0, f.width - 1, f.height - 1}; }

// Conservative screen bounds of an oriented box: the perspective image of a
// convex solid in front of the camera is the convex hull of its projected
// corners, so the corner rectangle (padded one pixel) bounds the silhouette
// of anything inside the box. Falls back to the full frame when a corner
// reaches behind the camera plane.
PixelRect project_box(const CameraFrame& f, const Bbox3D& box) {
    double lo_x = 1e30, lo_y = 1e30, hi_x = -1e30, hi_y = -1e30;
    for (int i = 0; i < 8; ++i) {
        const Vec3 corner{(i & 1) ? box.half_extents.x : -box.half_extents.x,
                          (i & 2) ? box.half_extents.y : -box.half_extents.y,
                          (i & 4) ? box.half_extents.z : -box.half_extents.z};
        const Vec3 world = box.orientation.rotate(corner) + box.center;
        double px, py;
        if (!f.project(world, px, py)) return full_frame(f);
        lo_x = std::min(lo_x, px);
        lo_y = std::min(lo_y, py);
        hi_x = std::max(hi_x, px);
        hi_y = std::max(hi_y, py);
    }
    PixelRect r;
    r.x_min = std::max(0, static_cast<int>(std::floor(lo_x)) - 1);
    r.y_min = std::max(0, static_cast<int>(std::floor(lo_y)) - 1);
    r.x_max = std::min(f.width - 1, static_cast<int>(std::ceil(hi_x)) + 1);
    r.y_max = std::min(f.height - 1, static_cast<int>(std::ceil(hi_y)) + 1);
    return r;
}

} // namespace

SceneGeometry::SceneGeometry(const Scene& scene, const AssetLibrary& library) : scene_(scene) {
    // one BVH per distinct asset, plus plate and table
    std::map<std::string, size_t> bvh_of_asset;
    for (const auto& item : scene.items) bvh_of_asset.emplace(item.asset_id, 0);
    owned_bvhs_.reserve(bvh_of_asset.size() + 2);

    const auto legend = library.semantic_legend();

    size_t next = 0;
    for (auto& [asset_id, slot] : bvh_of_asset) {
        owned_bvhs_.emplace_back(library.at(asset_id).mesh);
        slot = next++;
    }

    for (size_t i = 0; i < scene.items.size(); ++i) {
        const PlacedItem& placed = scene.items[i];
        const FoodAsset& asset = library.at(placed.asset_id);
        Instance inst;
        inst.bvh = &owned_bvhs_[bvh_of_asset.at(placed.asset_id)];
        inst.world_from_object = placed.pose;
        inst.object_from_world_rot = placed.pose.orientation.conjugate();
        inst.albedo = asset.albedo;
        inst.semantic_id = legend.at(asset.semantic_class);
        inst.instance_id = static_cast<int>(i) + 1;
        inst.asset_id = asset.asset_id;
        inst.semantic_class = asset.semantic_class;
        inst.aabb_object = asset.aabb_object;
        items_.push_back(std::move(inst));
    }

    const TriangleMesh plate_mesh = make_plate_mesh(scene.plate.radius_m, scene.plate.top_z_m,
                                                    scene.plate.rim_height_m);
    const TriangleMesh table_mesh = make_table_mesh(kTableHalfExtent);
    owned_bvhs_.emplace_back(plate_mesh);
    owned_bvhs_.emplace_back(table_mesh);

    Instance plate;
    plate.bvh = &owned_bvhs_[owned_bvhs_.size() - 2];
    plate.world_from_object = Pose{scene.plate.center, Quat::identity()};
    plate.object_from_world_rot = Quat::identity();
    plate.albedo = {0.92, 0.92, 0.92};
    plate.aabb_object = compute_aabb(plate_mesh);
    backdrop_.push_back(std::move(plate));

    Instance table;
    table.bvh = &owned_bvhs_.back();
    table.world_from_object = Pose{scene.plate.center, Quat::identity()};
    table.object_from_world_rot = Quat::identity();
    table.albedo = {0.42, 0.31, 0.22};
    table.aabb_object = compute_aabb(table_mesh);
    backdrop_.push_back(std::move(table));
}

RayHit SceneGeometry::intersect_instance(const Instance& inst, const Ray& world_ray) {
    // rigid transform only: object-space t equals world-space t
    Ray local;
    local.origin =
        inst.object_from_world_rot.rotate(world_ray.origin - inst.world_from_object.position);
    local.dir = inst.object_from_world_rot.rotate(world_ray.dir);
    RayHit hit = inst.bvh->intersect(local);
    if (hit.hit) hit.normal = inst.world_from_object.orientation.rotate(hit.normal);
    return hit;
}

std::optional<Bbox2D> bbox2d_from_mask(const BinaryMask& mask) {
    Bbox2D box{mask.width, mask.height, -1, -1};
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x)
            if (mask.at(x, y)) {
                box.x_min = std::min(box.x_min, x);
                box.y_min = std::min(box.y_min, y);
                box.x_max = std::max(box.x_max, x);
                box.y_max = std::max(box.y_max, y);
            }
    if (box.x_max < 0) return std::nullopt;
    return box;
}

Bbox3D bbox3d_for_item(const Aabb& aabb_object, const Pose& pose) {
    Bbox3D box;
    box.center = pose.apply(aabb_object.center());
    box.half_extents = aabb_object.extent() * 0.5;
    box.orientation = pose.orientation;
    return box;
}

namespace {

BinaryMask amodal_for_item(const SceneGeometry::Instance& inst, const CameraFrame& frame,
                           const PixelRect& rect, uint64_t& pixel_count) {
    BinaryMask mask(frame.width, frame.height, 0);
    pixel_count = 0;
    for (int y = rect.y_min; y <= rect.y_max; ++y) {
        for (int x = rect.x_min; x <= rect.x_max; ++x) {
            Ray ray{frame.origin, frame.ray_dir(x, y)};
            if (SceneGeometry::intersect_instance(inst, ray).hit) {
                mask.at(x, y) = 1;
                ++pixel_count;
            }
        }
    }
    return mask;
}

} // namespace

RenderBundle render_view(const SceneGeometry& geometry, const CameraPose& camera,
                         const LightSpec& light, const std::vector<double>& brightness_factors) {
    const auto& items = geometry.items();
    if (brightness_factors.size() != items.size())
        throw validation_error("need one brightness factor per scene item (" +
                                   std::to_string(items.size()) + " items, " +
                                   std::to_string(brightness_factors.size()) + " factors)",
                               "brightness_factors");
    for (double b : brightness_factors)
        if (!(b >= 1.0 && b <= 2.0))
            throw validation_error("brightness factor " + std::to_string(b) +
                                       " outside [1, 2]",
                                   "brightness_factors");

    const CameraFrame frame = make_frame(camera);
    const Vec3 to_light = light.to_light.normalized();

    RenderBundle out;
    out.rgb = RgbImage(frame.width, frame.height, 0);
    out.depth = DepthMap(frame.width, frame.height, std::numeric_limits<float>::infinity());
    out.semantic = MaskImage(frame.width, frame.height, 0);
    out.instance = MaskImage(frame.width, frame.height, 0);

    // screen-space culling rectangles and box annotations, one per item
    std::vector<PixelRect> rects;
    std::vector<Bbox3D> boxes3d;
    rects.reserve(items.size());
    boxes3d.reserve(items.size());
    for (const auto& inst : items) {
        Bbox3D b = bbox3d_for_item(inst.aabb_object, inst.world_from_object);
        rects.push_back(project_box(frame, b));
        boxes3d.push_back(b);
    }

    struct Extents {
        int x_min, y_min, x_max, y_max;
        uint64_t count = 0;
    };
    std::vector<Extents> visible(items.size(),
                                 {frame.width, frame.height, -1, -1, 0});

    for (int y = 0; y < frame.height; ++y) {
        for (int x = 0; x < frame.width; ++x) {
            Ray ray{frame.origin, frame.ray_dir(x, y)};

            RayHit best;
            best.t = std::numeric_limits<double>::infinity();
            const SceneGeometry::Instance* best_inst = nullptr;
            int best_item = -1;

            // items in instance order, then plate, then table; the strict
            // comparison keeps the lowest id at coincident surfaces
            for (size_t i = 0; i < items.size(); ++i) {
                if (!rects[i].contains(x, y)) continue;
                RayHit h = SceneGeometry::intersect_instance(items[i], ray);
                if (h.hit && h.t < best.t) {
                    best = h;
                    best_inst = &items[i];
                    best_item = static_cast<int>(i);
                }
            }
            for (const auto& inst : geometry.backdrop()) {
                RayHit h = SceneGeometry::intersect_instance(inst, ray);
                if (h.hit && h.t < best.t) {
                    best = h;
                    best_inst = &inst;
                    best_item = -1;
                }
            }

            if (!best_inst) continue;

            Vec3 n = best.normal;
            if (n.dot(ray.dir) > 0.0) n = -n;
            const double brightness =
                best_item >= 0 ? brightness_factors[static_cast<size_t>(best_item)] : 1.0;
            const double shade =
                brightness * (light.ambient + light.diffuse * std::max(0.0, n.dot(to_light)));
            out.rgb.at(x, y, 0) = quantize(best_inst->albedo.x * shade);
            out.rgb.at(x, y, 1) = quantize(best_inst->albedo.y * shade);
            out.rgb.at(x, y, 2) = quantize(best_inst->albedo.z * shade);
            out.depth.at(x, y) = static_cast<float>(best.t * ray.dir.dot(frame.forward));
            out.semantic.at(x, y) = best_inst->semantic_id;
            out.instance.at(x, y) = static_cast<uint16_t>(best_inst->instance_id);

            if (best_item >= 0) {
                Extents& e = visible[static_cast<size_t>(best_item)];
                e.x_min = std::min(e.x_min, x);
                e.y_min = std::min(e.y_min, y);
                e.x_max = std::max(e.x_max, x);
                e.y_max = std::max(e.y_max, y);
                ++e.count;
            }
        }
    }

    out.amodal.reserve(items.size());
    out.items.reserve(items.size());
    for (size_t i = 0; i < items.size(); ++i) {
        ItemAnnotation ann;
        ann.instance_id = items[i].instance_id;
        ann.asset_id = items[i].asset_id;
        ann.semantic_class = items[i].semantic_class;
        ann.semantic_id = items[i].semantic_id;
        ann.bbox3d = boxes3d[i];
        ann.brightness_factor = brightness_factors[i];
        ann.visible_pixel_count = visible[i].count;
        if (visible[i].count > 0)
            ann.bbox2d = Bbox2D{visible[i].x_min, visible[i].y_min, visible[i].x_max,
                                visible[i].y_max};

        uint64_t amodal_count = 0;
        out.amodal.push_back(amodal_for_item(items[i], frame, rects[i], amodal_count));
        ann.amodal_pixel_count = amodal_count;
        out.items.push_back(std::move(ann));
    }
    return out;
}

std::vector<BinaryMask> amodal_masks(const SceneGeometry& geometry, const CameraPose& camera) {
    const CameraFrame frame = make_frame(camera);
    std::vector<BinaryMask> masks;
    masks.reserve(geometry.items().size());
    for (const auto& inst : geometry.items()) {
        const PixelRect rect =
            project_box(frame, bbox3d_for_item(inst.aabb_object, inst.world_from_object));
        uint64_t count = 0;
        masks.push_back(amodal_for_item(inst, frame, rect, count));
    }
    return masks;
}

} // namespace mealgen
