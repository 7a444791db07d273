#include <doctest.h>

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "mealgen/asset.hpp"
#include "mealgen/camera.hpp"
#include "mealgen/error.hpp"
#include "mealgen/render.hpp"
#include "mealgen/rng.hpp"
#include "mealgen/scene.hpp"

using namespace mealgen;

namespace {

NutritionFacts some_nutrition() { return {50, 40, 5, 1, 1}; }

AssetLibrary spheres_library() {
    AssetLibrary lib;
    lib.add(make_primitive_asset(PrimitiveKind::Sphere, {0.06, 0.06, 0.06}, "fruit",
                                 some_nutrition(), 1));  // r = 0.03
    lib.add(make_primitive_asset(PrimitiveKind::Sphere, {0.10, 0.10, 0.10}, "fruit",
                                 some_nutrition(), 2));  // r = 0.05
    lib.add(make_primitive_asset(PrimitiveKind::Sphere, {0.04, 0.04, 0.04}, "fruit",
                                 some_nutrition(), 3));  // r = 0.02
    return lib;
}

// horizontal view along +x at plate height + 0.10 so backdrop never
// intersects rays near the optical axis
CameraPose axis_camera(int res) {
    CameraPose cam;
    cam.position = {-0.40, 0.0, 0.10};
    cam.look_at = {0.0, 0.0, 0.10};
    cam.image_width_px = res;
    cam.image_height_px = res;
    return cam;
}

Scene one_sphere_scene(const AssetLibrary& lib, const Vec3& at, size_t which = 0) {
    Scene scene;
    scene.plate = PlateSpec{};
    scene.plating_mode = "procedural";
    scene.items.push_back({lib.at_index(which).asset_id, Pose{at, Quat::identity()}});
    return scene;
}

// analytic ray-sphere hit distance; +inf when missed
double ray_sphere_t(const Vec3& origin, const Vec3& dir, const Vec3& center, double radius) {
    const Vec3 oc = origin - center;
    const double b = oc.dot(dir);
    const double c = oc.norm2() - radius * radius;
    const double disc = b * b - c;
    if (disc < 0.0) return std::numeric_limits<double>::infinity();
    const double t = -b - std::sqrt(disc);
    return t > 0.0 ? t : std::numeric_limits<double>::infinity();
}

} // namespace

TEST_SUITE_BEGIN("render");

TEST_CASE("depth oracle: on-axis sphere at 0.40 m reads 0.37 m at the center pixel") {
    const AssetLibrary lib = spheres_library();
    const Scene scene = one_sphere_scene(lib, {0.0, 0.0, 0.10});  // r = 0.03
    const SceneGeometry geometry(scene, lib);
    const CameraPose cam = axis_camera(129);  // odd: pixel 64 is exactly on-axis
    const RenderBundle bundle = render_view(geometry, cam, LightSpec{}, {1.0});

    const float center = bundle.depth.at(64, 64);
    REQUIRE(std::isfinite(center));
    CHECK(std::abs(center - 0.37) <= 1e-3);
    CHECK(bundle.instance.at(64, 64) == 1);
    CHECK(bundle.semantic.at(64, 64) == 1);
}

TEST_CASE("depth consistency: 1000 foreground pixels re-intersect to the stored depth") {
    const AssetLibrary lib = make_builtin_library();
    Scene scene;
    scene.plate = PlateSpec{};
    scene.plating_mode = "procedural";
    // three items resting on the plate at distinct offsets
    const char* spots[3][2] = {{"-0.05", "0"}, {"0.04", "0.03"}, {"0", "-0.05"}};
    for (size_t i = 0; i < 3; ++i) {
        const FoodAsset& a = lib.at_index(i * 2);
        const Vec3 at{std::stod(spots[i][0]), std::stod(spots[i][1]),
                      scene.plate.top_z_m - a.aabb_object.lo.z};
        scene.items.push_back({a.asset_id, Pose{at, Quat::identity()}});
    }
    const SceneGeometry geometry(scene, lib);

    PlateSpec plate;
    RigConfig rig;
    rig.image_width_px = rig.image_height_px = 160;
    Rng rig_rng(5);
    const CameraPose cam = build_rig(plate, rig, rig_rng)[0];
    const RenderBundle bundle = render_view(geometry, cam, LightSpec{}, {1.0, 1.3, 1.9});
    const CameraFrame frame = make_frame(cam);

    // gather foreground pixels, then sample 1000 of them
    std::vector<std::pair<int, int>> foreground;
    for (int y = 0; y < 160; ++y)
        for (int x = 0; x < 160; ++x)
            if (std::isfinite(bundle.depth.at(x, y))) foreground.emplace_back(x, y);
    REQUIRE(foreground.size() >= 1000);

    Rng pick(99);
    for (int i = 0; i < 1000; ++i) {
        const auto [x, y] = foreground[pick.uniform_index(foreground.size())];
        const Ray ray{frame.origin, frame.ray_dir(x, y)};
        double nearest = std::numeric_limits<double>::infinity();
        for (const auto& inst : geometry.items()) {
            const RayHit h = SceneGeometry::intersect_instance(inst, ray);
            if (h.hit) nearest = std::min(nearest, h.t);
        }
        for (const auto& inst : geometry.backdrop()) {
            const RayHit h = SceneGeometry::intersect_instance(inst, ray);
            if (h.hit) nearest = std::min(nearest, h.t);
        }
        REQUIRE(std::isfinite(nearest));
        const double expected = nearest * ray.dir.dot(frame.forward);
        CHECK(std::abs(bundle.depth.at(x, y) - expected) <= 1e-6 * expected);
    }
}

TEST_CASE("raising a brightness factor never darkens that item's pixels") {
    const AssetLibrary lib = spheres_library();
    const Scene scene = one_sphere_scene(lib, {0.0, 0.0, 0.10});
    const SceneGeometry geometry(scene, lib);
    const CameraPose cam = axis_camera(96);
    const RenderBundle dim = render_view(geometry, cam, LightSpec{}, {1.0});
    const RenderBundle lit = render_view(geometry, cam, LightSpec{}, {2.0});

    bool any_brighter = false;
    for (int y = 0; y < 96; ++y)
        for (int x = 0; x < 96; ++x)
            if (dim.instance.at(x, y) == 1) {
                for (int c = 0; c < 3; ++c) {
                    CHECK(lit.rgb.at(x, y, c) >= dim.rgb.at(x, y, c));
                    any_brighter = any_brighter || lit.rgb.at(x, y, c) > dim.rgb.at(x, y, c);
                }
            }
    CHECK(any_brighter);
}

TEST_CASE("empty scene: masks all background, depth is backdrop or sentinel") {
    const AssetLibrary lib = spheres_library();
    Scene scene;
    scene.plate = PlateSpec{};
    const SceneGeometry geometry(scene, lib);

    PlateSpec plate;
    RigConfig rig;
    rig.image_width_px = rig.image_height_px = 64;
    Rng rng(1);
    const CameraPose cam = build_rig(plate, rig, rng)[3];
    const RenderBundle bundle = render_view(geometry, cam, LightSpec{}, {});
    CHECK(bundle.items.empty());
    CHECK(bundle.amodal.empty());
    int backdrop_pixels = 0;
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x) {
            CHECK(bundle.instance.at(x, y) == 0);
            CHECK(bundle.semantic.at(x, y) == 0);
            const float d = bundle.depth.at(x, y);
            CHECK((std::isinf(d) || (std::isfinite(d) && d > 0.0f)));
            if (std::isfinite(d)) ++backdrop_pixels;
        }
    CHECK(backdrop_pixels > 0);  // the plate fills part of the frame
}

TEST_CASE("fully occluded rear sphere: empty visible mask, non-empty amodal mask") {
    const AssetLibrary lib = spheres_library();
    Scene scene;
    scene.plate = PlateSpec{};
    scene.plating_mode = "procedural";
    const Vec3 front_c{0.0, 0.0, 0.10}, rear_c{0.20, 0.0, 0.10};
    const double front_r = 0.05, rear_r = 0.02;
    scene.items.push_back({lib.at_index(1).asset_id, Pose{front_c, Quat::identity()}});
    scene.items.push_back({lib.at_index(2).asset_id, Pose{rear_c, Quat::identity()}});
    const SceneGeometry geometry(scene, lib);
    const CameraPose cam = axis_camera(128);
    const CameraFrame frame = make_frame(cam);

    // analytic oracle: every rear-sphere ray is blocked by the front sphere
    for (int y = 0; y < 128; ++y)
        for (int x = 0; x < 128; ++x) {
            const Vec3 dir = frame.ray_dir(x, y);
            const double t_rear = ray_sphere_t(frame.origin, dir, rear_c, rear_r);
            if (!std::isfinite(t_rear)) continue;
            const double t_front = ray_sphere_t(frame.origin, dir, front_c, front_r);
            REQUIRE(std::isfinite(t_front));
            REQUIRE(t_front < t_rear);
        }

    const RenderBundle bundle = render_view(geometry, cam, LightSpec{}, {1.0, 1.0});
    REQUIRE(bundle.items.size() == 2);
    const ItemAnnotation& rear = bundle.items[1];
    CHECK(rear.visible_pixel_count == 0);
    CHECK_FALSE(rear.bbox2d.has_value());
    CHECK(rear.amodal_pixel_count > 0);

    uint64_t rear_visible = 0, rear_amodal = 0;
    for (int y = 0; y < 128; ++y)
        for (int x = 0; x < 128; ++x) {
            if (bundle.instance.at(x, y) == 2) ++rear_visible;
            if (bundle.amodal[1].at(x, y)) {
                ++rear_amodal;
                // tessellated sphere is inscribed: every amodal pixel is an
                // analytic rear-sphere hit too
                CHECK(std::isfinite(
                    ray_sphere_t(frame.origin, frame.ray_dir(x, y), rear_c, rear_r)));
            }
        }
    CHECK(rear_visible == 0);
    CHECK(rear_amodal == rear.amodal_pixel_count);
}

TEST_CASE("single item: amodal mask equals the visible instance mask") {
    const AssetLibrary lib = spheres_library();
    const Scene scene = one_sphere_scene(lib, {0.0, 0.0, 0.10});
    const SceneGeometry geometry(scene, lib);
    const RenderBundle bundle = render_view(geometry, axis_camera(96), LightSpec{}, {1.0});
    REQUIRE(bundle.amodal.size() == 1);
    for (int y = 0; y < 96; ++y)
        for (int x = 0; x < 96; ++x)
            CHECK((bundle.instance.at(x, y) == 1) == (bundle.amodal[0].at(x, y) == 1));
}

TEST_CASE("item behind the camera has an empty amodal mask") {
    const AssetLibrary lib = spheres_library();
    const Scene scene = one_sphere_scene(lib, {-0.80, 0.0, 0.10});  // behind the camera
    const SceneGeometry geometry(scene, lib);
    const auto masks = amodal_masks(geometry, axis_camera(64));
    REQUIRE(masks.size() == 1);
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x) CHECK(masks[0].at(x, y) == 0);
}

TEST_CASE("mask algebra on a crowded view: partition, consistency, containment, boxes") {
    const AssetLibrary lib = make_builtin_library();
    Scene scene;
    scene.plate = PlateSpec{};
    // pack items close together so some occlusion is guaranteed
    for (size_t i = 0; i < 4; ++i) {
        const FoodAsset& a = lib.at_index(i * 2);
        const Vec3 at{-0.03 + 0.02 * static_cast<double>(i), 0.0,
                      scene.plate.top_z_m - a.aabb_object.lo.z};
        scene.items.push_back({a.asset_id, Pose{at, Quat::identity()}});
    }
    const SceneGeometry geometry(scene, lib);

    RigConfig rig;
    rig.image_width_px = rig.image_height_px = 128;
    Rng rng(11);
    const auto poses = build_rig(PlateSpec{}, rig, rng);
    const RenderBundle bundle =
        render_view(geometry, poses[1], LightSpec{}, {1.0, 1.2, 1.4, 1.6});

    const auto legend = lib.semantic_legend();
    std::vector<uint64_t> visible_count(bundle.items.size() + 1, 0);
    for (int y = 0; y < 128; ++y)
        for (int x = 0; x < 128; ++x) {
            const uint16_t ins = bundle.instance.at(x, y);
            const uint16_t sem = bundle.semantic.at(x, y);
            CHECK((ins == 0) == (sem == 0));  // partition against background
            if (ins != 0) {
                REQUIRE(ins <= bundle.items.size());
                const ItemAnnotation& a = bundle.items[ins - 1];
                CHECK(sem == legend.at(a.semantic_class));   // class consistency
                CHECK(bundle.amodal[ins - 1].at(x, y) == 1); // visible within amodal
                REQUIRE(a.bbox2d.has_value());
                CHECK(x >= a.bbox2d->x_min);
                CHECK(x <= a.bbox2d->x_max);
                CHECK(y >= a.bbox2d->y_min);
                CHECK(y <= a.bbox2d->y_max);
                ++visible_count[ins];
            }
        }
    for (size_t i = 0; i < bundle.items.size(); ++i) {
        CHECK(bundle.items[i].visible_pixel_count == visible_count[i + 1]);
        CHECK(bundle.items[i].instance_id == static_cast<int>(i + 1));
        // every box edge is touched by at least one mask pixel
        if (bundle.items[i].bbox2d) {
            const Bbox2D& b = *bundle.items[i].bbox2d;
            bool left = false, right = false, top = false, bottom = false;
            for (int y = b.y_min; y <= b.y_max; ++y) {
                left = left || bundle.instance.at(b.x_min, y) == i + 1;
                right = right || bundle.instance.at(b.x_max, y) == i + 1;
            }
            for (int x = b.x_min; x <= b.x_max; ++x) {
                top = top || bundle.instance.at(x, b.y_min) == i + 1;
                bottom = bottom || bundle.instance.at(x, b.y_max) == i + 1;
            }
            CHECK(left);
            CHECK(right);
            CHECK(top);
            CHECK(bottom);
        }
    }
}

TEST_CASE("bbox2d_from_mask: point, empty, and a 1000-case scan oracle") {
    BinaryMask mask(64, 64, 0);
    mask.at(10, 20) = 1;
    auto box = bbox2d_from_mask(mask);
    REQUIRE(box.has_value());
    CHECK(box->x_min == 10);
    CHECK(box->y_min == 20);
    CHECK(box->x_max == 10);
    CHECK(box->y_max == 20);

    CHECK_FALSE(bbox2d_from_mask(BinaryMask(32, 32, 0)).has_value());

    Rng rng(505);
    for (int trial = 0; trial < 1000; ++trial) {
        BinaryMask m(64, 64, 0);
        const int set = static_cast<int>(rng.uniform_index(40));
        for (int i = 0; i < set; ++i)
            m.at(static_cast<int>(rng.uniform_index(64)),
                 static_cast<int>(rng.uniform_index(64))) = 1;

        // independent min/max scan
        int xmin = 64, ymin = 64, xmax = -1, ymax = -1;
        for (int y = 0; y < 64; ++y)
            for (int x = 0; x < 64; ++x)
                if (m.at(x, y)) {
                    xmin = std::min(xmin, x);
                    ymin = std::min(ymin, y);
                    xmax = std::max(xmax, x);
                    ymax = std::max(ymax, y);
                }

        const auto got = bbox2d_from_mask(m);
        if (xmax < 0) {
            CHECK_FALSE(got.has_value());
        } else {
            REQUIRE(got.has_value());
            CHECK(got->x_min == xmin);
            CHECK(got->y_min == ymin);
            CHECK(got->x_max == xmax);
            CHECK(got->y_max == ymax);
        }
    }
}

TEST_CASE("bbox3d_for_item: identity, translation, and rotated-corner oracle") {
    Aabb aabb;
    aabb.expand({-0.01, -0.02, 0.0});
    aabb.expand({0.03, 0.02, 0.05});

    const Bbox3D ident = bbox3d_for_item(aabb, Pose{});
    CHECK((ident.center - aabb.center()).norm() <= 1e-15);
    CHECK((ident.half_extents - aabb.extent() * 0.5).norm() <= 1e-15);
    CHECK(ident.orientation == Quat::identity());

    const Vec3 t{0.1, -0.2, 0.3};
    const Bbox3D moved = bbox3d_for_item(aabb, Pose{t, Quat::identity()});
    CHECK((moved.center - (aabb.center() + t)).norm() <= 1e-15);
    CHECK((moved.half_extents - ident.half_extents).norm() == 0.0);

    // 90-degree yaw: box corners must match the independently rotated corner set
    const Quat yaw = Quat::from_axis_angle({0, 0, 1}, kPi / 2.0);
    const Pose pose{{0.05, 0.06, 0.07}, yaw};
    const Bbox3D spun = bbox3d_for_item(aabb, pose);
    for (int corner = 0; corner < 8; ++corner) {
        const Vec3 sign{(corner & 1) ? 1.0 : -1.0, (corner & 2) ? 1.0 : -1.0,
                        (corner & 4) ? 1.0 : -1.0};
        const Vec3 object_corner =
            aabb.center() + Vec3{sign.x * aabb.extent().x, sign.y * aabb.extent().y,
                                 sign.z * aabb.extent().z} *
                                0.5;
        const Vec3 expected = pose.apply(object_corner);  // independent path
        const Vec3 got = spun.center + spun.orientation.rotate(
                                           Vec3{sign.x * spun.half_extents.x,
                                                sign.y * spun.half_extents.y,
                                                sign.z * spun.half_extents.z});
        CHECK((got - expected).norm() <= 1e-9);
    }
}

TEST_CASE("render_view validates brightness factors") {
    const AssetLibrary lib = spheres_library();
    const Scene scene = one_sphere_scene(lib, {0, 0, 0.10});
    const SceneGeometry geometry(scene, lib);
    const CameraPose cam = axis_camera(32);
    CHECK_THROWS_AS(render_view(geometry, cam, LightSpec{}, {}), Error);        // wrong count
    CHECK_THROWS_AS(render_view(geometry, cam, LightSpec{}, {0.5}), Error);     // below 1
    CHECK_THROWS_AS(render_view(geometry, cam, LightSpec{}, {2.5}), Error);     // above 2
}

TEST_CASE("rendering is bit-deterministic") {
    const AssetLibrary lib = make_builtin_library();
    Scene scene;
    scene.plate = PlateSpec{};
    for (size_t i = 0; i < 3; ++i) {
        const FoodAsset& a = lib.at_index(i);
        scene.items.push_back({a.asset_id, Pose{{0.02 * static_cast<double>(i), -0.01, 0.05},
                                                Quat::from_axis_angle({0, 0, 1}, 0.3 * i)}});
    }
    const SceneGeometry geometry(scene, lib);
    RigConfig rig;
    rig.image_width_px = rig.image_height_px = 80;
    Rng rng(77);
    const CameraPose cam = build_rig(PlateSpec{}, rig, rng)[7];
    const RenderBundle a = render_view(geometry, cam, LightSpec{}, {1.1, 1.5, 1.9});
    const RenderBundle b = render_view(geometry, cam, LightSpec{}, {1.1, 1.5, 1.9});
    CHECK(a.rgb == b.rgb);
    CHECK(a.depth == b.depth);
    CHECK(a.semantic == b.semantic);
    CHECK(a.instance == b.instance);
    REQUIRE(a.amodal.size() == b.amodal.size());
    for (size_t i = 0; i < a.amodal.size(); ++i) CHECK(a.amodal[i] == b.amodal[i]);
}

TEST_SUITE_END();
