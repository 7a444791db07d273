#include "mealgen/camera.hpp"

#include <algorithm>
#include <cmath>

#include "mealgen/error.hpp"

namespace mealgen {

void validate_rig_config(const RigConfig& c) {
    if (c.n_views < 1) throw validation_error("n_views must be >= 1", "n_views");
    if (!(c.hemisphere_radius_m > 0.0))
        throw validation_error("hemisphere_radius_m must be > 0", "hemisphere_radius_m");
    if (!(c.min_elevation_rad >= 0.0 && c.min_elevation_rad < kPi / 2.0))
        throw validation_error("min_elevation_rad must be in [0, pi/2)", "min_elevation_rad");
    if (!(c.focal_min_mm > 0.0 && c.focal_min_mm <= c.focal_max_mm))
        throw validation_error("focal range must satisfy 0 < f_min <= f_max", "focal_min_mm");
    if (!(c.sensor_width_mm > 0.0))
        throw validation_error("sensor_width_mm must be > 0", "sensor_width_mm");
    if (c.image_width_px < 1 || c.image_height_px < 1)
        throw validation_error("image resolution must be >= 1 px", "image_width_px");
}

std::vector<Vec3> fibonacci_hemisphere(int n, double radius, double min_elev_rad,
                                       const Vec3& center) {
    // (sqrt(5) - 1) / 2: fractional rotation per step of the spiral
    const double golden_conj = (std::sqrt(5.0) - 1.0) / 2.0;
    const double s0 = std::sin(min_elev_rad);

    std::vector<Vec3> points;
    points.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double s = s0 + (1.0 - s0) * (i + 0.5) / n;  // sin(elevation)
        const double c = std::sqrt(std::max(0.0, 1.0 - s * s));
        const double theta = 2.0 * kPi * i * golden_conj;
        points.push_back(center + Vec3{radius * c * std::cos(theta),
                                       radius * c * std::sin(theta), radius * s});
    }
    return points;
}

std::vector<CameraPose> build_rig(const PlateSpec& plate, const RigConfig& config, Rng& rng) {
    validate_rig_config(config);

    const std::vector<Vec3> positions = fibonacci_hemisphere(
        config.n_views, config.hemisphere_radius_m, config.min_elevation_rad, plate.center);

    std::vector<CameraPose> rig;
    rig.reserve(positions.size());
    for (const Vec3& pos : positions) {
        CameraPose cam;
        cam.position = pos;
        cam.look_at = plate.center;
        const Vec3 fwd = cam.forward();
        Vec3 up = Vec3{0, 0, 1} - fwd * fwd.z;  // world-up minus its view-axis part
        if (up.norm2() < 1e-12)
            up = {0, 1, 0};  // camera at the zenith: fixed fallback
        cam.up = up.normalized();
        cam.focal_length_mm = rng.uniform(config.focal_min_mm, config.focal_max_mm);
        cam.sensor_width_mm = config.sensor_width_mm;
        cam.image_width_px = config.image_width_px;
        cam.image_height_px = config.image_height_px;
        rig.push_back(cam);
    }
    return rig;
}

std::vector<int> select_views(int n_total, int k, Rng& rng) {
    if (k < 0 || n_total < 0 || k > n_total) {
        Error e(Error::Kind::Range, "cannot select " + std::to_string(k) + " views out of " +
                                        std::to_string(n_total));
        throw e;
    }
    std::vector<size_t> drawn =
        rng.sample_without_replacement(static_cast<size_t>(n_total), static_cast<size_t>(k));
    std::vector<int> out(drawn.begin(), drawn.end());
    std::sort(out.begin(), out.end());
    return out;
}

CameraFrame make_frame(const CameraPose& pose) {
    CameraFrame f;
    f.origin = pose.position;
    f.forward = pose.forward();
    f.right = f.forward.cross(pose.up).normalized();
    f.up = f.right.cross(f.forward);
    f.width = pose.image_width_px;
    f.height = pose.image_height_px;
    f.tan_half_fov_x = pose.sensor_width_mm / (2.0 * pose.focal_length_mm);
    f.tan_half_fov_y = f.tan_half_fov_x * pose.image_height_px / pose.image_width_px;
    return f;
}

bool CameraFrame::project(const Vec3& p, double& px, double& py) const {
    const Vec3 d = p - origin;
    const double z = d.dot(forward);
    if (z <= 1e-12) return false;
    const double u = d.dot(right) / (z * tan_half_fov_x);
    const double v = d.dot(up) / (z * tan_half_fov_y);
    px = (u + 1.0) * 0.5 * width - 0.5;
    py = (1.0 - v) * 0.5 * height - 0.5;
    return true;
}

} // namespace mealgen
