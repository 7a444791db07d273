#pragma once

#include <vector>

#include "mealgen/math.hpp"
#include "mealgen/rng.hpp"
#include "mealgen/scene.hpp"

namespace mealgen {

// Pinhole camera: square pixels, principal point at the image center.
struct CameraPose {
    Vec3 position;
    Vec3 look_at;
    Vec3 up{0, 0, 1};
    double focal_length_mm = 35.0;
    double sensor_width_mm = 36.0;
    int image_width_px = 512;
    int image_height_px = 512;

    Vec3 forward() const { return (look_at - position).normalized(); }
};

struct RigConfig {
    int n_views = 12;
    double hemisphere_radius_m = 0.45;
    double min_elevation_rad = radians(15.0);
    double focal_min_mm = 24.0;
    double focal_max_mm = 50.0;
    double sensor_width_mm = 36.0;
    int image_width_px = 512;
    int image_height_px = 512;
};

void validate_rig_config(const RigConfig& config);

// Fibonacci lattice restricted to the upper hemisphere with an elevation
// floor: sin(phi_i) = s0 + (1 - s0) * (i + 0.5) / n with s0 = sin(min_elev),
// theta_i = 2*pi * i * (golden ratio conjugate). Points lie on the sphere of
// the given radius around `center`, all strictly above its equator plane.
std::vector<Vec3> fibonacci_hemisphere(int n, double radius, double min_elev_rad,
                                       const Vec3& center);

// n_views look-at poses around the plate center with per-camera focal length
// drawn uniformly from the configured range. Deterministic given the rng state.
std::vector<CameraPose> build_rig(const PlateSpec& plate, const RigConfig& config, Rng& rng);

// k distinct view indices in [0, n_total), uniform without replacement,
// returned sorted ascending.
std::vector<int> select_views(int n_total, int k, Rng& rng);

// Ray-generation basis derived from a CameraPose.
struct CameraFrame {
    Vec3 origin;
    Vec3 forward, right, up;
    double tan_half_fov_x = 0.0;
    double tan_half_fov_y = 0.0;
    int width = 0, height = 0;

    // Ray direction through the center of pixel (px, py); py grows downward.
    Vec3 ray_dir(int px, int py) const {
        const double u = (2.0 * (px + 0.5) / width - 1.0) * tan_half_fov_x;
        const double v = (1.0 - 2.0 * (py + 0.5) / height) * tan_half_fov_y;
        return (forward + right * u + up * v).normalized();
    }

    // Projects a world point to pixel coordinates; returns false when the
    // point lies on or behind the camera plane.
    bool project(const Vec3& p, double& px, double& py) const;
};

CameraFrame make_frame(const CameraPose& pose);

} // namespace mealgen
