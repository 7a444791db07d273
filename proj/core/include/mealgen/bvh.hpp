#pragma once

#include <vector>

#include "mealgen/math.hpp"
#include "mealgen/mesh.hpp"

namespace mealgen {

struct Ray {
    Vec3 origin;
    Vec3 dir;  // unit length
};

struct RayHit {
    bool hit = false;
    double t = 0.0;
    Vec3 normal;  // geometric, unit, not yet oriented toward the ray
    int triangle = -1;
};

// Binary AABB tree over a triangle mesh (object space). Median split on the
// longest centroid axis, small leaves; construction and traversal are fully
// deterministic so renders never depend on build order.
class Bvh {
public:
    Bvh() = default;
    explicit Bvh(const TriangleMesh& mesh);

    // Nearest intersection with t in (t_min, t_max).
    RayHit intersect(const Ray& ray, double t_min = 1e-9,
                     double t_max = std::numeric_limits<double>::infinity()) const;

    bool valid() const { return !nodes_.empty(); }
    const Aabb& bounds() const { return nodes_.front().box; }

private:
    struct Node {
        Aabb box;
        int left = -1;    // internal: children; leaf: left = -1
        int first = 0;    // leaf: range into tri_order_
        int count = 0;
    };

    struct Tri {
        Vec3 v0, e1, e2;  // precomputed for Moller-Trumbore
        Vec3 normal;      // unit geometric normal
        int index = 0;    // original triangle index
    };

    int build(std::vector<int>& order, const std::vector<Vec3>& centroids,
              const std::vector<Aabb>& boxes, int first, int count);

    std::vector<Node> nodes_;
    std::vector<Tri> tris_;
};

} // namespace mealgen
