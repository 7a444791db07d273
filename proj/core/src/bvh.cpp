#include "mealgen/bvh.hpp"

#include <algorithm>
#include <cmath>

namespace mealgen {

namespace {

constexpr int kLeafSize = 4;

bool slab_hit(const Aabb& box, const Ray& ray, const Vec3& inv_dir, double t_max) {
    double t0 = 1e-12, t1 = t_max;
    for (int a = 0; a < 3; ++a) {
        const double lo = (box.lo[a] - ray.origin[a]) * inv_dir[a];
        const double hi = (box.hi[a] - ray.origin[a]) * inv_dir[a];
        t0 = std::max(t0, std::min(lo, hi));
        t1 = std::min(t1, std::max(lo, hi));
        if (t0 > t1) return false;
    }
    return true;
}

} // namespace

Bvh::Bvh(const TriangleMesh& mesh) {
    const size_t n = mesh.triangles.size();
    if (n == 0) return;

    std::vector<Aabb> boxes(n);
    std::vector<Vec3> centroids(n);
    std::vector<int> order(n);
    for (size_t i = 0; i < n; ++i) {
        const auto& t = mesh.triangles[i];
        const Vec3& a = mesh.positions[t[0]];
        const Vec3& b = mesh.positions[t[1]];
        const Vec3& c = mesh.positions[t[2]];
        Aabb box;
        box.expand(a);
        box.expand(b);
        box.expand(c);
        boxes[i] = box;
        centroids[i] = (a + b + c) * (1.0 / 3.0);
        order[i] = static_cast<int>(i);
    }

    nodes_.reserve(2 * n);
    build(order, centroids, boxes, 0, static_cast<int>(n));

    tris_.reserve(n);
    for (int idx : order) {
        const auto& t = mesh.triangles[idx];
        Tri tri;
        tri.v0 = mesh.positions[t[0]];
        tri.e1 = mesh.positions[t[1]] - tri.v0;
        tri.e2 = mesh.positions[t[2]] - tri.v0;
        Vec3 nrm = tri.e1.cross(tri.e2);
        const double len = nrm.norm();
        tri.normal = len > 0.0 ? nrm * (1.0 / len) : Vec3{0, 0, 1};
        tri.index = idx;
        tris_.push_back(tri);
    }
}

int Bvh::build(std::vector<int>& order, const std::vector<Vec3>& centroids,
               const std::vector<Aabb>& boxes, int first, int count) {
    const int node_index = static_cast<int>(nodes_.size());
    nodes_.push_back({});

    Aabb box;
    for (int i = first; i < first + count; ++i) box.expand(boxes[order[i]].lo), box.expand(boxes[order[i]].hi);
    nodes_[node_index].box = box;

    if (count <= kLeafSize) {
        nodes_[node_index].first = first;
        nodes_[node_index].count = count;
        return node_index;
    }

    Aabb cbox;
    for (int i = first; i < first + count; ++i) cbox.expand(centroids[order[i]]);
    const Vec3 ext = cbox.extent();
    int axis = 0;
    if (ext.y > ext.x) axis = 1;
    if (ext.z > ext[axis]) axis = 2;

    const int mid = first + count / 2;
    std::nth_element(order.begin() + first, order.begin() + mid, order.begin() + first + count,
                     [&](int a, int b) {
                         if (centroids[a][axis] != centroids[b][axis])
                             return centroids[a][axis] < centroids[b][axis];
                         return a < b;  // total order keeps the build deterministic
                     });

    const int left = build(order, centroids, boxes, first, mid - first);
    const int right = build(order, centroids, boxes, mid, first + count - mid);
    nodes_[node_index].left = left;
    nodes_[node_index].count = 0;
    nodes_[node_index].first = right;  // reuse: right child index for internals
    return node_index;
}

RayHit Bvh::intersect(const Ray& ray, double t_min, double t_max) const {
    RayHit best;
    if (nodes_.empty()) return best;

    const Vec3 inv_dir{1.0 / ray.dir.x, 1.0 / ray.dir.y, 1.0 / ray.dir.z};
    double closest = t_max;

    int stack[64];
    int sp = 0;
    stack[sp++] = 0;
    while (sp > 0) {
        const Node& node = nodes_[stack[--sp]];
        if (!slab_hit(node.box, ray, inv_dir, closest)) continue;
        if (node.count > 0) {
            for (int i = node.first; i < node.first + node.count; ++i) {
                const Tri& tri = tris_[i];
                const Vec3 p = ray.dir.cross(tri.e2);
                const double det = tri.e1.dot(p);
                if (std::abs(det) < 1e-14) continue;
                const double inv_det = 1.0 / det;
                const Vec3 tv = ray.origin - tri.v0;
                const double u = tv.dot(p) * inv_det;
                if (u < 0.0 || u > 1.0) continue;
                const Vec3 q = tv.cross(tri.e1);
                const double v = ray.dir.dot(q) * inv_det;
                if (v < 0.0 || u + v > 1.0) continue;
                const double t = tri.e2.dot(q) * inv_det;
                if (t > t_min && t < closest) {
                    closest = t;
                    best.hit = true;
                    best.t = t;
                    best.normal = tri.normal;
                    best.triangle = tri.index;
                }
            }
        } else {
            stack[sp++] = node.first;  // right
            stack[sp++] = node.left;
        }
    }
    return best;
}

} // namespace mealgen
