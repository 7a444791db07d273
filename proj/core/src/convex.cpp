#include "mealgen/convex.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace mealgen {

namespace {

// Deterministic support: first index attaining the max wins.
size_t support_index(const std::vector<Vec3>& pts, const Vec3& dir) {
    size_t best = 0;
    double best_dot = pts[0].dot(dir);
    for (size_t i = 1; i < pts.size(); ++i) {
        double d = pts[i].dot(dir);
        if (d > best_dot) {
            best_dot = d;
            best = i;
        }
    }
    return best;
}

struct MinkowskiVertex {
    Vec3 w;  // a - b
    Vec3 a, b;
};

MinkowskiVertex minkowski_support(const std::vector<Vec3>& a, const std::vector<Vec3>& b,
                                  const Vec3& dir) {
    const Vec3& pa = a[support_index(a, dir)];
    const Vec3& pb = b[support_index(b, -dir)];
    return {pa - pb, pa, pb};
}

struct Simplex {
    std::array<MinkowskiVertex, 4> v;
    std::array<double, 4> bary{};
    int n = 0;

    bool contains_vertex(const Vec3& w) const {
        for (int i = 0; i < n; ++i)
            if ((v[i].w - w).norm2() < 1e-28) return true;
        return false;
    }
};

// Closest point to the origin on the current simplex. Reduces the simplex to
// the minimal feature supporting that point and fills barycentric weights.
// Returns the closest point; sets `enclosed` when a tetrahedron contains the
// origin. Case analysis after Ericson, Real-Time Collision Detection.
Vec3 simplex_closest(Simplex& s, bool& enclosed) {
    enclosed = false;
    switch (s.n) {
    case 1:
        s.bary = {1, 0, 0, 0};
        return s.v[0].w;
    case 2: {
        const Vec3 A = s.v[0].w, B = s.v[1].w;
        const Vec3 ab = B - A;
        double t = -A.dot(ab);
        double dd = ab.norm2();
        if (t <= 0.0 || dd <= 0.0) {
            s.n = 1;
            s.bary = {1, 0, 0, 0};
            return A;
        }
        if (t >= dd) {
            s.v[0] = s.v[1];
            s.n = 1;
            s.bary = {1, 0, 0, 0};
            return s.v[0].w;
        }
        t /= dd;
        s.bary = {1.0 - t, t, 0, 0};
        return A + ab * t;
    }
    case 3: {
        const Vec3 A = s.v[0].w, B = s.v[1].w, C = s.v[2].w;
        const Vec3 ab = B - A, ac = C - A, ap = -A;
        double d1 = ab.dot(ap), d2 = ac.dot(ap);
        if (d1 <= 0.0 && d2 <= 0.0) {  // vertex A
            s.n = 1;
            s.bary = {1, 0, 0, 0};
            return A;
        }
        const Vec3 bp = -B;
        double d3 = ab.dot(bp), d4 = ac.dot(bp);
        if (d3 >= 0.0 && d4 <= d3) {  // vertex B
            s.v[0] = s.v[1];
            s.n = 1;
            s.bary = {1, 0, 0, 0};
            return s.v[0].w;
        }
        double vc = d1 * d4 - d3 * d2;
        if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {  // edge AB
            double t = d1 / (d1 - d3);
            s.n = 2;
            s.bary = {1.0 - t, t, 0, 0};
            return A + ab * t;
        }
        const Vec3 cp = -C;
        double d5 = ab.dot(cp), d6 = ac.dot(cp);
        if (d6 >= 0.0 && d5 <= d6) {  // vertex C
            s.v[0] = s.v[2];
            s.n = 1;
            s.bary = {1, 0, 0, 0};
            return s.v[0].w;
        }
        double vb = d5 * d2 - d1 * d6;
        if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {  // edge AC
            double t = d2 / (d2 - d6);
            s.v[1] = s.v[2];
            s.n = 2;
            s.bary = {1.0 - t, t, 0, 0};
            return A + ac * t;
        }
        double va = d3 * d6 - d5 * d4;
        if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {  // edge BC
            double t = (d4 - d3) / ((d4 - d3) + (d5 - d6));
            s.v[0] = s.v[1];
            s.v[1] = s.v[2];
            s.n = 2;
            s.bary = {1.0 - t, t, 0, 0};
            return s.v[0].w + (s.v[1].w - s.v[0].w) * t;
        }
        // interior
        double denom = va + vb + vc;
        double u = va / denom, v = vb / denom, w = vc / denom;
        s.bary = {u, v, w, 0};
        return A * u + B * v + C * w;
    }
    default: {  // tetrahedron
        // Test origin against the four faces; keep the face (or feature) with
        // the smallest distance. If no face sees the origin, it is enclosed.
        static const int faces[4][3] = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};
        double best = std::numeric_limits<double>::infinity();
        Simplex best_simplex;
        Vec3 best_point;
        bool outside_any = false;

        const Vec3 A = s.v[0].w, B = s.v[1].w, C = s.v[2].w, D = s.v[3].w;
        auto point_outside = [&](const Vec3& n, const Vec3& p0, const Vec3& other) {
            double side = n.dot(-(p0));
            double ref = n.dot(other - p0);
            return side * ref < 0.0 || (ref == 0.0 && side != 0.0);
        };
        const Vec3 verts[4] = {A, B, C, D};
        for (const auto& f : faces) {
            const Vec3 p0 = verts[f[0]], p1 = verts[f[1]], p2 = verts[f[2]];
            const Vec3 n = (p1 - p0).cross(p2 - p0);
            int opp = 6 - (f[0] + f[1] + f[2]);
            if (!point_outside(n, p0, verts[opp])) continue;
            outside_any = true;
            Simplex sub;
            sub.n = 3;
            sub.v[0] = s.v[f[0]];
            sub.v[1] = s.v[f[1]];
            sub.v[2] = s.v[f[2]];
            bool sub_enc = false;
            Vec3 p = simplex_closest(sub, sub_enc);
            double d2 = p.norm2();
            if (d2 < best) {
                best = d2;
                best_simplex = sub;
                best_point = p;
            }
        }
        if (!outside_any) {
            enclosed = true;
            s.bary = {0.25, 0.25, 0.25, 0.25};
            return {0, 0, 0};
        }
        s = best_simplex;
        return best_point;
    }
    }
}

} // namespace

DistanceResult gjk_distance(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
    DistanceResult res;
    Vec3 dir{1, 0, 0};
    Simplex s;
    s.v[0] = minkowski_support(a, b, dir);
    s.n = 1;

    constexpr int kMaxIter = 128;
    constexpr double kRelTol = 1e-12;
    constexpr double kAbsTol2 = 1e-24;

    Vec3 closest = s.v[0].w;
    for (int iter = 0; iter < kMaxIter; ++iter) {
        bool enclosed = false;
        closest = simplex_closest(s, enclosed);
        double dist2 = closest.norm2();
        if (enclosed || dist2 < kAbsTol2) {
            res.intersecting = true;
            res.distance = 0.0;
            return res;
        }
        dir = -closest;
        MinkowskiVertex w = minkowski_support(a, b, dir);
        // no simplex vertex may repeat, and the support must make progress
        if (s.contains_vertex(w.w)) break;
        double progress = dist2 + dir.dot(w.w);  // |v|^2 - v.w
        if (progress <= kRelTol * dist2 + kAbsTol2) break;
        s.v[s.n++] = w;
    }

    res.distance = closest.norm();
    res.witness_a = {0, 0, 0};
    res.witness_b = {0, 0, 0};
    for (int i = 0; i < s.n; ++i) {
        res.witness_a += s.v[i].a * s.bary[i];
        res.witness_b += s.v[i].b * s.bary[i];
    }
    return res;
}

namespace {

struct EpaFace {
    int v0, v1, v2;
    Vec3 normal;    // unit, outward (away from the polytope interior)
    double dist;    // plane distance to origin along the outward normal
    bool alive = true;
};

// Face orientation comes from the vertex winding alone. Flipping by the sign
// of the plane-to-origin distance is unstable for faces whose plane passes
// near the origin and corrupts the polytope, so windings must be kept
// consistent by the caller (seed faces are wound outward once; stitched
// faces inherit the winding of the horizon edges).
bool make_face(const std::vector<MinkowskiVertex>& verts, int a, int b, int c, EpaFace& f) {
    const Vec3 A = verts[a].w, B = verts[b].w, C = verts[c].w;
    Vec3 n = (B - A).cross(C - A);
    double len = n.norm();
    if (len < 1e-18) return false;
    n = n / len;
    f = {a, b, c, n, n.dot(A), true};
    return true;
}

} // namespace

PenetrationResult epa_penetration(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
    PenetrationResult out;

    // Seed polytope: supports along +-x, +-y, +-z, deduplicated, then pick a
    // non-degenerate tetrahedron.
    std::vector<MinkowskiVertex> verts;
    const Vec3 seeds[6] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
    for (const auto& d : seeds) {
        MinkowskiVertex v = minkowski_support(a, b, d);
        bool dup = false;
        for (const auto& u : verts)
            if ((u.w - v.w).norm2() < 1e-24) dup = true;
        if (!dup) verts.push_back(v);
    }
    if (verts.size() < 4) {
        // Hulls overlap in a near-degenerate configuration; report a minimal
        // push along the axis with the largest seed spread.
        out.ok = false;
        return out;
    }

    // Choose 4 vertices forming a tetra with nonzero volume.
    int i0 = 0, i1 = -1, i2 = -1, i3 = -1;
    for (size_t i = 1; i < verts.size() && i3 < 0; ++i) {
        if (i1 < 0) {
            if ((verts[i].w - verts[i0].w).norm2() > 1e-20) i1 = static_cast<int>(i);
            continue;
        }
        if (i2 < 0) {
            Vec3 c = (verts[i1].w - verts[i0].w).cross(verts[i].w - verts[i0].w);
            if (c.norm2() > 1e-24) i2 = static_cast<int>(i);
            continue;
        }
        Vec3 n = (verts[i1].w - verts[i0].w).cross(verts[i2].w - verts[i0].w);
        if (std::abs(n.dot(verts[i].w - verts[i0].w)) > 1e-18) i3 = static_cast<int>(i);
    }
    if (i3 < 0) {
        out.ok = false;
        return out;
    }
    std::vector<MinkowskiVertex> poly = {verts[i0], verts[i1], verts[i2], verts[i3]};

    // Seed faces wound outward from the tetra centroid; every face stitched
    // later inherits its winding from the horizon, so normals stay outward
    // without any sign fix-ups.
    const Vec3 c0 = (poly[0].w + poly[1].w + poly[2].w + poly[3].w) * 0.25;
    std::vector<EpaFace> faces;
    auto add_seed_face = [&](int x, int y, int z) {
        EpaFace f;
        if (!make_face(poly, x, y, z, f)) return false;
        if (f.normal.dot(poly[x].w - c0) < 0.0 && !make_face(poly, x, z, y, f)) return false;
        faces.push_back(f);
        return true;
    };
    if (!add_seed_face(0, 1, 2) || !add_seed_face(0, 3, 1) || !add_seed_face(0, 2, 3) ||
        !add_seed_face(1, 3, 2)) {
        out.ok = false;
        return out;
    }

    auto finish = [&](const EpaFace& f) {
        // Project the origin onto the face plane, get barycentrics.
        const Vec3 A = poly[f.v0].w, B = poly[f.v1].w, C = poly[f.v2].w;
        const Vec3 p = f.normal * f.dist;
        Vec3 v0 = B - A, v1 = C - A, v2 = p - A;
        double d00 = v0.dot(v0), d01 = v0.dot(v1), d11 = v1.dot(v1);
        double d20 = v2.dot(v0), d21 = v2.dot(v1);
        double denom = d00 * d11 - d01 * d01;
        double bv = 0.0, bw = 0.0;
        if (std::abs(denom) > 1e-24) {
            bv = (d11 * d20 - d01 * d21) / denom;
            bw = (d00 * d21 - d01 * d20) / denom;
        }
        double bu = 1.0 - bv - bw;
        Vec3 wa = poly[f.v0].a * bu + poly[f.v1].a * bv + poly[f.v2].a * bw;
        Vec3 wb = poly[f.v0].b * bu + poly[f.v1].b * bv + poly[f.v2].b * bw;
        out.ok = true;
        out.normal = f.normal;
        out.depth = std::max(f.dist, 0.0);
        out.contact_point = (wa + wb) * 0.5;
        return out;
    };

    constexpr int kMaxIter = 48;
    constexpr size_t kMaxFaces = 512;
    constexpr double kTol = 1e-9;
    for (int iter = 0; iter < kMaxIter; ++iter) {
        // nearest alive face
        int best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < faces.size(); ++i) {
            if (faces[i].alive && faces[i].dist < best_d) {
                best_d = faces[i].dist;
                best = static_cast<int>(i);
            }
        }
        if (best < 0) break;
        const EpaFace f = faces[best];

        MinkowskiVertex w = minkowski_support(a, b, f.normal);
        const double growth = f.normal.dot(w.w) - f.dist;
        if (growth < kTol || iter == kMaxIter - 1 || faces.size() > kMaxFaces)
            return finish(f);
        // A repeated support vertex cannot expand the polytope.
        if ((w.w - poly[f.v0].w).norm2() < 1e-24 || (w.w - poly[f.v1].w).norm2() < 1e-24 ||
            (w.w - poly[f.v2].w).norm2() < 1e-24)
            return finish(f);

        // expand: remove faces visible from w, stitch the horizon
        int wi = static_cast<int>(poly.size());
        poly.push_back(w);
        std::vector<std::pair<int, int>> horizon;
        for (auto& face : faces) {
            if (!face.alive) continue;
            if (face.normal.dot(w.w - poly[face.v0].w) > 0.0) {
                face.alive = false;
                auto toggle = [&horizon](int x, int y) {
                    for (size_t i = 0; i < horizon.size(); ++i) {
                        if (horizon[i].first == y && horizon[i].second == x) {
                            horizon.erase(horizon.begin() + static_cast<long>(i));
                            return;
                        }
                    }
                    horizon.emplace_back(x, y);
                };
                toggle(face.v0, face.v1);
                toggle(face.v1, face.v2);
                toggle(face.v2, face.v0);
            }
        }
        if (horizon.empty()) return finish(f);
        for (const auto& e : horizon) {
            EpaFace nf;
            // A degenerate sliver would punch a hole in the polytope; stop
            // with the best face found so far instead.
            if (!make_face(poly, e.first, e.second, wi, nf)) return finish(f);
            faces.push_back(nf);
        }
    }

    out.ok = false;
    return out;
}

double point_hull_distance(const Vec3& p, const std::vector<Vec3>& hull) {
    const std::vector<Vec3> single = {p};
    return gjk_distance(single, hull).distance;
}

} // namespace mealgen
