#include "mealgen/asset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mealgen/error.hpp"
#include "mealgen/obj_io.hpp"

namespace mealgen {

using nlohmann::json;

void validate_nutrition(const NutritionFacts& n) {
    struct { const char* name; double value; } fields[] = {
        {"mass_g", n.mass_g},
        {"calories_kcal", n.calories_kcal},
        {"carbs_g", n.carbs_g},
        {"fat_g", n.fat_g},
        {"protein_g", n.protein_g},
    };
    for (const auto& f : fields) {
        if (!std::isfinite(f.value))
            throw validation_error(std::string("nutrition field '") + f.name + "' is not finite", f.name);
        if (f.value < 0.0)
            throw validation_error(std::string("nutrition field '") + f.name + "' is negative", f.name);
    }
}

namespace {

std::vector<Vec3> dedup_vertices(const TriangleMesh& mesh) {
    std::vector<Vec3> hull = mesh.positions;
    std::sort(hull.begin(), hull.end(), [](const Vec3& a, const Vec3& b) {
        if (a.x != b.x) return a.x < b.x;
        if (a.y != b.y) return a.y < b.y;
        return a.z < b.z;
    });
    hull.erase(std::unique(hull.begin(), hull.end()), hull.end());
    return hull;
}

// Contact resolution cost scales with hull size, so high-resolution meshes
// are reduced to their support vertices along a fixed direction set. The
// result is a subset of mesh vertices (hence inside the true hull); the
// support error is bounded by the angular spacing of the directions, well
// under a millimeter for plate-scale items.
std::vector<Vec3> decimate_hull(const std::vector<Vec3>& pts, size_t max_vertices) {
    if (pts.size() <= max_vertices) return pts;

    std::vector<Vec3> dirs;
    dirs.reserve(96 + 6);
    const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int i = 0; i < 96; ++i) {
        const double z = 1.0 - 2.0 * (i + 0.5) / 96.0;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double t = 2.0 * kPi * golden * i;
        dirs.push_back({r * std::cos(t), r * std::sin(t), z});
    }
    for (double s : {1.0, -1.0}) {
        dirs.push_back({s, 0, 0});
        dirs.push_back({0, s, 0});
        dirs.push_back({0, 0, s});
    }

    std::vector<char> keep(pts.size(), 0);
    for (const Vec3& d : dirs) {
        size_t best = 0;
        double best_dot = pts[0].dot(d);
        for (size_t i = 1; i < pts.size(); ++i) {
            const double v = pts[i].dot(d);
            if (v > best_dot) {
                best_dot = v;
                best = i;
            }
        }
        keep[best] = 1;
    }
    std::vector<Vec3> out;
    for (size_t i = 0; i < pts.size(); ++i)
        if (keep[i]) out.push_back(pts[i]);
    return out;
}

void finalize_geometry(FoodAsset& asset) {
    asset.aabb_object = compute_aabb(asset.mesh);
    asset.collision_hull = decimate_hull(dedup_vertices(asset.mesh), 80);
}

} // namespace

void validate_asset(const FoodAsset& asset) {
    if (asset.mesh.triangles.empty())
        throw validation_error("asset '" + asset.asset_id + "': mesh has no triangles");
    if (asset.semantic_class.empty())
        throw validation_error("asset '" + asset.asset_id + "': semantic_class is empty", "semantic_class");
    for (const auto& p : asset.mesh.positions)
        if (!p.finite())
            throw validation_error("asset '" + asset.asset_id + "': non-finite mesh vertex");
    for (const auto& t : asset.mesh.triangles)
        for (uint32_t i : t)
            if (i >= asset.mesh.positions.size())
                throw validation_error("asset '" + asset.asset_id + "': triangle index out of range");
    for (const auto& p : asset.mesh.positions)
        if (!asset.aabb_object.contains(p, 1e-9))
            throw validation_error("asset '" + asset.asset_id + "': aabb does not contain all vertices");
    for (int c = 0; c < 3; ++c) {
        double v = asset.albedo[c];
        if (!(v >= 0.0 && v <= 1.0))
            throw validation_error("asset '" + asset.asset_id + "': albedo outside [0,1]", "albedo");
    }
    validate_nutrition(asset.nutrition);
}

void AssetLibrary::add(FoodAsset asset) {
    validate_asset(asset);
    if (index_.count(asset.asset_id))
        throw validation_error("duplicate asset_id '" + asset.asset_id + "'", "asset_id");
    index_[asset.asset_id] = assets_.size();
    class_index_[asset.semantic_class].push_back(asset.asset_id);
    assets_.push_back(std::move(asset));
}

const FoodAsset& AssetLibrary::at(const std::string& asset_id) const {
    auto it = index_.find(asset_id);
    if (it == index_.end()) {
        Error e(Error::Kind::Lookup, "unknown asset_id '" + asset_id + "'");
        e.field = asset_id;
        throw e;
    }
    return assets_[it->second];
}

std::vector<std::string> AssetLibrary::class_names() const {
    std::vector<std::string> names;
    names.reserve(class_index_.size());
    for (const auto& [name, ids] : class_index_) names.push_back(name);
    return names;  // std::map keeps them sorted
}

std::map<std::string, uint16_t> AssetLibrary::semantic_legend() const {
    std::map<std::string, uint16_t> legend;
    uint16_t next = 1;  // 0 = background
    for (const auto& name : class_names()) legend[name] = next++;
    return legend;
}

namespace {

double require_number(const json& j, const char* field, const std::string& ctx) {
    if (!j.contains(field))
        throw validation_error(ctx + ": missing field '" + field + "'", field);
    if (!j.at(field).is_number())
        throw validation_error(ctx + ": field '" + field + "' is not a number", field);
    return j.at(field).get<double>();
}

std::string require_string(const json& j, const char* field, const std::string& ctx) {
    if (!j.contains(field) || !j.at(field).is_string())
        throw validation_error(ctx + ": missing string field '" + field + "'", field);
    return j.at(field).get<std::string>();
}

void warn_unknown_keys(const json& j, const std::set<std::string>& known, const std::string& ctx) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!known.count(it.key()))
            std::cerr << "warning: " << ctx << ": ignoring unknown field '" << it.key() << "'\n";
    }
}

} // namespace

FoodAsset load_asset(const std::filesystem::path& mesh_file,
                     const std::filesystem::path& metadata_file) {
    FoodAsset asset;
    asset.mesh = load_obj(mesh_file);
    if (asset.mesh.triangles.empty()) {
        Error e = validation_error("mesh has no triangles: " + mesh_file.string());
        e.path = mesh_file.string();
        throw e;
    }

    std::ifstream in(metadata_file, std::ios::binary);
    if (!in) {
        Error e(Error::Kind::Io, "cannot open metadata file: " + metadata_file.string());
        e.path = metadata_file.string();
        throw e;
    }
    json meta;
    try {
        meta = json::parse(in);
    } catch (const json::parse_error& pe) {
        Error e = parse_error(std::string("metadata JSON: ") + pe.what());
        e.path = metadata_file.string();
        throw e;
    }
    const std::string ctx = metadata_file.string();
    if (!meta.is_object()) throw parse_error(ctx + ": metadata root must be an object");

    warn_unknown_keys(meta, {"asset_id", "display_name", "semantic_class", "albedo", "scale", "nutrition"}, ctx);

    asset.asset_id = require_string(meta, "asset_id", ctx);
    asset.display_name = meta.value("display_name", asset.asset_id);
    asset.semantic_class = require_string(meta, "semantic_class", ctx);

    if (!meta.contains("albedo") || !meta.at("albedo").is_array() || meta.at("albedo").size() != 3)
        throw validation_error(ctx + ": 'albedo' must be an [r,g,b] array", "albedo");
    for (int c = 0; c < 3; ++c) {
        double v = meta.at("albedo").at(c).get<double>();
        (c == 0 ? asset.albedo.x : c == 1 ? asset.albedo.y : asset.albedo.z) = v;
    }

    if (meta.contains("scale")) {
        double s = meta.at("scale").get<double>();
        if (!(std::isfinite(s) && s > 0.0))
            throw validation_error(ctx + ": 'scale' must be positive and finite", "scale");
        for (auto& p : asset.mesh.positions) p *= s;
    }

    if (!meta.contains("nutrition") || !meta.at("nutrition").is_object())
        throw validation_error(ctx + ": missing 'nutrition' object", "nutrition");
    const json& n = meta.at("nutrition");
    warn_unknown_keys(n, {"mass_g", "calories_kcal", "carbs_g", "fat_g", "protein_g"}, ctx + " nutrition");
    asset.nutrition.mass_g = require_number(n, "mass_g", ctx);
    asset.nutrition.calories_kcal = require_number(n, "calories_kcal", ctx);
    asset.nutrition.carbs_g = require_number(n, "carbs_g", ctx);
    asset.nutrition.fat_g = require_number(n, "fat_g", ctx);
    asset.nutrition.protein_g = require_number(n, "protein_g", ctx);

    finalize_geometry(asset);
    validate_asset(asset);
    return asset;
}

AssetLibrary load_library(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) {
        Error e(Error::Kind::Config, "asset library directory not found: " + dir.string());
        e.path = dir.string();
        throw e;
    }
    std::vector<fs::path> subdirs;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_directory()) subdirs.push_back(entry.path());
    std::sort(subdirs.begin(), subdirs.end());

    AssetLibrary lib;
    for (const auto& sub : subdirs) {
        fs::path mesh = sub / "mesh.obj";
        fs::path meta = sub / "meta.json";
        if (!fs::exists(mesh) || !fs::exists(meta)) continue;  // not an asset dir
        lib.add(load_asset(mesh, meta));
    }
    if (lib.empty()) {
        Error e(Error::Kind::Config, "no assets found under " + dir.string());
        e.path = dir.string();
        throw e;
    }
    return lib;
}

namespace {

Vec3 albedo_from_seed(uint64_t seed) {
    uint64_t s = seed;
    // hue anywhere, saturation/value kept in a food-plausible band
    double h = static_cast<double>(splitmix64(s) >> 11) * 0x1.0p-53;
    double sat = 0.45 + 0.45 * (static_cast<double>(splitmix64(s) >> 11) * 0x1.0p-53);
    double val = 0.55 + 0.40 * (static_cast<double>(splitmix64(s) >> 11) * 0x1.0p-53);
    double r, g, b;
    double i = std::floor(h * 6.0);
    double f = h * 6.0 - i;
    double p = val * (1.0 - sat);
    double q = val * (1.0 - f * sat);
    double t = val * (1.0 - (1.0 - f) * sat);
    switch (static_cast<int>(i) % 6) {
    case 0: r = val; g = t; b = p; break;
    case 1: r = q; g = val; b = p; break;
    case 2: r = p; g = val; b = t; break;
    case 3: r = p; g = q; b = val; break;
    case 4: r = t; g = p; b = val; break;
    default: r = val; g = p; b = q; break;
    }
    return {r, g, b};
}

const char* kind_name(PrimitiveKind k) {
    switch (k) {
    case PrimitiveKind::Sphere: return "sphere";
    case PrimitiveKind::Box: return "box";
    case PrimitiveKind::Ellipsoid: return "ellipsoid";
    case PrimitiveKind::Cylinder: return "cylinder";
    }
    return "?";
}

} // namespace

FoodAsset make_primitive_asset(PrimitiveKind kind, const Vec3& size_m,
                               const std::string& semantic_class,
                               const NutritionFacts& nutrition, uint64_t seed) {
    if (!(size_m.x > 0 && size_m.y > 0 && size_m.z > 0))
        throw validation_error("primitive extents must be positive", "size_m");

    FoodAsset asset;
    switch (kind) {
    case PrimitiveKind::Sphere:
        if (size_m.x != size_m.y || size_m.x != size_m.z)
            throw validation_error("sphere extents must be equal", "size_m");
        asset.mesh = make_uv_sphere(size_m.x / 2.0);
        break;
    case PrimitiveKind::Box:
        asset.mesh = make_box(size_m);
        break;
    case PrimitiveKind::Ellipsoid:
        asset.mesh = make_ellipsoid(size_m * 0.5);
        break;
    case PrimitiveKind::Cylinder:
        if (size_m.x != size_m.y)
            throw validation_error("cylinder x/y extents must be equal", "size_m");
        asset.mesh = make_cylinder(size_m.x / 2.0, size_m.z);
        break;
    }
    asset.semantic_class = semantic_class;
    asset.asset_id = semantic_class + "_" + kind_name(kind) + "_" + std::to_string(seed);
    asset.display_name = asset.asset_id;
    asset.albedo = albedo_from_seed(seed);
    asset.nutrition = nutrition;
    finalize_geometry(asset);
    validate_asset(asset);
    return asset;
}

AssetLibrary make_builtin_library() {
    AssetLibrary lib;
    auto n = [](double mass, double kcal, double carbs, double fat, double protein) {
        return NutritionFacts{mass, kcal, carbs, fat, protein};
    };
    lib.add(make_primitive_asset(PrimitiveKind::Sphere, {0.055, 0.055, 0.055}, "apple",
                                 n(90, 47, 12.4, 0.2, 0.4), 101));
    lib.add(make_primitive_asset(PrimitiveKind::Sphere, {0.045, 0.045, 0.045}, "apple",
                                 n(60, 31, 8.3, 0.1, 0.3), 102));
    lib.add(make_primitive_asset(PrimitiveKind::Box, {0.05, 0.05, 0.018}, "bread",
                                 n(30, 80, 15.0, 1.0, 2.7), 201));
    lib.add(make_primitive_asset(PrimitiveKind::Box, {0.06, 0.04, 0.022}, "bread",
                                 n(40, 106, 20.0, 1.3, 3.6), 202));
    lib.add(make_primitive_asset(PrimitiveKind::Ellipsoid, {0.034, 0.034, 0.05}, "egg",
                                 n(50, 72, 0.4, 4.8, 6.3), 301));
    lib.add(make_primitive_asset(PrimitiveKind::Ellipsoid, {0.03, 0.03, 0.044}, "egg",
                                 n(38, 54, 0.3, 3.6, 4.7), 302));
    lib.add(make_primitive_asset(PrimitiveKind::Cylinder, {0.025, 0.025, 0.05}, "carrot",
                                 n(20, 8, 1.9, 0.05, 0.2), 401));
    lib.add(make_primitive_asset(PrimitiveKind::Cylinder, {0.032, 0.032, 0.036}, "carrot",
                                 n(25, 10, 2.4, 0.06, 0.23), 402));
    return lib;
}

std::vector<std::string> sample_items(const AssetLibrary& library, int max_items, Rng& rng) {
    if (library.empty())
        throw Error(Error::Kind::Config, "sample_items: asset library is empty");
    if (max_items < 1)
        throw Error(Error::Kind::Range, "sample_items: max_items must be >= 1");

    const size_t lib_size = library.size();
    const size_t hi = std::min<size_t>(static_cast<size_t>(max_items), lib_size);
    const size_t lo = std::min<size_t>(3, hi);
    const size_t count = lo + static_cast<size_t>(rng.uniform_index(hi - lo + 1));

    std::vector<size_t> picks = rng.sample_without_replacement(lib_size, count);
    std::vector<std::string> ids;
    ids.reserve(picks.size());
    for (size_t i : picks) ids.push_back(library.at_index(i).asset_id);
    return ids;
}

} // namespace mealgen
