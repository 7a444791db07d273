#include "mealgen/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "mealgen/digest.hpp"
#include "mealgen/error.hpp"

namespace mealgen {

void to_json(Json& j, const Vec3& v) { j = Json::array({v.x, v.y, v.z}); }
void from_json(const Json& j, Vec3& v) {
    v = {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

void to_json(Json& j, const Quat& q) { j = Json::array({q.w, q.x, q.y, q.z}); }
void from_json(const Json& j, Quat& q) {
    q = {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>(),
         j.at(3).get<double>()};
}

void to_json(Json& j, const Pose& p) {
    j = Json{{"position", p.position}, {"orientation", p.orientation}};
}
void from_json(const Json& j, Pose& p) {
    j.at("position").get_to(p.position);
    j.at("orientation").get_to(p.orientation);
}

void to_json(Json& j, const NutritionFacts& n) {
    j = Json{{"mass_g", n.mass_g},
             {"calories_kcal", n.calories_kcal},
             {"carbs_g", n.carbs_g},
             {"fat_g", n.fat_g},
             {"protein_g", n.protein_g}};
}
void from_json(const Json& j, NutritionFacts& n) {
    j.at("mass_g").get_to(n.mass_g);
    j.at("calories_kcal").get_to(n.calories_kcal);
    j.at("carbs_g").get_to(n.carbs_g);
    j.at("fat_g").get_to(n.fat_g);
    j.at("protein_g").get_to(n.protein_g);
}

void to_json(Json& j, const CameraPose& c) {
    j = Json{{"position", c.position},
             {"look_at", c.look_at},
             {"up", c.up},
             {"focal_length_mm", c.focal_length_mm},
             {"sensor_width_mm", c.sensor_width_mm},
             {"image_width_px", c.image_width_px},
             {"image_height_px", c.image_height_px}};
}
void from_json(const Json& j, CameraPose& c) {
    j.at("position").get_to(c.position);
    j.at("look_at").get_to(c.look_at);
    j.at("up").get_to(c.up);
    j.at("focal_length_mm").get_to(c.focal_length_mm);
    j.at("sensor_width_mm").get_to(c.sensor_width_mm);
    j.at("image_width_px").get_to(c.image_width_px);
    j.at("image_height_px").get_to(c.image_height_px);
}

void to_json(Json& j, const Bbox2D& b) {
    j = Json{{"x_min", b.x_min}, {"y_min", b.y_min}, {"x_max", b.x_max}, {"y_max", b.y_max}};
}
void from_json(const Json& j, Bbox2D& b) {
    j.at("x_min").get_to(b.x_min);
    j.at("y_min").get_to(b.y_min);
    j.at("x_max").get_to(b.x_max);
    j.at("y_max").get_to(b.y_max);
}

void to_json(Json& j, const Bbox3D& b) {
    j = Json{{"center", b.center},
             {"half_extents", b.half_extents},
             {"orientation", b.orientation}};
}
void from_json(const Json& j, Bbox3D& b) {
    j.at("center").get_to(b.center);
    j.at("half_extents").get_to(b.half_extents);
    j.at("orientation").get_to(b.orientation);
}

void to_json(Json& j, const ItemAnnotation& a) {
    j = Json{{"instance_id", a.instance_id},
             {"asset_id", a.asset_id},
             {"semantic_class", a.semantic_class},
             {"semantic_id", a.semantic_id},
             {"bbox3d", a.bbox3d},
             {"brightness_factor", a.brightness_factor},
             {"visible_pixel_count", a.visible_pixel_count},
             {"amodal_pixel_count", a.amodal_pixel_count}};
    if (a.bbox2d)
        j["bbox2d"] = *a.bbox2d;
    else
        j["bbox2d"] = nullptr;
}
void from_json(const Json& j, ItemAnnotation& a) {
    j.at("instance_id").get_to(a.instance_id);
    j.at("asset_id").get_to(a.asset_id);
    j.at("semantic_class").get_to(a.semantic_class);
    a.semantic_id = static_cast<uint16_t>(j.at("semantic_id").get<unsigned>());
    j.at("bbox3d").get_to(a.bbox3d);
    j.at("brightness_factor").get_to(a.brightness_factor);
    j.at("visible_pixel_count").get_to(a.visible_pixel_count);
    j.at("amodal_pixel_count").get_to(a.amodal_pixel_count);
    if (j.at("bbox2d").is_null())
        a.bbox2d.reset();
    else
        a.bbox2d = j.at("bbox2d").get<Bbox2D>();
}

void to_json(Json& j, const PlateSpec& p) {
    j = Json{{"center", p.center},
             {"radius_m", p.radius_m},
             {"rim_height_m", p.rim_height_m},
             {"top_z_m", p.top_z_m},
             {"segment_count", p.segment_count}};
}
void from_json(const Json& j, PlateSpec& p) {
    j.at("center").get_to(p.center);
    j.at("radius_m").get_to(p.radius_m);
    j.at("rim_height_m").get_to(p.rim_height_m);
    j.at("top_z_m").get_to(p.top_z_m);
    j.at("segment_count").get_to(p.segment_count);
}

void to_json(Json& j, const SceneItemRecord& r) {
    j = Json{{"instance_id", r.instance_id},
             {"asset_id", r.asset_id},
             {"semantic_class", r.semantic_class},
             {"mass_g", r.mass_g}};
}
void from_json(const Json& j, SceneItemRecord& r) {
    j.at("instance_id").get_to(r.instance_id);
    j.at("asset_id").get_to(r.asset_id);
    j.at("semantic_class").get_to(r.semantic_class);
    j.at("mass_g").get_to(r.mass_g);
}

void to_json(Json& j, const SceneRecord& r) {
    j = Json{{"scene_id", r.scene_id},
             {"seed", r.seed},
             {"attempt", r.attempt},
             {"plating_mode", r.plating_mode},
             {"items", r.items},
             {"nutrition_totals", r.nutrition_totals},
             {"scene_path", r.scene_path},
             {"nutrition_path", r.nutrition_path}};
}
void from_json(const Json& j, SceneRecord& r) {
    j.at("scene_id").get_to(r.scene_id);
    j.at("seed").get_to(r.seed);
    j.at("attempt").get_to(r.attempt);
    j.at("plating_mode").get_to(r.plating_mode);
    j.at("items").get_to(r.items);
    j.at("nutrition_totals").get_to(r.nutrition_totals);
    j.at("scene_path").get_to(r.scene_path);
    j.at("nutrition_path").get_to(r.nutrition_path);
}

void to_json(Json& j, const ImageRecord& r) {
    j = Json{{"scene_id", r.scene_id},
             {"view_id", r.view_id},
             {"view_index", r.view_index},
             {"camera", r.camera},
             {"rgb_path", r.rgb_path},
             {"depth_path", r.depth_path},
             {"semantic_path", r.semantic_path},
             {"instance_path", r.instance_path},
             {"annotations_path", r.annotations_path},
             {"amodal_dir", r.amodal_dir}};
}
void from_json(const Json& j, ImageRecord& r) {
    j.at("scene_id").get_to(r.scene_id);
    j.at("view_id").get_to(r.view_id);
    j.at("view_index").get_to(r.view_index);
    j.at("camera").get_to(r.camera);
    j.at("rgb_path").get_to(r.rgb_path);
    j.at("depth_path").get_to(r.depth_path);
    j.at("semantic_path").get_to(r.semantic_path);
    j.at("instance_path").get_to(r.instance_path);
    j.at("annotations_path").get_to(r.annotations_path);
    j.at("amodal_dir").get_to(r.amodal_dir);
}

void to_json(Json& j, const Manifest& m) {
    j = Json{{"tool_version", m.tool_version},
             {"master_seed", m.master_seed},
             {"config", m.config_snapshot},
             {"views_per_scene", m.views_per_scene},
             {"legend", m.legend},
             {"scenes", m.scenes},
             {"images", m.images},
             {"provenance", m.provenance}};
}
void from_json(const Json& j, Manifest& m) {
    j.at("tool_version").get_to(m.tool_version);
    j.at("master_seed").get_to(m.master_seed);
    m.config_snapshot = j.at("config");
    j.at("views_per_scene").get_to(m.views_per_scene);
    j.at("legend").get_to(m.legend);
    j.at("scenes").get_to(m.scenes);
    j.at("images").get_to(m.images);
    j.at("provenance").get_to(m.provenance);
}

std::string manifest_content_hash(const Manifest& m) {
    const Json j = m;
    return sha256_hex(j.dump());  // canonical: sorted keys, no whitespace
}

void save_manifest(const std::string& path, const Manifest& m) {
    Json j = m;
    j["content_hash"] = manifest_content_hash(m);
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        Error e(Error::Kind::Io, "cannot write manifest: " + path);
        e.path = path;
        throw e;
    }
    out << j.dump(2) << "\n";
    if (!out) {
        Error e(Error::Kind::Io, "write error: " + path);
        e.path = path;
        throw e;
    }
}

namespace {

Json parse_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        Error e(Error::Kind::Io, "cannot open: " + path);
        e.path = path;
        throw e;
    }
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& ex) {
        Error e(Error::Kind::Parse, std::string("JSON parse error: ") + ex.what());
        e.path = path;
        throw e;
    }
}

} // namespace

Manifest load_manifest(const std::string& path, bool verify_hash) {
    Json j = parse_json_file(path);
    try {
        std::string stored;
        if (j.contains("content_hash")) {
            stored = j.at("content_hash").get<std::string>();
            j.erase("content_hash");
        }
        Manifest m = j.get<Manifest>();
        if (verify_hash && !stored.empty() && manifest_content_hash(m) != stored) {
            Error e(Error::Kind::Validation,
                    "manifest content hash mismatch (file edited or corrupted): " + path);
            e.path = path;
            throw e;
        }
        return m;
    } catch (const Json::exception& ex) {
        Error e(Error::Kind::Parse, std::string("manifest structure invalid: ") + ex.what());
        e.path = path;
        throw e;
    }
}

Manifest subsample_views(const Manifest& manifest, int k, uint64_t seed) {
    if (k < 1) throw Error(Error::Kind::Range, "subsample needs k >= 1");

    // image-record indices per scene, in manifest order
    std::map<std::string, std::vector<size_t>> per_scene;
    for (size_t i = 0; i < manifest.images.size(); ++i)
        per_scene[manifest.images[i].scene_id].push_back(i);

    std::set<size_t> keep;
    for (size_t s = 0; s < manifest.scenes.size(); ++s) {
        const std::string& id = manifest.scenes[s].scene_id;
        auto it = per_scene.find(id);
        const size_t have = it == per_scene.end() ? 0 : it->second.size();
        if (have < static_cast<size_t>(k)) {
            Error e(Error::Kind::Range, "scene '" + id + "' has " + std::to_string(have) +
                                            " views; cannot keep " + std::to_string(k));
            throw e;
        }
        Rng rng(derive_seed(seed, s));
        for (int v : select_views(static_cast<int>(have), k, rng))
            keep.insert(it->second[static_cast<size_t>(v)]);
    }

    Manifest out = manifest;
    out.images.clear();
    for (size_t i = 0; i < manifest.images.size(); ++i)
        if (keep.count(i)) out.images.push_back(manifest.images[i]);
    out.views_per_scene = k;
    out.provenance.push_back("subsampled " + std::to_string(k) + " of " +
                             std::to_string(manifest.views_per_scene) +
                             " views per scene with seed " + std::to_string(seed));
    return out;
}

std::array<size_t, 3> largest_remainder_sizes(size_t n, const std::array<double, 3>& ratios) {
    double sum = 0.0;
    for (double r : ratios) {
        if (!(r >= 0.0) || !std::isfinite(r))
            throw validation_error("split ratios must be finite and >= 0", "ratios");
        sum += r;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw validation_error("split ratios must sum to 1 (got " + std::to_string(sum) + ")",
                               "ratios");

    std::array<size_t, 3> sizes{};
    std::array<double, 3> remainder{};
    size_t assigned = 0;
    for (int i = 0; i < 3; ++i) {
        const double target = ratios[static_cast<size_t>(i)] * static_cast<double>(n);
        sizes[static_cast<size_t>(i)] = static_cast<size_t>(std::floor(target));
        remainder[static_cast<size_t>(i)] = target - std::floor(target);
        assigned += sizes[static_cast<size_t>(i)];
    }
    std::array<int, 3> order{0, 1, 2};
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (remainder[static_cast<size_t>(a)] != remainder[static_cast<size_t>(b)])
            return remainder[static_cast<size_t>(a)] > remainder[static_cast<size_t>(b)];
        return a < b;  // tie: earlier split (train, val, test) wins
    });
    for (size_t i = 0; assigned < n; ++i, ++assigned)
        sizes[static_cast<size_t>(order[i % 3])] += 1;
    return sizes;
}

std::array<size_t, 3> SplitAssignment::counts() const {
    std::array<size_t, 3> c{};
    for (const auto& [id, split] : split_of_scene) {
        if (split == "train") ++c[0];
        else if (split == "val") ++c[1];
        else ++c[2];
    }
    return c;
}

SplitAssignment split_scenes(const Manifest& manifest, const std::array<double, 3>& ratios,
                             uint64_t seed) {
    const std::array<size_t, 3> sizes = largest_remainder_sizes(manifest.scenes.size(), ratios);

    size_t nonzero = 0;
    for (double r : ratios)
        if (r > 0.0) ++nonzero;
    if (manifest.scenes.size() < nonzero)
        throw Error(Error::Kind::Range,
                    "need at least " + std::to_string(nonzero) + " scenes for " +
                        std::to_string(nonzero) + " nonzero splits, have " +
                        std::to_string(manifest.scenes.size()));

    std::vector<std::string> ids;
    ids.reserve(manifest.scenes.size());
    for (const auto& s : manifest.scenes) ids.push_back(s.scene_id);
    Rng rng(seed);
    rng.shuffle(ids);

    SplitAssignment out;
    out.ratios = ratios;
    out.seed = seed;
    static const char* names[3] = {"train", "val", "test"};
    size_t cursor = 0;
    for (int part = 0; part < 3; ++part)
        for (size_t i = 0; i < sizes[static_cast<size_t>(part)]; ++i)
            out.split_of_scene[ids[cursor++]] = names[part];
    return out;
}

void save_splits(const std::string& path, const SplitAssignment& s) {
    Json j{{"seed", s.seed},
           {"ratios", s.ratios},
           {"assignment", s.split_of_scene}};
    const auto c = s.counts();
    j["counts"] = {{"train", c[0]}, {"val", c[1]}, {"test", c[2]}};
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        Error e(Error::Kind::Io, "cannot write splits: " + path);
        e.path = path;
        throw e;
    }
    out << j.dump(2) << "\n";
}

SplitAssignment load_splits(const std::string& path) {
    Json j = parse_json_file(path);
    try {
        SplitAssignment s;
        j.at("seed").get_to(s.seed);
        j.at("ratios").get_to(s.ratios);
        j.at("assignment").get_to(s.split_of_scene);
        return s;
    } catch (const Json::exception& ex) {
        Error e(Error::Kind::Parse, std::string("splits structure invalid: ") + ex.what());
        e.path = path;
        throw e;
    }
}

Histogram make_histogram(const std::vector<double>& values, int bins) {
    Histogram h;
    h.counts.assign(static_cast<size_t>(std::max(bins, 1)), 0);
    if (values.empty()) return h;

    h.min_value = *std::min_element(values.begin(), values.end());
    h.max_value = *std::max_element(values.begin(), values.end());
    h.mean = std::accumulate(values.begin(), values.end(), 0.0) /
             static_cast<double>(values.size());
    h.lo = h.min_value;
    h.hi = h.max_value;
    h.total = values.size();

    const double span = h.hi - h.lo;
    for (double v : values) {
        size_t idx = 0;
        if (span > 0.0) {
            idx = static_cast<size_t>((v - h.lo) / span * static_cast<double>(h.counts.size()));
            idx = std::min(idx, h.counts.size() - 1);
        }
        ++h.counts[idx];
    }
    return h;
}

StatsReport stats_report(const Manifest& manifest) {
    StatsReport r;
    r.scene_count = manifest.scenes.size();
    r.image_count = manifest.images.size();

    std::vector<double> calories, carbs, fat, protein, mass, items;
    std::map<std::string, std::set<std::string>> scenes_of_asset;
    std::map<std::string, double> class_mass;

    uint64_t total_items = 0;
    for (const auto& s : manifest.scenes) {
        calories.push_back(s.nutrition_totals.calories_kcal);
        carbs.push_back(s.nutrition_totals.carbs_g);
        fat.push_back(s.nutrition_totals.fat_g);
        protein.push_back(s.nutrition_totals.protein_g);
        mass.push_back(s.nutrition_totals.mass_g);
        items.push_back(static_cast<double>(s.items.size()));
        total_items += s.items.size();

        std::set<std::string> classes_here;
        for (const auto& it : s.items) {
            scenes_of_asset[it.asset_id].insert(s.scene_id);
            ClassEntry& e = r.classes[it.semantic_class];
            e.instance_count += 1;
            class_mass[it.semantic_class] += it.mass_g;
            classes_here.insert(it.semantic_class);
        }
        for (const auto& c : classes_here) r.classes[c].scene_frequency += 1;
    }
    for (auto& [name, e] : r.classes)
        e.mean_mass_g = e.instance_count ? class_mass[name] / static_cast<double>(e.instance_count) : 0.0;

    r.mean_items_per_scene =
        r.scene_count ? static_cast<double>(total_items) / static_cast<double>(r.scene_count) : 0.0;
    if (!scenes_of_asset.empty()) {
        double sum = 0.0;
        for (const auto& [asset, scenes] : scenes_of_asset) sum += static_cast<double>(scenes.size());
        r.mean_scenes_per_item = sum / static_cast<double>(scenes_of_asset.size());
    }

    r.per_scene["calories_kcal"] = make_histogram(calories);
    r.per_scene["carbs_g"] = make_histogram(carbs);
    r.per_scene["fat_g"] = make_histogram(fat);
    r.per_scene["protein_g"] = make_histogram(protein);
    r.per_scene["mass_g"] = make_histogram(mass);
    r.per_scene["ingredient_count"] = make_histogram(items);
    return r;
}

Json stats_to_json(const StatsReport& r) {
    Json j;
    j["scene_count"] = r.scene_count;
    j["image_count"] = r.image_count;
    j["mean_items_per_scene"] = r.mean_items_per_scene;
    j["mean_scenes_per_item"] = r.mean_scenes_per_item;

    Json hists = Json::object();
    for (const auto& [name, h] : r.per_scene) {
        hists[name] = Json{{"lo", h.lo},
                           {"hi", h.hi},
                           {"counts", h.counts},
                           {"min", h.min_value},
                           {"max", h.max_value},
                           {"mean", h.mean},
                           {"total", h.total}};
    }
    j["per_scene_histograms"] = hists;

    Json classes = Json::object();
    for (const auto& [name, e] : r.classes) {
        classes[name] = Json{{"scene_frequency", e.scene_frequency},
                             {"instance_count", e.instance_count},
                             {"mean_mass_g", e.mean_mass_g}};
    }
    j["classes"] = classes;

    // plotting context only; not derived from any dataset
    j["reference_daily_values"] = Json{{"calories_kcal", 2000.0},
                                       {"carbs_g", 275.0},
                                       {"fat_g", 78.0},
                                       {"protein_g", 50.0}};
    return j;
}

} // namespace mealgen
