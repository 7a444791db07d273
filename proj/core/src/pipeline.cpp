#include "mealgen/pipeline.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "mealgen/error.hpp"
#include "mealgen/image_io.hpp"
#include "mealgen/nutrition.hpp"
#include "mealgen/render.hpp"
#include "mealgen/rules.hpp"
#include "mealgen/sim.hpp"

namespace fs = std::filesystem;

namespace mealgen {

namespace {

std::string scene_name(int index) {
    std::ostringstream ss;
    ss << "scene_" << std::setw(4) << std::setfill('0') << index;
    return ss.str();
}

std::string view_name(int index) {
    std::ostringstream ss;
    ss << "view_" << std::setw(2) << std::setfill('0') << index;
    return ss.str();
}

void write_json_file(const fs::path& path, const Json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        Error e(Error::Kind::Io, "cannot write: " + path.string());
        e.path = path.string();
        throw e;
    }
    out << j.dump(2) << "\n";
    if (!out) {
        Error e(Error::Kind::Io, "write error: " + path.string());
        e.path = path.string();
        throw e;
    }
}

struct SceneOutput {
    bool ok = false;
    SceneRecord record;
    std::vector<ImageRecord> images;
    std::string error;  // last failure when !ok
};

struct SceneJob {
    const PipelineConfig* config;
    const AssetLibrary* library;
    const PlatingRuleSet* rules;  // procedural mode only
    fs::path out_root;
    uint64_t master_seed;
    int retry_budget;
};

Scene compose_scene(const SceneJob& job, uint64_t scene_seed) {
    const PlatingConfig& plating = job.config->plating;
    if (plating.mode == "dynamic")
        return compose_dynamic_scene(*job.library, plating.plate, plating.sim,
                                     plating.max_items, scene_seed, /*retry_budget=*/0);
    Rng rng(scene_seed);
    Scene scene = instantiate(*job.rules, *job.library, rng);
    scene.seed = scene_seed;
    return scene;
}

SceneOutput run_scene(const SceneJob& job, int scene_index) {
    SceneOutput out;
    const std::string scene_id = scene_name(scene_index);

    for (int attempt = 0; attempt <= job.retry_budget; ++attempt) {
        const uint64_t seed =
            derive_seed(job.master_seed, static_cast<uint64_t>(scene_index),
                        static_cast<uint64_t>(attempt));
        try {
            Scene scene = compose_scene(job, seed);

            Rng rig_rng(derive_seed(seed, 3));
            const std::vector<CameraPose> rig =
                build_rig(scene.plate, job.config->rig, rig_rng);

            Rng brightness_rng(derive_seed(seed, 4));
            std::vector<double> brightness(scene.items.size());
            for (double& b : brightness)
                b = brightness_rng.uniform(job.config->render.brightness_min,
                                           job.config->render.brightness_max);

            const SceneNutrition nutrition = aggregate(scene, *job.library);

            const fs::path scene_dir = job.out_root / "scenes" / scene_id;
            const fs::path image_root = job.out_root / "images" / scene_id;
            fs::create_directories(scene_dir);
            fs::create_directories(image_root);

            // scene.json: enough to re-render without re-simulating
            Json scene_json;
            scene_json["scene_id"] = scene_id;
            scene_json["seed"] = seed;
            scene_json["attempt"] = attempt;
            scene_json["plating_mode"] = scene.plating_mode;
            scene_json["plate"] = scene.plate;
            Json items_json = Json::array();
            for (size_t i = 0; i < scene.items.size(); ++i) {
                const FoodAsset& asset = job.library->at(scene.items[i].asset_id);
                items_json.push_back({{"instance_id", static_cast<int>(i) + 1},
                                      {"asset_id", asset.asset_id},
                                      {"semantic_class", asset.semantic_class},
                                      {"pose", scene.items[i].pose},
                                      {"brightness_factor", brightness[i]}});
            }
            scene_json["items"] = items_json;
            write_json_file(scene_dir / "scene.json", scene_json);

            Json nutrition_json;
            nutrition_json["totals"] = nutrition.totals;
            nutrition_json["ingredient_count"] = nutrition.ingredient_count;
            Json ingredients = Json::array();
            for (const auto& ing : nutrition.ingredients)
                ingredients.push_back(
                    {{"asset_id", ing.asset_id}, {"semantic_class", ing.semantic_class}});
            nutrition_json["ingredients"] = ingredients;
            write_json_file(scene_dir / "nutrition.json", nutrition_json);

            SceneGeometry geometry(scene, *job.library);

            std::vector<ImageRecord> images;
            images.reserve(rig.size());
            for (size_t v = 0; v < rig.size(); ++v) {
                const std::string view_id = view_name(static_cast<int>(v));
                const fs::path view_dir = image_root / view_id;
                fs::create_directories(view_dir / "amodal");

                RenderBundle bundle =
                    render_view(geometry, rig[v], job.config->render.light, brightness);

                write_png_rgb((view_dir / "rgb.png").string(), bundle.rgb);
                write_pfm((view_dir / "depth.pfm").string(), bundle.depth);
                write_png_gray16((view_dir / "semantic.png").string(), bundle.semantic);
                write_png_gray16((view_dir / "instance.png").string(), bundle.instance);
                for (size_t i = 0; i < bundle.amodal.size(); ++i) {
                    const std::string name =
                        std::to_string(bundle.items[i].instance_id) + ".png";
                    write_png_gray8((view_dir / "amodal" / name).string(), bundle.amodal[i]);
                }

                Json ann;
                ann["scene_id"] = scene_id;
                ann["view_id"] = view_id;
                ann["camera"] = rig[v];
                ann["items"] = bundle.items;
                write_json_file(view_dir / "annotations.json", ann);

                ImageRecord rec;
                rec.scene_id = scene_id;
                rec.view_id = view_id;
                rec.view_index = static_cast<int>(v);
                rec.camera = rig[v];
                const std::string rel = "images/" + scene_id + "/" + view_id + "/";
                rec.rgb_path = rel + "rgb.png";
                rec.depth_path = rel + "depth.pfm";
                rec.semantic_path = rel + "semantic.png";
                rec.instance_path = rel + "instance.png";
                rec.annotations_path = rel + "annotations.json";
                rec.amodal_dir = rel + "amodal";
                images.push_back(std::move(rec));
            }

            SceneRecord record;
            record.scene_id = scene_id;
            record.seed = seed;
            record.attempt = attempt;
            record.plating_mode = scene.plating_mode;
            for (size_t i = 0; i < scene.items.size(); ++i) {
                const FoodAsset& asset = job.library->at(scene.items[i].asset_id);
                record.items.push_back({static_cast<int>(i) + 1, asset.asset_id,
                                        asset.semantic_class, asset.nutrition.mass_g});
            }
            record.nutrition_totals = nutrition.totals;
            record.scene_path = "scenes/" + scene_id + "/scene.json";
            record.nutrition_path = "scenes/" + scene_id + "/nutrition.json";

            out.ok = true;
            out.record = std::move(record);
            out.images = std::move(images);
            return out;
        } catch (const Error& e) {
            out.error = e.what();
        } catch (const std::exception& e) {
            out.error = e.what();
        }
    }
    return out;  // every attempt failed
}

} // namespace

Manifest generate_dataset(const PipelineConfig& config, const GenerateOptions& options) {
    validate_pipeline_config(config);
    if (options.scene_count < 1)
        throw validation_error("scene count must be >= 1", "scenes");
    if (options.workers < 1)
        throw validation_error("workers must be >= 1", "workers");
    if (options.out_dir.empty())
        throw validation_error("output directory is required", "out");

    const AssetLibrary library = build_library(config.assets);
    if (library.empty())
        throw Error(Error::Kind::Config, "asset library is empty");

    PlatingRuleSet rules;
    if (config.plating.mode == "procedural") rules = load_rules(config.plating.rules_path);

    const fs::path out_root = options.out_dir;
    fs::create_directories(out_root);

    const auto legend = library.semantic_legend();
    SceneJob job;
    job.config = &config;
    job.library = &library;
    job.rules = &rules;
    job.out_root = out_root;
    job.master_seed = options.master_seed;
    job.retry_budget = options.retry_budget;

    std::vector<SceneOutput> results(static_cast<size_t>(options.scene_count));
    std::atomic<int> next{0};
    std::mutex log_mutex;

    auto worker = [&]() {
        for (;;) {
            const int s = next.fetch_add(1);
            if (s >= options.scene_count) return;
            results[static_cast<size_t>(s)] = run_scene(job, s);
            if (options.log_progress) {
                std::lock_guard<std::mutex> lock(log_mutex);
                const SceneOutput& r = results[static_cast<size_t>(s)];
                std::cerr << scene_name(s) << (r.ok ? " done" : " FAILED: " + r.error) << "\n";
            }
        }
    };

    if (options.workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(options.workers));
        for (int w = 0; w < options.workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    std::vector<std::string> failures;
    for (int s = 0; s < options.scene_count; ++s)
        if (!results[static_cast<size_t>(s)].ok)
            failures.push_back(scene_name(s) + ": " + results[static_cast<size_t>(s)].error);
    if (!failures.empty()) {
        std::string summary = std::to_string(failures.size()) + " of " +
                              std::to_string(options.scene_count) +
                              " scenes failed after retries; first: " + failures.front();
        throw Error(Error::Kind::Generation, summary);
    }

    Manifest manifest;
    manifest.tool_version = kToolVersion;
    manifest.master_seed = options.master_seed;
    manifest.config_snapshot = config_to_json(config);
    manifest.views_per_scene = config.rig.n_views;
    manifest.legend = legend;
    for (auto& r : results) {
        manifest.scenes.push_back(std::move(r.record));
        for (auto& img : r.images) manifest.images.push_back(std::move(img));
    }
    manifest.provenance.push_back("generated " + std::to_string(options.scene_count) +
                                  " scenes x " + std::to_string(config.rig.n_views) +
                                  " views with master seed " +
                                  std::to_string(options.master_seed));

    save_manifest((out_root / "manifest.json").string(), manifest);

    const SplitAssignment splits =
        split_scenes(manifest, {0.6, 0.2, 0.2}, options.master_seed);
    save_splits((out_root / "splits.json").string(), splits);

    return manifest;
}

// ---------------------------------------------------------------------------
// validation

namespace {

struct Checker {
    ValidationReport report;

    CheckResult& get(const std::string& name) {
        for (auto& c : report.checks)
            if (c.name == name) return c;
        report.checks.push_back({name, 0, 0, ""});
        return report.checks.back();
    }

    void count(const std::string& name, bool ok, const std::string& detail) {
        CheckResult& c = get(name);
        c.checked += 1;
        if (!ok) {
            c.violations += 1;
            if (c.detail.empty()) c.detail = detail;
        }
    }
};

} // namespace

Json validation_to_json(const ValidationReport& report) {
    Json checks = Json::array();
    for (const auto& c : report.checks) {
        Json jc{{"name", c.name}, {"checked", c.checked}, {"violations", c.violations}};
        if (!c.detail.empty()) jc["first_failure"] = c.detail;
        checks.push_back(jc);
    }
    return Json{{"passed", report.passed}, {"checks", checks}};
}

ValidationReport validate_dataset(const std::string& dir, double sample_fraction) {
    if (!(sample_fraction > 0.0 && sample_fraction <= 1.0))
        throw validation_error("sample fraction must be in (0, 1]", "sample");

    const fs::path root = dir;
    const fs::path manifest_path = root / "manifest.json";
    if (!fs::exists(manifest_path)) {
        Error e(Error::Kind::Io, "no manifest.json under " + dir);
        e.path = manifest_path.string();
        throw e;
    }
    const Manifest manifest = load_manifest(manifest_path.string());
    const PipelineConfig config = config_from_json(manifest.config_snapshot);
    const AssetLibrary library = build_library(config.assets);

    Checker ck;

    // counting identity
    ck.count("counting_identity",
             manifest.images.size() ==
                 manifest.scenes.size() * static_cast<size_t>(manifest.views_per_scene),
             std::to_string(manifest.images.size()) + " images across " +
                 std::to_string(manifest.scenes.size()) + " scenes, " +
                 std::to_string(manifest.views_per_scene) + " views each");

    // per-scene items, keyed for the raster checks
    std::map<std::string, const SceneRecord*> scene_of;
    for (const auto& s : manifest.scenes) scene_of[s.scene_id] = &s;

    // file existence + nutrition additivity
    for (const auto& s : manifest.scenes) {
        ck.count("files_exist", fs::exists(root / s.scene_path), s.scene_path + " missing");
        ck.count("files_exist", fs::exists(root / s.nutrition_path),
                 s.nutrition_path + " missing");

        NutritionFacts sum;
        bool resolvable = true;
        for (const auto& item : s.items) {
            if (!library.contains(item.asset_id)) {
                resolvable = false;
                break;
            }
            const NutritionFacts& n = library.at(item.asset_id).nutrition;
            sum.mass_g += n.mass_g;
            sum.calories_kcal += n.calories_kcal;
            sum.carbs_g += n.carbs_g;
            sum.fat_g += n.fat_g;
            sum.protein_g += n.protein_g;
        }
        auto close = [](double a, double b) {
            return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
        };
        ck.count("nutrition_additivity",
                 resolvable && close(sum.mass_g, s.nutrition_totals.mass_g) &&
                     close(sum.calories_kcal, s.nutrition_totals.calories_kcal) &&
                     close(sum.carbs_g, s.nutrition_totals.carbs_g) &&
                     close(sum.fat_g, s.nutrition_totals.fat_g) &&
                     close(sum.protein_g, s.nutrition_totals.protein_g),
                 s.scene_id + ": stored totals do not match recomputed sums");
    }

    for (const auto& img : manifest.images) {
        for (const std::string* p : {&img.rgb_path, &img.depth_path, &img.semantic_path,
                                     &img.instance_path, &img.annotations_path})
            ck.count("files_exist", fs::exists(root / *p), *p + " missing");
        const SceneRecord* scene = scene_of.count(img.scene_id) ? scene_of[img.scene_id] : nullptr;
        ck.count("files_exist", scene != nullptr, img.scene_id + " has no scene record");
        if (scene)
            for (const auto& item : scene->items)
                ck.count("files_exist",
                         fs::exists(root / img.amodal_dir /
                                    (std::to_string(item.instance_id) + ".png")),
                         img.amodal_dir + "/" + std::to_string(item.instance_id) +
                             ".png missing");
    }

    // deterministic image sample for the raster checks
    std::vector<size_t> order(manifest.images.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng sample_rng(derive_seed(manifest.master_seed, 0x5A11DA7Eu));
    sample_rng.shuffle(order);
    const size_t sample_n = std::min(
        order.size(),
        static_cast<size_t>(
            std::ceil(sample_fraction * static_cast<double>(order.size()))));

    std::set<uint16_t> legend_ids;
    for (const auto& [cls, id] : manifest.legend) legend_ids.insert(id);

    for (size_t oi = 0; oi < sample_n; ++oi) {
        const ImageRecord& img = manifest.images[order[oi]];
        const SceneRecord* scene = scene_of.count(img.scene_id) ? scene_of[img.scene_id] : nullptr;
        if (!scene) continue;
        const std::string where = img.scene_id + "/" + img.view_id;

        RgbImage rgb;
        DepthMap depth;
        MaskImage semantic, instance;
        try {
            rgb = read_png_rgb((root / img.rgb_path).string());
            depth = read_pfm((root / img.depth_path).string());
            semantic = read_png_gray16((root / img.semantic_path).string());
            instance = read_png_gray16((root / img.instance_path).string());
        } catch (const Error& e) {
            ck.count("raster_dims", false, where + ": " + e.what());
            continue;
        }

        const int W = img.camera.image_width_px, H = img.camera.image_height_px;
        const bool dims_ok = rgb.width == W && rgb.height == H && depth.width == W &&
                             depth.height == H && semantic.width == W && semantic.height == H &&
                             instance.width == W && instance.height == H;
        ck.count("raster_dims", dims_ok, where + ": raster dimensions disagree with camera");
        if (!dims_ok) continue;

        // class id per instance, from the scene record
        std::map<uint16_t, uint16_t> class_of_instance;
        bool ids_ok = true;
        for (const auto& item : scene->items) {
            auto it = manifest.legend.find(item.semantic_class);
            if (it == manifest.legend.end()) {
                ids_ok = false;
                break;
            }
            class_of_instance[static_cast<uint16_t>(item.instance_id)] = it->second;
        }
        ck.count("legend_closure", ids_ok, where + ": scene item class missing from legend");

        // amodal masks
        std::map<uint16_t, BinaryMask> amodal;
        bool amodal_ok = true;
        for (const auto& item : scene->items) {
            try {
                amodal[static_cast<uint16_t>(item.instance_id)] = read_png_gray8(
                    (root / img.amodal_dir / (std::to_string(item.instance_id) + ".png"))
                        .string());
            } catch (const Error&) {
                amodal_ok = false;
            }
        }

        uint64_t legend_violations = 0, consistency_violations = 0, amodal_violations = 0,
                 depth_violations = 0;
        std::map<uint16_t, Bbox2D> boxes;
        std::map<uint16_t, uint64_t> visible_count;
        for (int y = 0; y < H; ++y) {
            for (int x = 0; x < W; ++x) {
                const uint16_t sem = semantic.at(x, y);
                const uint16_t ins = instance.at(x, y);
                if (sem != 0 && legend_ids.count(sem) == 0) ++legend_violations;
                if (ins != 0 && class_of_instance.count(ins) == 0) ++legend_violations;

                // partition + class consistency: sem > 0 iff ins > 0, and the
                // semantic id must equal the placed item's class
                if ((sem == 0) != (ins == 0)) ++consistency_violations;
                if (ins != 0 && class_of_instance.count(ins) &&
                    class_of_instance[ins] != sem)
                    ++consistency_violations;

                if (ins != 0) {
                    auto it = amodal.find(ins);
                    if (it == amodal.end() || !it->second.at(x, y)) ++amodal_violations;

                    auto [bit, inserted] = boxes.try_emplace(ins, Bbox2D{x, y, x, y});
                    if (!inserted) {
                        bit->second.x_min = std::min(bit->second.x_min, x);
                        bit->second.y_min = std::min(bit->second.y_min, y);
                        bit->second.x_max = std::max(bit->second.x_max, x);
                        bit->second.y_max = std::max(bit->second.y_max, y);
                    }
                    ++visible_count[ins];

                    const float d = depth.at(x, y);
                    if (!(std::isfinite(d) && d > 0.0f)) ++depth_violations;
                } else {
                    const float d = depth.at(x, y);
                    if (!(d > 0.0f)) ++depth_violations;  // +inf background passes
                }
            }
        }
        ck.count("legend_closure", legend_violations == 0 && amodal_ok,
                 where + ": " + std::to_string(legend_violations) + " undeclared mask ids");
        ck.count("semantic_consistency", consistency_violations == 0,
                 where + ": " + std::to_string(consistency_violations) + " pixels inconsistent");
        ck.count("amodal_containment", amodal_violations == 0,
                 where + ": " + std::to_string(amodal_violations) +
                     " visible pixels outside amodal masks");
        ck.count("depth_validity", depth_violations == 0,
                 where + ": " + std::to_string(depth_violations) + " invalid depth pixels");

        // bbox tightness against annotations.json
        bool boxes_ok = true;
        std::string box_detail;
        try {
            Json ann;
            {
                std::ifstream in(root / img.annotations_path, std::ios::binary);
                ann = Json::parse(in);
            }
            for (const auto& ja : ann.at("items")) {
                ItemAnnotation a = ja.get<ItemAnnotation>();
                const uint16_t id = static_cast<uint16_t>(a.instance_id);
                const auto scanned = boxes.find(id);
                if (a.bbox2d.has_value() != (scanned != boxes.end())) {
                    boxes_ok = false;
                    box_detail = where + ": bbox presence disagrees for instance " +
                                 std::to_string(a.instance_id);
                    break;
                }
                if (a.bbox2d) {
                    const Bbox2D& b = *a.bbox2d;
                    const Bbox2D& s = scanned->second;
                    if (b.x_min != s.x_min || b.y_min != s.y_min || b.x_max != s.x_max ||
                        b.y_max != s.y_max) {
                        boxes_ok = false;
                        box_detail = where + ": bbox not tight for instance " +
                                     std::to_string(a.instance_id);
                        break;
                    }
                }
                const uint64_t seen =
                    visible_count.count(id) ? visible_count[id] : 0;
                if (a.visible_pixel_count != seen) {
                    boxes_ok = false;
                    box_detail = where + ": visible pixel count mismatch for instance " +
                                 std::to_string(a.instance_id);
                    break;
                }
            }
        } catch (const std::exception& e) {
            boxes_ok = false;
            box_detail = where + ": annotations unreadable: " + e.what();
        }
        ck.count("bbox_tightness", boxes_ok, box_detail);
    }

    ck.report.passed = true;
    for (const auto& c : ck.report.checks)
        if (c.violations != 0) ck.report.passed = false;
    return ck.report;
}

} // namespace mealgen
