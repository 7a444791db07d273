// Command-line front end: generate / subsample / split / stats / validate.
// Errors print one machine-readable JSON object on stderr and exit nonzero.

#include <array>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "mealgen/error.hpp"
#include "mealgen/manifest.hpp"
#include "mealgen/pipeline.hpp"

namespace fs = std::filesystem;
using mealgen::Error;
using mealgen::Json;

namespace {

Json error_to_json(const Error& e) {
    Json j{{"kind", mealgen::to_string(e.kind())}, {"message", e.what()}};
    if (e.line > 0) j["line"] = e.line;
    if (e.column > 0) j["column"] = e.column;
    if (!e.field.empty()) j["field"] = e.field;
    if (!e.path.empty()) j["path"] = e.path;
    return Json{{"error", j}};
}

std::array<double, 3> parse_ratios(const std::string& text) {
    std::array<double, 3> out{};
    std::stringstream ss(text);
    std::string part;
    size_t i = 0;
    while (std::getline(ss, part, ',')) {
        if (i >= 3) throw mealgen::validation_error("expected three ratios", "ratios");
        try {
            out[i++] = std::stod(part);
        } catch (const std::exception&) {
            throw mealgen::validation_error("ratio '" + part + "' is not a number", "ratios");
        }
    }
    if (i != 3) throw mealgen::validation_error("expected three ratios", "ratios");
    return out;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        Error e(Error::Kind::Io, "cannot write: " + path);
        e.path = path;
        throw e;
    }
    out << text;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"deterministic 3D meal-scene dataset generator"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "compose, simulate, and render a dataset");
    std::string gen_config, gen_out;
    uint64_t gen_seed = 0;
    int gen_scenes = 1, gen_workers = 1;
    bool gen_quiet = false;
    gen->add_option("--config", gen_config, "pipeline YAML config")->required();
    gen->add_option("--seed", gen_seed, "master seed")->default_val(0);
    gen->add_option("--scenes", gen_scenes, "number of scenes")->required();
    gen->add_option("--out", gen_out, "output directory");
    gen->add_option("--workers", gen_workers, "parallel scene workers")->default_val(1);
    gen->add_flag("--quiet", gen_quiet, "suppress per-scene progress");

    // subsample
    auto* sub = app.add_subcommand("subsample", "keep k views per scene in a new manifest");
    std::string sub_manifest, sub_out;
    int sub_views = 4;
    uint64_t sub_seed = 0;
    sub->add_option("--manifest", sub_manifest, "input manifest.json")->required();
    sub->add_option("--views", sub_views, "views to keep per scene")->default_val(4);
    sub->add_option("--seed", sub_seed, "subsample seed")->default_val(0);
    sub->add_option("--out", sub_out, "output manifest path (default: sibling manifest.views<k>.json)");

    // split
    auto* spl = app.add_subcommand("split", "assign scenes to train/val/test");
    std::string spl_manifest, spl_ratios = "0.6,0.2,0.2", spl_out;
    uint64_t spl_seed = 0;
    spl->add_option("--manifest", spl_manifest, "input manifest.json")->required();
    spl->add_option("--ratios", spl_ratios, "train,val,test ratios")->default_val("0.6,0.2,0.2");
    spl->add_option("--seed", spl_seed, "shuffle seed")->default_val(0);
    spl->add_option("--out", spl_out, "output path (default: splits.json beside the manifest)");

    // stats
    auto* sta = app.add_subcommand("stats", "dataset statistics report");
    std::string sta_manifest, sta_out;
    sta->add_option("--manifest", sta_manifest, "input manifest.json")->required();
    sta->add_option("--out", sta_out, "report path (default: stdout)");

    // validate
    auto* val = app.add_subcommand("validate", "re-check a generated dataset");
    std::string val_dir;
    double val_sample = 1.0;
    val->add_option("--dir", val_dir, "dataset directory")->required();
    val->add_option("--sample", val_sample, "fraction of images to re-read")->default_val(1.0);

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            mealgen::PipelineConfig config = mealgen::load_pipeline_config(gen_config);
            mealgen::GenerateOptions opt;
            opt.scene_count = gen_scenes;
            opt.master_seed = gen_seed;
            opt.out_dir = gen_out.empty() ? config.output.dir : gen_out;
            opt.workers = gen_workers;
            opt.log_progress = !gen_quiet;
            mealgen::Manifest m = mealgen::generate_dataset(config, opt);
            Json done{{"scenes", m.scenes.size()},
                      {"images", m.images.size()},
                      {"manifest", (fs::path(opt.out_dir) / "manifest.json").string()},
                      {"content_hash", mealgen::manifest_content_hash(m)}};
            std::cout << done.dump(2) << "\n";
        } else if (sub->parsed()) {
            mealgen::Manifest m = mealgen::load_manifest(sub_manifest);
            mealgen::Manifest reduced = mealgen::subsample_views(m, sub_views, sub_seed);
            std::string out = sub_out;
            if (out.empty()) {
                fs::path p(sub_manifest);
                out = (p.parent_path() /
                       ("manifest.views" + std::to_string(sub_views) + ".json"))
                          .string();
            }
            mealgen::save_manifest(out, reduced);
            Json done{{"images", reduced.images.size()},
                      {"views_per_scene", reduced.views_per_scene},
                      {"manifest", out},
                      {"content_hash", mealgen::manifest_content_hash(reduced)}};
            std::cout << done.dump(2) << "\n";
        } else if (spl->parsed()) {
            mealgen::Manifest m = mealgen::load_manifest(spl_manifest);
            mealgen::SplitAssignment s =
                mealgen::split_scenes(m, parse_ratios(spl_ratios), spl_seed);
            std::string out = spl_out;
            if (out.empty())
                out = (fs::path(spl_manifest).parent_path() / "splits.json").string();
            mealgen::save_splits(out, s);
            const auto c = s.counts();
            Json done{{"splits", out},
                      {"counts", {{"train", c[0]}, {"val", c[1]}, {"test", c[2]}}}};
            std::cout << done.dump(2) << "\n";
        } else if (sta->parsed()) {
            mealgen::Manifest m = mealgen::load_manifest(sta_manifest);
            Json report = mealgen::stats_to_json(mealgen::stats_report(m));
            if (sta_out.empty())
                std::cout << report.dump(2) << "\n";
            else
                write_text(sta_out, report.dump(2) + "\n");
        } else if (val->parsed()) {
            mealgen::ValidationReport report = mealgen::validate_dataset(val_dir, val_sample);
            std::cout << mealgen::validation_to_json(report).dump(2) << "\n";
            return report.passed ? 0 : 1;
        }
        return 0;
    } catch (const Error& e) {
        std::cerr << error_to_json(e).dump() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << Json{{"error", {{"kind", "internal"}, {"message", e.what()}}}}.dump()
                  << "\n";
        return 2;
    }
}
