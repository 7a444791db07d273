#pragma once

#include <string>
#include <vector>

#include "mealgen/config.hpp"
#include "mealgen/manifest.hpp"

namespace mealgen {

inline constexpr const char* kToolVersion = "0.1.0";

struct GenerateOptions {
    int scene_count = 1;
    uint64_t master_seed = 0;
    std::string out_dir;
    int workers = 1;
    int retry_budget = 3;       // extra attempts per scene with derived fresh seeds
    bool log_progress = false;  // per-scene progress lines on stderr
};

// Runs the full pipeline: compose -> rig -> render -> write, scene-parallel
// across `workers` threads, then assembles the manifest in scene-index order
// and writes manifest.json plus a default 60/20/20 splits.json. The output is
// bit-identical for a fixed (config, master_seed) regardless of worker count.
// Throws Error(Generation) when a scene exhausts its retry budget.
Manifest generate_dataset(const PipelineConfig& config, const GenerateOptions& options);

struct CheckResult {
    std::string name;
    uint64_t checked = 0;
    uint64_t violations = 0;
    std::string detail;  // first failure, for diagnosis
};

struct ValidationReport {
    bool passed = false;
    std::vector<CheckResult> checks;
};

Json validation_to_json(const ValidationReport& report);

// Re-opens a generated dataset and verifies: manifest hash, counting
// identity, file existence, raster dimensions, legend closure, mask algebra
// (partition, semantic consistency, visible within amodal, box tightness),
// depth validity, and nutrition additivity. `sample_fraction` bounds the
// share of images whose rasters are re-read (1.0 = all).
ValidationReport validate_dataset(const std::string& dir, double sample_fraction = 1.0);

} // namespace mealgen
