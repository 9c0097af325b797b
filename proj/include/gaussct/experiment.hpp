#pragma once

#include "gaussct/density_control.hpp"
#include "gaussct/initializer.hpp"
#include "gaussct/metrics.hpp"
#include "gaussct/optimizer.hpp"
#include "gaussct/projector.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <string>
#include <vector>

namespace gaussct {

// One experiment document: scan geometry, data source and every module's
// hyperparameters. Loaded from JSON with unknown keys rejected.
struct ExperimentConfig {
    // desk-scale defaults: a ~1/10 analogue of the full-scale settings
    ExperimentConfig() {
        init.neighbor_radius = 0.0271; // one voxel diagonal at 64^3
        optim.iterations = 500;
        optim.lr_sigma_intensity = 0.02;
        iterative.iterations = 35;
        iterative.lr = 0.05;
        density.grad_threshold = 1.0;
        density.interval = 150;
        density.max_gaussians = 40000;
    }

    std::uint64_t seed = 1234;
    int threads = 0; // 0 = hardware concurrency
    std::string output_dir = "out";

    // data source: phantom preset name ("abdomen" | "chest") or a volume file
    std::string phantom = "abdomen";
    std::string volume_path; // non-empty overrides `phantom`

    std::array<int, 3> grid_dims{64, 64, 64};

    int num_views = 20;
    std::array<int, 2> detector_shape{64, 96};
    double source_distance = 2.0;
    double detector_distance = 2.0;
    std::array<double, 2> detector_pixel_size{0.0525, 0.0465}; // row (v), col (u)

    RampFilter fbp_filter;

    InitConfig init;
    std::string init_method = "fbp"; // "fbp" | "uniform"

    OptimConfig optim;
    IterativeConfig iterative;

    bool density_enabled = true;
    double extent_d = 0.05;
    DensityConfig density;

    int checkpoint_interval = 0; // cloud checkpoints every K iterations; 0 = off

    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig load(const std::string& path);
    nlohmann::json to_json() const;
    void validate() const;

    VoxelGrid grid_spec() const;
    ConeBeamGeometry geometry() const;
};

// Applies `key.path=value` overrides onto a config JSON document. Values are
// parsed as JSON when possible, otherwise taken as strings.
void apply_override(nlohmann::json& doc, const std::string& assignment);

// Renders/loads the source volume, forward-projects it and writes
// ground_truth.raw and projections.raw under output_dir.
void cmd_simulate(const ExperimentConfig& cfg);

struct ReconstructOutcome {
    MetricReport metrics;
    VoxelGrid volume;
};

// method: "fbp" | "iterative" | "gaussian" | "gaussian-uniform".
// Reads projections.raw + ground_truth.raw from output_dir, writes
// recon_<method>.raw, slices_<method>/, metrics_<method>.csv and (for the
// trained methods) train_<method>.csv.
ReconstructOutcome cmd_reconstruct(const ExperimentConfig& cfg, const std::string& method);

struct AblationRow {
    std::string label;
    int num_gaussians_final = 0;
    MetricReport metrics;
};

// sweep: "gaussian-count" (density control off, one run per count) or
// "density-control" (on/off pair). Writes ablation_<sweep>.csv.
std::vector<AblationRow> cmd_ablate(const ExperimentConfig& cfg, const std::string& sweep,
                                    const std::vector<int>& counts);

MetricReport cmd_metrics(const std::string& volume_a, const std::string& volume_b);

} // namespace gaussct
