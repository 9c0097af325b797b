#include "gaussct/experiment.hpp"
#include "gaussct/io.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

using gaussct::ExperimentConfig;

ExperimentConfig load_config(const std::string& config_path,
                             const std::vector<std::string>& overrides) {
    nlohmann::json doc = ExperimentConfig{}.to_json();
    if (!config_path.empty()) {
        std::ifstream f(config_path);
        if (!f)
            throw std::runtime_error("cannot open config: " + config_path);
        f >> doc;
    }
    for (const std::string& o : overrides)
        gaussct::apply_override(doc, o);
    return ExperimentConfig::from_json(doc);
}

void print_metrics(const gaussct::MetricReport& m) {
    if (std::isinf(m.psnr))
        std::printf("psnr: inf dB\n");
    else
        std::printf("psnr: %.4f dB\n", m.psnr);
    std::printf("ssim: %.6f\n", m.ssim);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse-view cone-beam CT reconstruction with 3D Gaussian clouds"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    int threads = -1;
    app.add_option("--config", config_path, "experiment config (JSON)");
    app.add_option("--set", overrides, "override config keys, e.g. --set optim.iterations=2000");
    app.add_option("--threads", threads, "worker threads (0 = all cores)");

    auto* simulate = app.add_subcommand("simulate", "render phantom and write projections");

    auto* reconstruct = app.add_subcommand("reconstruct", "run a reconstruction pipeline");
    std::string method = "gaussian";
    reconstruct->add_option("--method", method,
                            "fbp | iterative | gaussian | gaussian-uniform");

    auto* ablate = app.add_subcommand("ablate", "parameter sweeps");
    std::string sweep = "density-control";
    std::vector<int> counts;
    ablate->add_option("--sweep", sweep, "gaussian-count | density-control");
    ablate->add_option("--counts", counts, "Gaussian counts for the gaussian-count sweep");

    auto* metrics = app.add_subcommand("metrics", "PSNR/SSIM between two volumes");
    std::string vol_a, vol_b;
    metrics->add_option("volume_a", vol_a)->required();
    metrics->add_option("volume_b", vol_b)->required();

    auto* slices = app.add_subcommand("export-slices", "write PGM slices of a volume");
    std::string slice_vol, slice_dir;
    int slice_axis = 2;
    slices->add_option("volume", slice_vol)->required();
    slices->add_option("dir", slice_dir)->required();
    slices->add_option("--axis", slice_axis, "0=x, 1=y, 2=z");

    // allow the global --config/--set/--threads after the subcommand name
    for (CLI::App* s : {simulate, reconstruct, ablate, metrics, slices})
        s->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        if (metrics->parsed()) {
            print_metrics(gaussct::cmd_metrics(vol_a, vol_b));
            return 0;
        }
        if (slices->parsed()) {
            const int n = gaussct::export_slices(gaussct::load_volume(slice_vol), slice_dir,
                                                 slice_axis);
            std::printf("wrote %d slices to %s\n", n, slice_dir.c_str());
            return 0;
        }

        ExperimentConfig cfg = load_config(config_path, overrides);
        if (threads >= 0)
            cfg.threads = threads;

        if (simulate->parsed()) {
            gaussct::cmd_simulate(cfg);
            std::printf("wrote %s/ground_truth.raw and %s/projections.raw\n",
                        cfg.output_dir.c_str(), cfg.output_dir.c_str());
        } else if (reconstruct->parsed()) {
            const auto out = gaussct::cmd_reconstruct(cfg, method);
            std::printf("method: %s\n", method.c_str());
            print_metrics(out.metrics);
        } else if (ablate->parsed()) {
            const auto rows = gaussct::cmd_ablate(cfg, sweep, counts);
            std::printf("%-12s %-14s %-10s %-10s\n", "label", "num_gaussians", "psnr", "ssim");
            for (const auto& r : rows)
                std::printf("%-12s %-14d %-10.4f %-10.6f\n", r.label.c_str(),
                            r.num_gaussians_final, r.metrics.psnr, r.metrics.ssim);
        }
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error (invalid input): %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
