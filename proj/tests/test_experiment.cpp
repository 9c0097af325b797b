#include "gaussct/experiment.hpp"

#include "gaussct/io.hpp"

#include <doctest.h>

#include <stdexcept>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace gaussct;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("gaussct_exp_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// small enough that every subcommand finishes in well under a second
ExperimentConfig tiny_config(const std::string& out_dir) {
    ExperimentConfig c;
    c.output_dir = out_dir;
    c.grid_dims = {16, 16, 16};
    c.num_views = 2;
    c.detector_shape = {12, 20};
    c.detector_pixel_size = {0.18, 0.12};
    c.init.num_gaussians = 10;
    c.optim.iterations = 6;
    c.optim.metrics_interval = 3;
    c.iterative.iterations = 5;
    c.density.start_iteration = 2;
    c.density.interval = 2;
    c.density.max_gaussians = 50;
    c.threads = 2;
    return c;
}

} // namespace

TEST_CASE("config round-trips through JSON") {
    ExperimentConfig c = tiny_config("somewhere");
    c.seed = 777;
    c.phantom = "chest";
    c.init.k_sigma = 0.25;
    c.optim.lr_mu_start = 1e-3;
    c.optim.lr_mu_end = 1e-5;
    c.density_enabled = false;
    const ExperimentConfig r = ExperimentConfig::from_json(c.to_json());
    CHECK(r.seed == 777);
    CHECK(r.phantom == "chest");
    CHECK(r.output_dir == "somewhere");
    CHECK(r.grid_dims == c.grid_dims);
    CHECK(r.detector_shape == c.detector_shape);
    CHECK(r.detector_pixel_size == c.detector_pixel_size);
    CHECK(r.init.k_sigma == 0.25);
    CHECK(r.init.num_gaussians == 10);
    CHECK(r.optim.lr_mu_start == 1e-3);
    CHECK(r.optim.iterations == 6);
    CHECK(r.iterative.iterations == 5);
    CHECK(r.density_enabled == false);
    CHECK(r.density.interval == 2);
    CHECK(r.to_json() == c.to_json());
}

TEST_CASE("config rejects unknown keys and bad values") {
    json j = ExperimentConfig{}.to_json();
    SUBCASE("unknown root key") {
        j["typo_key"] = 1;
        CHECK_THROWS_AS(ExperimentConfig::from_json(j), std::invalid_argument);
    }
    SUBCASE("unknown nested key") {
        j["optim"]["lr"] = 0.1;
        CHECK_THROWS_AS(ExperimentConfig::from_json(j), std::invalid_argument);
    }
    SUBCASE("wrong type") {
        j["geometry"]["num_views"] = "twenty";
        CHECK_THROWS_AS(ExperimentConfig::from_json(j), std::invalid_argument);
    }
    SUBCASE("invalid phantom name") {
        j["phantom"] = "head";
        CHECK_THROWS_AS(ExperimentConfig::from_json(j), std::invalid_argument);
    }
    SUBCASE("invalid init method") {
        j["init"]["method"] = "random";
        CHECK_THROWS_AS(ExperimentConfig::from_json(j), std::invalid_argument);
    }
    SUBCASE("invalid frequency scaling") {
        j["fbp"]["frequency_scaling"] = 0.0;
        CHECK_THROWS_AS(ExperimentConfig::from_json(j), std::invalid_argument);
    }
}

TEST_CASE("config defaults match the documented desk-scale setup") {
    const ExperimentConfig c;
    CHECK(c.grid_dims == std::array<int, 3>{64, 64, 64});
    CHECK(c.num_views == 20);
    CHECK(c.detector_shape == std::array<int, 2>{64, 96});
    CHECK(c.source_distance == 2.0);
    CHECK(c.detector_distance == 2.0);
    CHECK(c.optim.iterations == 500);
    CHECK(c.optim.lr_mu_start == 2e-4);
    CHECK(c.optim.lr_mu_end == 2e-6);
    CHECK(c.optim.lr_sigma_intensity == 0.02);
    CHECK(c.init.tau == 0.05);
    CHECK(c.init.neighbor_radius == 0.0271);
    CHECK(c.extent_d == 0.05);
    CHECK(c.iterative.iterations == 35);
    CHECK(c.iterative.lr == 0.05);
    CHECK(c.density.grad_threshold == 1.0);
    CHECK(c.density.min_intensity == 0.001);
    CHECK(c.density.start_iteration == 100);
    CHECK(c.density.interval == 150);
    CHECK(c.density.max_gaussians == 40000);
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("apply_override edits nested paths with JSON or string values") {
    json j = ExperimentConfig{}.to_json();
    apply_override(j, "optim.iterations=123");
    apply_override(j, "geometry.detector_shape=[32,48]");
    apply_override(j, "phantom=chest");
    apply_override(j, "density.enabled=false");
    const ExperimentConfig c = ExperimentConfig::from_json(j);
    CHECK(c.optim.iterations == 123);
    CHECK(c.detector_shape == std::array<int, 2>{32, 48});
    CHECK(c.phantom == "chest");
    CHECK(c.density_enabled == false);

    CHECK_THROWS_AS(apply_override(j, "no_equals_sign"), std::invalid_argument);
    CHECK_THROWS_AS(apply_override(j, "optim..x=1"), std::invalid_argument);
}

TEST_CASE("simulate writes a loadable ground truth and projection stack") {
    TempDir tmp;
    const ExperimentConfig cfg = tiny_config(tmp.file("out"));
    cmd_simulate(cfg);

    const VoxelGrid truth = load_volume(cfg.output_dir + "/ground_truth.raw");
    CHECK(truth.dims == cfg.grid_dims);
    double hi = 0.0;
    for (double v : truth.data)
        hi = std::max(hi, v);
    CHECK(hi > 0.3); // the phantom is present

    const ProjectionStack proj = load_projections(cfg.output_dir + "/projections.raw");
    CHECK(proj.geometry.num_views() == 2);
    CHECK(proj.geometry.detector_shape == cfg.detector_shape);
    double psum = 0.0;
    for (double v : proj.data)
        psum += v;
    CHECK(psum > 0.0);
}

TEST_CASE("reconstruct: every method writes its artifact set") {
    TempDir tmp;
    const ExperimentConfig cfg = tiny_config(tmp.file("out"));
    cmd_simulate(cfg);

    for (const std::string method : {"fbp", "iterative", "gaussian", "gaussian-uniform"}) {
        const ReconstructOutcome out = cmd_reconstruct(cfg, method);
        CHECK(std::isfinite(out.metrics.psnr));
        CHECK(out.metrics.ssim <= 1.0);
        CHECK(fs::exists(cfg.output_dir + "/recon_" + method + ".raw"));
        CHECK(fs::exists(cfg.output_dir + "/metrics_" + method + ".csv"));
        CHECK(fs::exists(cfg.output_dir + "/slices_" + method + "/slice_0000.pgm"));
        const VoxelGrid rec = load_volume(cfg.output_dir + "/recon_" + method + ".raw");
        CHECK(rec.dims == cfg.grid_dims);
    }
    // trained methods also leave a training log and a final cloud
    for (const std::string method : {"gaussian", "gaussian-uniform"}) {
        CHECK(fs::exists(cfg.output_dir + "/train_" + method + ".csv"));
        const GaussianCloud c = load_cloud(cfg.output_dir + "/cloud_" + method + ".raw");
        CHECK(c.size() >= 1);
    }
    const std::string head = slurp(cfg.output_dir + "/train_gaussian.csv");
    CHECK(head.rfind("iteration,loss,num_gaussians,psnr,ssim,wall_ms,", 0) == 0);

    CHECK_THROWS_AS(cmd_reconstruct(cfg, "sirt"), std::invalid_argument);
}

TEST_CASE("reconstruct honors checkpoint_interval") {
    TempDir tmp;
    ExperimentConfig cfg = tiny_config(tmp.file("out"));
    cfg.checkpoint_interval = 3;
    cmd_simulate(cfg);
    cmd_reconstruct(cfg, "gaussian");
    CHECK(fs::exists(cfg.output_dir + "/cloud_gaussian_3.raw"));
    CHECK(fs::exists(cfg.output_dir + "/cloud_gaussian_6.raw"));
    int it = 0;
    load_cloud(cfg.output_dir + "/cloud_gaussian_3.raw", &it);
    CHECK(it == 3);
}

TEST_CASE("repeated runs produce bit-identical metrics CSVs") {
    TempDir tmp;
    std::string first, first_train;
    for (int run = 0; run < 2; ++run) {
        ExperimentConfig cfg = tiny_config(tmp.file("run" + std::to_string(run)));
        cmd_simulate(cfg);
        cmd_reconstruct(cfg, "gaussian");
        const std::string metrics = slurp(cfg.output_dir + "/metrics_gaussian.csv");
        // wall_ms varies between runs; compare the training log minus that column
        std::string train;
        std::istringstream in(slurp(cfg.output_dir + "/train_gaussian.csv"));
        for (std::string line; std::getline(in, line);) {
            std::istringstream ls(line);
            std::string field;
            int col = 0;
            while (std::getline(ls, field, ',')) {
                if (col != 5) // drop wall_ms
                    train += field + ",";
                ++col;
            }
            train += "\n";
        }
        if (run == 0) {
            first = metrics;
            first_train = train;
        } else {
            CHECK(metrics == first);
            CHECK(train == first_train);
        }
    }
}

TEST_CASE("ablation sweeps write one row per setting") {
    TempDir tmp;
    ExperimentConfig cfg = tiny_config(tmp.file("out"));
    cmd_simulate(cfg);

    SUBCASE("gaussian-count") {
        const auto rows = cmd_ablate(cfg, "gaussian-count", {5, 10});
        REQUIRE(rows.size() == 2);
        CHECK(rows[0].label == "5");
        CHECK(rows[0].num_gaussians_final == 5); // density off: count fixed
        CHECK(rows[1].num_gaussians_final == 10);
        const std::string csv = slurp(cfg.output_dir + "/ablation_gaussian-count.csv");
        CHECK(csv.rfind("label,num_gaussians,psnr,ssim\n", 0) == 0);
    }
    SUBCASE("density-control pairs on/off at a matched budget") {
        const auto rows = cmd_ablate(cfg, "density-control", {});
        REQUIRE(rows.size() == 2);
        CHECK(rows[0].label == "on");
        CHECK(rows[1].label == "off");
        CHECK(rows[1].num_gaussians_final == rows[0].num_gaussians_final);
        CHECK(fs::exists(cfg.output_dir + "/ablation_density-control.csv"));
    }
    SUBCASE("unknown sweep throws") {
        CHECK_THROWS_AS(cmd_ablate(cfg, "sigma", {}), std::invalid_argument);
    }
}

TEST_CASE("cmd_metrics compares two saved volumes") {
    TempDir tmp;
    VoxelGrid a = default_grid({16, 16, 4});
    for (double& v : a.data)
        v = 0.5;
    VoxelGrid b = a;
    for (double& v : b.data)
        v += 0.1;
    save_volume(a, tmp.file("a.raw"));
    save_volume(b, tmp.file("b.raw"));
    const MetricReport m = cmd_metrics(tmp.file("a.raw"), tmp.file("b.raw"));
    CHECK(m.psnr == doctest::Approx(20.0).epsilon(1e-6)); // float storage rounding
}
