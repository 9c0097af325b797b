#include "gaussct/experiment.hpp"

#include "gaussct/io.hpp"
#include "gaussct/phantom.hpp"
#include "gaussct/threading.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>

namespace gaussct {

namespace {

using nlohmann::json;

// Strict object reader: every key must be consumed, unknown keys are
// rejected with a field-level message.
class StrictObject {
public:
    StrictObject(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object())
            throw std::invalid_argument("config: " + path_ + " must be an object");
    }

    template <class T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        if (auto it = j_.find(key); it != j_.end()) {
            try {
                out = it->get<T>();
            } catch (const json::exception&) {
                throw std::invalid_argument("config: invalid value for " + path_ + "." + key);
            }
        }
    }

    bool has(const char* key) const { return j_.contains(key); }

    const json* child(const char* key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it != j_.end() ? &*it : nullptr;
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key()))
                throw std::invalid_argument("config: unknown key " + path_ + "." + it.key());
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

std::string csv_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

void write_metrics_csv(const std::string& path, const MetricReport& m) {
    std::ofstream f(path);
    if (!f)
        throw std::runtime_error("cannot open for writing: " + path);
    f << "psnr,ssim\n" << csv_num(m.psnr) << "," << csv_num(m.ssim) << "\n";
}

void write_train_csv(const std::string& path, const std::vector<TrainRecord>& log) {
    std::ofstream f(path);
    if (!f)
        throw std::runtime_error("cannot open for writing: " + path);
    f << "iteration,loss,num_gaussians,psnr,ssim,wall_ms,cloned,split,pruned,n_after\n";
    for (const TrainRecord& r : log) {
        f << r.iteration << "," << csv_num(r.loss) << "," << r.num_gaussians << ","
          << (std::isnan(r.psnr) ? "" : csv_num(r.psnr)) << ","
          << (std::isnan(r.ssim) ? "" : csv_num(r.ssim)) << "," << csv_num(r.wall_ms) << ","
          << r.cloned << "," << r.split << "," << r.pruned << "," << r.n_after << "\n";
    }
}

VoxelGrid source_volume(const ExperimentConfig& cfg) {
    if (!cfg.volume_path.empty())
        return load_volume(cfg.volume_path);
    if (cfg.phantom == "abdomen")
        return render_ellipsoid_phantom(abdomen_phantom(), cfg.grid_spec());
    if (cfg.phantom == "chest")
        return render_ellipsoid_phantom(chest_phantom(), cfg.grid_spec());
    throw std::invalid_argument("config: phantom must be 'abdomen' or 'chest' (got '" +
                                cfg.phantom + "')");
}

struct GaussianRunInputs {
    const ProjectionStack& measured;
    const VoxelGrid& ground_truth;
    const VoxelGrid& grid_spec;
};

TrainResult run_gaussian(const ExperimentConfig& cfg, const GaussianRunInputs& in,
                         bool uniform_init, bool density_on, int num_gaussians_override,
                         const std::string& checkpoint_base = std::string()) {
    ExperimentConfig c = cfg;
    if (num_gaussians_override > 0)
        c.init.num_gaussians = num_gaussians_override;

    std::mt19937_64 rng(c.seed);
    const VoxelGrid fbp = fbp_reconstruct(in.measured, in.grid_spec, c.fbp_filter);
    GaussianCloud cloud = uniform_init ? init_uniform(fbp, c.init, c.extent_d, rng)
                                       : init_from_fbp(fbp, c.init, c.extent_d, rng);

    std::function<void(int, const GaussianCloud&)> hook;
    if (c.checkpoint_interval > 0 && !checkpoint_base.empty()) {
        hook = [&c, checkpoint_base](int step, const GaussianCloud& cl) {
            if ((step + 1) % c.checkpoint_interval == 0)
                save_cloud(cl, checkpoint_base + "_" + std::to_string(step + 1) + ".raw",
                           step + 1);
        };
    }

    return reconstruct_gaussian(in.measured, std::move(cloud), in.grid_spec, c.optim,
                                density_on ? &c.density : nullptr, &in.ground_truth, rng,
                                nullptr, hook);
}

} // namespace

VoxelGrid ExperimentConfig::grid_spec() const { return default_grid(grid_dims); }

ConeBeamGeometry ExperimentConfig::geometry() const {
    return make_semicircle_geometry(num_views, detector_shape, source_distance,
                                    detector_distance, detector_pixel_size);
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    ExperimentConfig c;
    StrictObject root(j, "");
    root.get("seed", c.seed);
    root.get("threads", c.threads);
    root.get("output_dir", c.output_dir);
    root.get("phantom", c.phantom);
    root.get("volume_path", c.volume_path);

    if (const json* g = root.child("grid")) {
        StrictObject o(*g, "grid");
        o.get("dims", c.grid_dims);
        o.finish();
    }
    if (const json* g = root.child("geometry")) {
        StrictObject o(*g, "geometry");
        o.get("num_views", c.num_views);
        o.get("detector_shape", c.detector_shape);
        o.get("source_distance", c.source_distance);
        o.get("detector_distance", c.detector_distance);
        o.get("pixel_size", c.detector_pixel_size);
        o.finish();
    }
    if (const json* g = root.child("fbp")) {
        StrictObject o(*g, "fbp");
        o.get("frequency_scaling", c.fbp_filter.frequency_scaling);
        o.finish();
    }
    if (const json* g = root.child("init")) {
        StrictObject o(*g, "init");
        o.get("method", c.init_method);
        o.get("num_gaussians", c.init.num_gaussians);
        o.get("tau", c.init.tau);
        o.get("neighbor_radius", c.init.neighbor_radius);
        o.get("k_sigma", c.init.k_sigma);
        o.get("k_intensity", c.init.k_intensity);
        o.get("gradient_band", c.init.gradient_band);
        o.get("uniform_sigma_scale", c.init.uniform_sigma_scale);
        o.get("uniform_intensity_level", c.init.uniform_intensity_level);
        o.finish();
    }
    if (const json* g = root.child("optim")) {
        StrictObject o(*g, "optim");
        o.get("iterations", c.optim.iterations);
        o.get("beta1", c.optim.beta1);
        o.get("beta2", c.optim.beta2);
        o.get("lr_mu_start", c.optim.lr_mu_start);
        o.get("lr_mu_end", c.optim.lr_mu_end);
        o.get("lr_sigma_intensity", c.optim.lr_sigma_intensity);
        o.get("epsilon", c.optim.epsilon);
        o.get("normalize_loss", c.optim.normalize_loss);
        o.get("metrics_interval", c.optim.metrics_interval);
        o.get("checkpoint_interval", c.checkpoint_interval);
        o.finish();
    }
    if (const json* g = root.child("iterative")) {
        StrictObject o(*g, "iterative");
        o.get("iterations", c.iterative.iterations);
        o.get("lr", c.iterative.lr);
        o.get("beta1", c.iterative.beta1);
        o.get("beta2", c.iterative.beta2);
        o.get("epsilon", c.iterative.epsilon);
        o.finish();
    }
    if (const json* g = root.child("density")) {
        StrictObject o(*g, "density");
        o.get("enabled", c.density_enabled);
        o.get("extent_d", c.extent_d);
        o.get("start_iteration", c.density.start_iteration);
        o.get("interval", c.density.interval);
        o.get("grad_threshold", c.density.grad_threshold);
        o.get("min_intensity", c.density.min_intensity);
        o.get("max_sigma", c.density.max_sigma);
        o.get("max_gaussians", c.density.max_gaussians);
        o.get("split_sigma_factor", c.density.split_sigma_factor);
        o.finish();
    }
    root.finish();
    c.validate();
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream f(path);
    if (!f)
        throw std::runtime_error("cannot open config: " + path);
    json j;
    f >> j;
    return from_json(j);
}

json ExperimentConfig::to_json() const {
    return json{
        {"seed", seed},
        {"threads", threads},
        {"output_dir", output_dir},
        {"phantom", phantom},
        {"volume_path", volume_path},
        {"grid", {{"dims", grid_dims}}},
        {"geometry",
         {{"num_views", num_views},
          {"detector_shape", detector_shape},
          {"source_distance", source_distance},
          {"detector_distance", detector_distance},
          {"pixel_size", detector_pixel_size}}},
        {"fbp", {{"frequency_scaling", fbp_filter.frequency_scaling}}},
        {"init",
         {{"method", init_method},
          {"num_gaussians", init.num_gaussians},
          {"tau", init.tau},
          {"neighbor_radius", init.neighbor_radius},
          {"k_sigma", init.k_sigma},
          {"k_intensity", init.k_intensity},
          {"gradient_band", init.gradient_band},
          {"uniform_sigma_scale", init.uniform_sigma_scale},
          {"uniform_intensity_level", init.uniform_intensity_level}}},
        {"optim",
         {{"iterations", optim.iterations},
          {"beta1", optim.beta1},
          {"beta2", optim.beta2},
          {"lr_mu_start", optim.lr_mu_start},
          {"lr_mu_end", optim.lr_mu_end},
          {"lr_sigma_intensity", optim.lr_sigma_intensity},
          {"epsilon", optim.epsilon},
          {"normalize_loss", optim.normalize_loss},
          {"metrics_interval", optim.metrics_interval},
          {"checkpoint_interval", checkpoint_interval}}},
        {"iterative",
         {{"iterations", iterative.iterations},
          {"lr", iterative.lr},
          {"beta1", iterative.beta1},
          {"beta2", iterative.beta2},
          {"epsilon", iterative.epsilon}}},
        {"density",
         {{"enabled", density_enabled},
          {"extent_d", extent_d},
          {"start_iteration", density.start_iteration},
          {"interval", density.interval},
          {"grad_threshold", density.grad_threshold},
          {"min_intensity", density.min_intensity},
          {"max_sigma", density.max_sigma},
          {"max_gaussians", density.max_gaussians},
          {"split_sigma_factor", density.split_sigma_factor}}}};
}

void ExperimentConfig::validate() const {
    grid_spec();
    validate_geometry(geometry());
    validate_init_config(init);
    validate_optim_config(optim);
    validate_density_config(density);
    if (init_method != "fbp" && init_method != "uniform")
        throw std::invalid_argument("config: init.method must be 'fbp' or 'uniform'");
    if (volume_path.empty() && phantom != "abdomen" && phantom != "chest")
        throw std::invalid_argument("config: phantom must be 'abdomen' or 'chest'");
    if (extent_d <= 0.0)
        throw std::invalid_argument("config: density.extent_d must be > 0");
    if (fbp_filter.frequency_scaling <= 0.0 || fbp_filter.frequency_scaling > 1.0)
        throw std::invalid_argument("config: fbp.frequency_scaling must be in (0,1]");
}

void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw std::invalid_argument("override must look like key.path=value: " + assignment);
    const std::string path = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);

    json value;
    try {
        value = json::parse(raw);
    } catch (const json::exception&) {
        value = raw; // plain string
    }

    json* node = &doc;
    std::size_t pos = 0;
    while (true) {
        const std::size_t dot = path.find('.', pos);
        const std::string key = path.substr(pos, dot - pos);
        if (key.empty())
            throw std::invalid_argument("override has an empty path segment: " + assignment);
        if (dot == std::string::npos) {
            (*node)[key] = value;
            break;
        }
        node = &(*node)[key];
        pos = dot + 1;
    }
}

void cmd_simulate(const ExperimentConfig& cfg) {
    set_thread_count(cfg.threads);
    std::filesystem::create_directories(cfg.output_dir);
    const VoxelGrid truth = source_volume(cfg);
    const ProjectionStack proj = forward_project(truth, cfg.geometry());
    save_volume(truth, cfg.output_dir + "/ground_truth.raw");
    save_projections(proj, cfg.output_dir + "/projections.raw");
}

ReconstructOutcome cmd_reconstruct(const ExperimentConfig& cfg, const std::string& method) {
    set_thread_count(cfg.threads);
    std::filesystem::create_directories(cfg.output_dir);
    const ProjectionStack measured = load_projections(cfg.output_dir + "/projections.raw");
    const VoxelGrid truth = load_volume(cfg.output_dir + "/ground_truth.raw");
    const VoxelGrid spec = cfg.grid_spec();
    const GaussianRunInputs in{measured, truth, spec};

    ReconstructOutcome out;
    if (method == "fbp") {
        out.volume = fbp_reconstruct(measured, spec, cfg.fbp_filter);
    } else if (method == "iterative") {
        out.volume = reconstruct_voxel_iterative(measured, spec, cfg.iterative);
    } else if (method == "gaussian" || method == "gaussian-uniform") {
        const bool uniform = (method == "gaussian-uniform") || cfg.init_method == "uniform";
        TrainResult res = run_gaussian(cfg, in, uniform, cfg.density_enabled, 0,
                                       cfg.output_dir + "/cloud_" + method);
        out.volume = std::move(res.volume);
        write_train_csv(cfg.output_dir + "/train_" + method + ".csv", res.log);
        save_cloud(res.cloud, cfg.output_dir + "/cloud_" + method + ".raw",
                   cfg.optim.iterations);
    } else {
        throw std::invalid_argument("unknown reconstruction method: " + method);
    }

    out.metrics = compare_volumes(out.volume, truth, 1.0);
    save_volume(out.volume, cfg.output_dir + "/recon_" + method + ".raw");
    export_slices(out.volume, cfg.output_dir + "/slices_" + method, 2);
    write_metrics_csv(cfg.output_dir + "/metrics_" + method + ".csv", out.metrics);
    return out;
}

std::vector<AblationRow> cmd_ablate(const ExperimentConfig& cfg, const std::string& sweep,
                                    const std::vector<int>& counts) {
    set_thread_count(cfg.threads);
    std::filesystem::create_directories(cfg.output_dir);
    const ProjectionStack measured = load_projections(cfg.output_dir + "/projections.raw");
    const VoxelGrid truth = load_volume(cfg.output_dir + "/ground_truth.raw");
    const VoxelGrid spec = cfg.grid_spec();
    const GaussianRunInputs in{measured, truth, spec};
    const bool uniform = cfg.init_method == "uniform";

    std::vector<AblationRow> rows;
    if (sweep == "gaussian-count") {
        if (counts.empty())
            throw std::invalid_argument("ablate: empty sweep list");
        for (int n : counts) {
            TrainResult res = run_gaussian(cfg, in, uniform, /*density_on=*/false, n);
            rows.push_back(AblationRow{std::to_string(n),
                                       static_cast<int>(res.cloud.size()),
                                       compare_volumes(res.volume, truth, 1.0)});
        }
    } else if (sweep == "density-control") {
        TrainResult on = run_gaussian(cfg, in, uniform, /*density_on=*/true, 0);
        rows.push_back(AblationRow{"on", static_cast<int>(on.cloud.size()),
                                   compare_volumes(on.volume, truth, 1.0)});
        // off-run at a matched final budget
        TrainResult off = run_gaussian(cfg, in, uniform, /*density_on=*/false,
                                       static_cast<int>(on.cloud.size()));
        rows.push_back(AblationRow{"off", static_cast<int>(off.cloud.size()),
                                   compare_volumes(off.volume, truth, 1.0)});
    } else {
        throw std::invalid_argument("unknown sweep: " + sweep);
    }

    std::ofstream f(cfg.output_dir + "/ablation_" + sweep + ".csv");
    f << "label,num_gaussians,psnr,ssim\n";
    for (const AblationRow& r : rows)
        f << r.label << "," << r.num_gaussians_final << "," << csv_num(r.metrics.psnr) << ","
          << csv_num(r.metrics.ssim) << "\n";
    return rows;
}

MetricReport cmd_metrics(const std::string& volume_a, const std::string& volume_b) {
    const VoxelGrid a = load_volume(volume_a);
    const VoxelGrid b = load_volume(volume_b);
    return compare_volumes(a, b, 1.0);
}

} // namespace gaussct
