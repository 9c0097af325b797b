#include "gaussct/optimizer.hpp"

#include "gaussct/metrics.hpp"
#include "gaussct/projector.hpp"
#include "gaussct/threading.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace gaussct {

void validate_optim_config(const OptimConfig& cfg) {
    if (cfg.iterations < 0)
        throw std::invalid_argument("optim: iterations must be >= 0");
    if (cfg.beta1 < 0.0 || cfg.beta1 >= 1.0 || cfg.beta2 < 0.0 || cfg.beta2 >= 1.0)
        throw std::invalid_argument("optim: betas must lie in [0, 1)");
    if (cfg.lr_mu_start <= 0.0 || cfg.lr_mu_end <= 0.0 || cfg.lr_sigma_intensity <= 0.0)
        throw std::invalid_argument("optim: learning rates must be > 0");
    if (cfg.lr_mu_end > cfg.lr_mu_start)
        throw std::invalid_argument("optim: lr_mu_end must be <= lr_mu_start");
    if (cfg.epsilon <= 0.0)
        throw std::invalid_argument("optim: epsilon must be > 0");
}

double mu_lr_at(int step, const OptimConfig& cfg) {
    if (cfg.iterations == 0)
        return cfg.lr_mu_start;
    const double t = static_cast<double>(step) / static_cast<double>(cfg.iterations);
    return cfg.lr_mu_start * std::pow(cfg.lr_mu_end / cfg.lr_mu_start, t);
}

LossResult loss_and_voxel_adjoint(const GaussianCloud& cloud, const ConeBeamGeometry& geom,
                                  const ProjectionStack& measured, const VoxelGrid& grid_spec,
                                  bool normalize) {
    if (measured.data.size() != geom.num_elements())
        throw std::invalid_argument("loss: measured stack inconsistent with geometry");

    LossResult res;
    res.volume = rasterize(cloud, grid_spec);
    ProjectionStack predicted = forward_project(res.volume, geom);

    double loss = 0.0;
    for (std::size_t i = 0; i < predicted.data.size(); ++i) {
        predicted.data[i] -= measured.data[i]; // residual in place
        loss += predicted.data[i] * predicted.data[i];
    }
    const double scale = normalize ? 1.0 / static_cast<double>(predicted.data.size()) : 1.0;
    res.loss = loss * scale;

    res.adjoint = back_project(predicted, grid_spec);
    const double adj_scale = 2.0 * scale;
    for (double& v : res.adjoint.data)
        v *= adj_scale;
    return res;
}

void adam_step(GaussianCloud& cloud, AdamState& state, const std::vector<ParamGrad>& grads,
               double lr_mu, double lr_sigma_intensity, const OptimConfig& cfg) {
    const std::size_t n = cloud.size();
    if (grads.size() != n || state.size() != n)
        throw std::invalid_argument("adam_step: state/gradient size misaligned");

    state.t += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));

    auto update = [&](double& m, double& v, double grad, double lr, double param) {
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad * grad;
        const double mh = m / bc1;
        const double vh = v / bc2;
        return param - lr * mh / (std::sqrt(vh) + cfg.epsilon);
    };

    parallel_for(0, n, [&](std::size_t i) {
        Gaussian& g = cloud.gaussians[i];
        const ParamGrad& pg = grads[i];
        g.mu.x = update(state.m_mu[3 * i + 0], state.v_mu[3 * i + 0], pg.d_mu.x, lr_mu, g.mu.x);
        g.mu.y = update(state.m_mu[3 * i + 1], state.v_mu[3 * i + 1], pg.d_mu.y, lr_mu, g.mu.y);
        g.mu.z = update(state.m_mu[3 * i + 2], state.v_mu[3 * i + 2], pg.d_mu.z, lr_mu, g.mu.z);
        // sigma is optimized as s = ln(sigma); dL/ds = sigma * dL/dsigma
        const double s = update(state.m_s[i], state.v_s[i], g.sigma * pg.d_sigma,
                                lr_sigma_intensity, std::log(g.sigma));
        g.sigma = std::exp(s);
        g.intensity = std::max(0.0, update(state.m_i[i], state.v_i[i], pg.d_intensity,
                                           lr_sigma_intensity, g.intensity));
    });
}

TrainResult reconstruct_gaussian(
    const ProjectionStack& measured, GaussianCloud init, const VoxelGrid& grid_spec,
    const OptimConfig& cfg, const DensityConfig* density, const VoxelGrid* reference,
    std::mt19937_64& rng,
    const std::function<void(const GaussianCloud&, const AdamState&, const MutationReport&)>&
        post_event_check,
    const std::function<void(int, const GaussianCloud&)>& iteration_hook) {
    validate_optim_config(cfg);
    if (density)
        validate_density_config(*density);

    TrainResult out;
    out.cloud = std::move(init);
    out.cloud.reset_grad_accum();
    AdamState state = AdamState::zeros(out.cloud.size());

    for (int step = 0; step < cfg.iterations; ++step) {
        const auto t0 = std::chrono::steady_clock::now();

        LossResult lr = loss_and_voxel_adjoint(out.cloud, measured.geometry, measured,
                                               grid_spec, cfg.normalize_loss);
        if (!std::isfinite(lr.loss))
            throw std::runtime_error("reconstruct_gaussian: non-finite loss at iteration " +
                                     std::to_string(step));

        const std::vector<ParamGrad> grads =
            rasterize_with_grads(out.cloud, grid_spec, lr.adjoint);
        for (std::size_t i = 0; i < grads.size(); ++i) {
            out.cloud.grad_norm_accum[i] += grads[i].d_mu.norm();
            out.cloud.grad_mu_accum[i] += grads[i].d_mu;
        }
        out.cloud.grad_accum_steps += 1;

        adam_step(out.cloud, state, grads, mu_lr_at(step, cfg), cfg.lr_sigma_intensity, cfg);

        TrainRecord rec;
        rec.iteration = step;
        rec.loss = lr.loss;
        rec.num_gaussians = static_cast<int>(out.cloud.size());

        const int done = step + 1;
        if (density && done >= density->start_iteration &&
            (done - density->start_iteration) % density->interval == 0 &&
            out.cloud.grad_accum_steps > 0) {
            const MutationReport rep = densify_and_prune(out.cloud, &state, *density, rng);
            rec.cloned = rep.cloned;
            rec.split = rep.split;
            rec.pruned = rep.pruned;
            rec.n_after = rep.n_after;
            rec.num_gaussians = rep.n_after;
            if (post_event_check)
                post_event_check(out.cloud, state, rep);
        }

        if (reference && cfg.metrics_interval > 0 &&
            (step % cfg.metrics_interval == 0 || step == cfg.iterations - 1)) {
            rec.psnr = psnr(lr.volume, *reference, 1.0);
            rec.ssim = ssim(lr.volume, *reference, 1.0);
        }
        rec.wall_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
        out.log.push_back(rec);
        if (iteration_hook)
            iteration_hook(step, out.cloud);
    }

    out.volume = rasterize(out.cloud, grid_spec);
    return out;
}

VoxelGrid reconstruct_voxel_iterative(const ProjectionStack& measured,
                                      const VoxelGrid& grid_spec, const IterativeConfig& cfg) {
    if (cfg.iterations < 0 || cfg.lr <= 0.0)
        throw std::invalid_argument("iterative: invalid config");

    VoxelGrid vol = like(grid_spec);
    const std::size_t n = vol.data.size();
    std::vector<double> m(n, 0.0), v(n, 0.0);

    for (int step = 0; step < cfg.iterations; ++step) {
        ProjectionStack predicted = forward_project(vol, measured.geometry);
        double loss = 0.0;
        for (std::size_t i = 0; i < predicted.data.size(); ++i) {
            predicted.data[i] -= measured.data[i];
            loss += predicted.data[i] * predicted.data[i];
        }
        if (!std::isfinite(loss))
            throw std::runtime_error("reconstruct_voxel_iterative: non-finite loss");
        VoxelGrid grad = back_project(predicted, grid_spec);

        const double bc1 = 1.0 - std::pow(cfg.beta1, step + 1);
        const double bc2 = 1.0 - std::pow(cfg.beta2, step + 1);
        parallel_for(0, n, [&](std::size_t i) {
            const double g = 2.0 * grad.data[i];
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
            vol.data[i] = std::max(
                0.0, vol.data[i] - cfg.lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + cfg.epsilon));
        });
    }
    return vol;
}

} // namespace gaussct
