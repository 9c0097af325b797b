#pragma once

#include "gaussct/density_control.hpp"
#include "gaussct/gaussian_model.hpp"
#include "gaussct/geometry.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <vector>

namespace gaussct {

struct OptimConfig {
    int iterations = 30000;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double lr_mu_start = 2e-4;
    double lr_mu_end = 2e-6;
    double lr_sigma_intensity = 0.05;
    double epsilon = 1e-8;
    bool normalize_loss = false; // divide the sum of squares by #detector elements
    int metrics_interval = 50;   // PSNR/SSIM cadence in the training log
};

void validate_optim_config(const OptimConfig& cfg);

// Exponential decay: lr(step) = start * (end/start)^(step/iterations).
double mu_lr_at(int step, const OptimConfig& cfg);

struct LossResult {
    double loss = 0.0;
    VoxelGrid adjoint; // dL/dV = 2 A^T (A V - P)
    VoxelGrid volume;  // rasterized cloud, reused by the caller
};

LossResult loss_and_voxel_adjoint(const GaussianCloud& cloud, const ConeBeamGeometry& geom,
                                  const ProjectionStack& measured, const VoxelGrid& grid_spec,
                                  bool normalize = false);

// Bias-corrected Adam over the three parameter groups (mu, log sigma,
// intensity). Sigma is updated in log space; intensity is clamped to >= 0.
void adam_step(GaussianCloud& cloud, AdamState& state, const std::vector<ParamGrad>& grads,
               double lr_mu, double lr_sigma_intensity, const OptimConfig& cfg);

struct TrainRecord {
    int iteration = 0;
    double loss = 0.0;
    int num_gaussians = 0;
    double psnr = std::numeric_limits<double>::quiet_NaN();
    double ssim = std::numeric_limits<double>::quiet_NaN();
    double wall_ms = 0.0;
    // density-control event columns (zero on non-event iterations)
    int cloned = 0, split = 0, pruned = 0, n_after = 0;
};

struct TrainResult {
    GaussianCloud cloud;
    VoxelGrid volume;
    std::vector<TrainRecord> log;
};

// Full training loop: loss/adjoint -> parameter gradients -> Adam step, with
// density control on its schedule when `density` is provided. `reference`
// enables PSNR/SSIM logging. `post_event_check` (when set) runs after every
// density event, e.g. to assert invariants in test builds.
TrainResult reconstruct_gaussian(
    const ProjectionStack& measured, GaussianCloud init, const VoxelGrid& grid_spec,
    const OptimConfig& cfg, const DensityConfig* density, const VoxelGrid* reference,
    std::mt19937_64& rng,
    const std::function<void(const GaussianCloud&, const AdamState&, const MutationReport&)>&
        post_event_check = nullptr,
    const std::function<void(int, const GaussianCloud&)>& iteration_hook = nullptr);

struct IterativeConfig {
    int iterations = 500;
    double lr = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Voxel-domain baseline: Adam on the same projection-space L2 loss with a
// nonnegativity clamp each step.
VoxelGrid reconstruct_voxel_iterative(const ProjectionStack& measured,
                                      const VoxelGrid& grid_spec, const IterativeConfig& cfg);

} // namespace gaussct
