#pragma once

#include "gaussct/geometry.hpp"

#include <vector>

namespace gaussct {

// Isotropic 3D Gaussian primitive: value(x) = intensity * exp(-|x-mu|^2 / (2 sigma^2)).
struct Gaussian {
    Vec3 mu;
    double sigma = 0.0;
    double intensity = 0.0;
};

// Gaussian list plus per-Gaussian gradient accumulation used by density
// control. `extent` is the global truncation half-width d: each Gaussian is
// evaluated only inside the axis-aligned box mu +/- d.
struct GaussianCloud {
    std::vector<Gaussian> gaussians;
    std::vector<double> grad_norm_accum; // running sum of |dL/dmu_i|
    std::vector<Vec3> grad_mu_accum;     // running sum of dL/dmu_i (clone direction)
    long grad_accum_steps = 0;           // optimization steps since the last density event
    double extent = 0.05;

    std::size_t size() const { return gaussians.size(); }
    void reset_grad_accum() {
        grad_norm_accum.assign(gaussians.size(), 0.0);
        grad_mu_accum.assign(gaussians.size(), Vec3{});
        grad_accum_steps = 0;
    }
};

GaussianCloud make_cloud(std::vector<Gaussian> gaussians, double extent);

double eval_gaussian(const Gaussian& g, const Vec3& x);

// Sums truncated Gaussian contributions onto voxel centers. Accumulation
// order is canonical (independent of the list order), so the output is
// bit-exact under permutations of the Gaussian list.
VoxelGrid rasterize(const GaussianCloud& cloud, const VoxelGrid& grid_spec);

struct ParamGrad {
    Vec3 d_mu;
    double d_sigma = 0.0;
    double d_intensity = 0.0;
};

// Analytic gradients of the loss w.r.t. each Gaussian's parameters, given
// the voxel-space adjoint dL/dV. Uses the same truncated footprint as
// rasterize.
std::vector<ParamGrad> rasterize_with_grads(const GaussianCloud& cloud,
                                            const VoxelGrid& grid_spec,
                                            const VoxelGrid& voxel_adjoint);

} // namespace gaussct
