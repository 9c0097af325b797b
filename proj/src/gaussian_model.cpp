#include "gaussct/gaussian_model.hpp"

#include "gaussct/threading.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gaussct {

namespace {

void validate_cloud(const GaussianCloud& cloud) {
    if (cloud.gaussians.empty())
        throw std::invalid_argument("gaussian cloud is empty");
    if (cloud.extent <= 0.0)
        throw std::invalid_argument("gaussian cloud extent must be > 0");
    for (const Gaussian& g : cloud.gaussians) {
        if (!(g.sigma > 0.0) || !(g.intensity >= 0.0) || !std::isfinite(g.mu.x) ||
            !std::isfinite(g.mu.y) || !std::isfinite(g.mu.z))
            throw std::invalid_argument("gaussian with invalid parameters");
    }
}

struct Footprint {
    int lo[3];
    int hi[3]; // inclusive
    bool empty;
};

Footprint footprint_of(const VoxelGrid& g, const Vec3& mu, double d) {
    Footprint f{};
    const double mu_a[3] = {mu.x, mu.y, mu.z};
    const double or_a[3] = {g.origin.x, g.origin.y, g.origin.z};
    const double sp_a[3] = {g.spacing.x, g.spacing.y, g.spacing.z};
    f.empty = false;
    for (int a = 0; a < 3; ++a) {
        f.lo[a] = std::max(0, static_cast<int>(std::ceil((mu_a[a] - d - or_a[a]) / sp_a[a])));
        f.hi[a] = std::min(g.dims[a] - 1,
                           static_cast<int>(std::floor((mu_a[a] + d - or_a[a]) / sp_a[a])));
        if (f.lo[a] > f.hi[a])
            f.empty = true;
    }
    return f;
}

// Canonical evaluation order: makes per-voxel accumulation independent of
// how the Gaussian list happens to be permuted.
std::vector<std::size_t> canonical_order(const std::vector<Gaussian>& gs) {
    std::vector<std::size_t> idx(gs.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&gs](std::size_t a, std::size_t b) {
        const Gaussian& ga = gs[a];
        const Gaussian& gb = gs[b];
        if (ga.mu.x != gb.mu.x) return ga.mu.x < gb.mu.x;
        if (ga.mu.y != gb.mu.y) return ga.mu.y < gb.mu.y;
        if (ga.mu.z != gb.mu.z) return ga.mu.z < gb.mu.z;
        if (ga.sigma != gb.sigma) return ga.sigma < gb.sigma;
        return ga.intensity < gb.intensity;
    });
    return idx;
}

} // namespace

GaussianCloud make_cloud(std::vector<Gaussian> gaussians, double extent) {
    GaussianCloud c;
    c.gaussians = std::move(gaussians);
    c.extent = extent;
    c.reset_grad_accum();
    validate_cloud(c);
    return c;
}

double eval_gaussian(const Gaussian& g, const Vec3& x) {
    const double r2 = (x - g.mu).norm2();
    return g.intensity * std::exp(-r2 / (2.0 * g.sigma * g.sigma));
}

VoxelGrid rasterize(const GaussianCloud& cloud, const VoxelGrid& grid_spec) {
    validate_cloud(cloud);
    const std::vector<std::size_t> order = canonical_order(cloud.gaussians);
    const double d = cloud.extent;

    VoxelGrid out = like(grid_spec);
    const std::size_t workers = std::min<std::size_t>(thread_count(), order.size());
    std::vector<VoxelGrid> partials(workers > 1 ? workers : 0);
    parallel_chunks(0, order.size(), [&](std::size_t chunk, std::size_t lo, std::size_t hi) {
        VoxelGrid& dst = (workers > 1) ? (partials[chunk] = like(grid_spec)) : out;
        for (std::size_t n = lo; n < hi; ++n) {
            const Gaussian& g = cloud.gaussians[order[n]];
            const Footprint f = footprint_of(dst, g.mu, d);
            if (f.empty)
                continue;
            const double inv2s2 = 1.0 / (2.0 * g.sigma * g.sigma);
            for (int k = f.lo[2]; k <= f.hi[2]; ++k)
                for (int j = f.lo[1]; j <= f.hi[1]; ++j) {
                    double* row = &dst.data[dst.index(f.lo[0], j, k)];
                    for (int i = f.lo[0]; i <= f.hi[0]; ++i) {
                        const Vec3 r = dst.voxel_center(i, j, k) - g.mu;
                        row[i - f.lo[0]] += g.intensity * std::exp(-r.norm2() * inv2s2);
                    }
                }
        }
    });
    for (const VoxelGrid& part : partials) {
        if (part.data.empty())
            continue;
        for (std::size_t i = 0; i < out.data.size(); ++i)
            out.data[i] += part.data[i];
    }
    return out;
}

std::vector<ParamGrad> rasterize_with_grads(const GaussianCloud& cloud,
                                            const VoxelGrid& grid_spec,
                                            const VoxelGrid& voxel_adjoint) {
    validate_cloud(cloud);
    if (!grid_spec.same_shape(voxel_adjoint) ||
        voxel_adjoint.data.size() != voxel_adjoint.num_voxels())
        throw std::invalid_argument("rasterize_with_grads: adjoint shape mismatch");

    const double d = cloud.extent;
    std::vector<ParamGrad> grads(cloud.size());
    parallel_for(0, cloud.size(), [&](std::size_t n) {
        const Gaussian& g = cloud.gaussians[n];
        const Footprint f = footprint_of(voxel_adjoint, g.mu, d);
        if (f.empty)
            return;
        const double s2 = g.sigma * g.sigma;
        const double inv2s2 = 1.0 / (2.0 * s2);
        ParamGrad pg;
        for (int k = f.lo[2]; k <= f.hi[2]; ++k)
            for (int j = f.lo[1]; j <= f.hi[1]; ++j)
                for (int i = f.lo[0]; i <= f.hi[0]; ++i) {
                    const double adj = voxel_adjoint.at(i, j, k);
                    if (adj == 0.0)
                        continue;
                    const Vec3 r = voxel_adjoint.voxel_center(i, j, k) - g.mu;
                    const double r2 = r.norm2();
                    const double e = std::exp(-r2 * inv2s2);
                    const double gi = g.intensity * e;
                    pg.d_mu += (adj * gi / s2) * r;
                    pg.d_sigma += adj * gi * r2 / (s2 * g.sigma);
                    pg.d_intensity += adj * e;
                }
        grads[n] = pg;
    });
    return grads;
}

} // namespace gaussct
