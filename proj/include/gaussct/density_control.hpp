#pragma once

#include "gaussct/gaussian_model.hpp"

#include <random>
#include <utility>

namespace gaussct {

struct DensityConfig {
    int start_iteration = 100;
    int interval = 100;
    double grad_threshold = 1e-5; // max permissible mean |dL/dmu|
    double min_intensity = 0.001;
    double max_sigma = 0.0; // <= 0 means 2 * extent
    int max_gaussians = 400000;
    double split_sigma_factor = 1.6;
};

void validate_density_config(const DensityConfig& cfg);

struct MutationReport {
    int cloned = 0;
    int split = 0;
    int pruned = 0;
    int n_after = 0;
};

// Adam moment buffers for the three parameter groups, kept aligned with the
// Gaussian list across density-control events.
struct AdamState {
    std::vector<double> m_mu, v_mu; // 3 per Gaussian
    std::vector<double> m_s, v_s;   // log-sigma
    std::vector<double> m_i, v_i;   // intensity
    long t = 0;

    static AdamState zeros(std::size_t n);
    std::size_t size() const { return m_s.size(); }
};

// Copy A keeps mu; copy B is displaced by sigma/2 along the negative
// gradient direction. Both copies get half the intensity (total mass
// preserved); sigma is unchanged.
std::pair<Gaussian, Gaussian> clone_gaussian(const Gaussian& g, const Vec3& grad_mu);

// Children get sigma / split_sigma_factor and intensity unchanged; positions
// are drawn from Normal(mu, sigma^2 I) and clamped into [0,1]^3.
std::pair<Gaussian, Gaussian> split_gaussian(const Gaussian& g, double split_sigma_factor,
                                             std::mt19937_64& rng);

// Clone/split Gaussians whose mean accumulated |dL/dmu| exceeds the
// threshold (clone when sigma <= d/3, split otherwise), then prune by
// intensity floor and sigma ceiling. Candidates are processed in decreasing
// mean-gradient order until max_gaussians is reached. Resets grad
// accumulators and realigns `state` (clones copy parent moments, split
// children start from zero) when state is non-null.
MutationReport densify_and_prune(GaussianCloud& cloud, AdamState* state,
                                 const DensityConfig& cfg, std::mt19937_64& rng);

} // namespace gaussct
