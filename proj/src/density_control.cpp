#include "gaussct/density_control.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gaussct {

void validate_density_config(const DensityConfig& cfg) {
    if (cfg.start_iteration < 0)
        throw std::invalid_argument("density: start_iteration must be >= 0");
    if (cfg.interval < 1)
        throw std::invalid_argument("density: interval must be >= 1");
    if (cfg.grad_threshold <= 0.0)
        throw std::invalid_argument("density: grad_threshold must be > 0");
    if (cfg.min_intensity <= 0.0)
        throw std::invalid_argument("density: min_intensity must be > 0");
    if (cfg.max_gaussians < 1)
        throw std::invalid_argument("density: max_gaussians must be >= 1");
    if (cfg.split_sigma_factor <= 1.0)
        throw std::invalid_argument("density: split_sigma_factor must be > 1");
}

AdamState AdamState::zeros(std::size_t n) {
    AdamState s;
    s.m_mu.assign(3 * n, 0.0);
    s.v_mu.assign(3 * n, 0.0);
    s.m_s.assign(n, 0.0);
    s.v_s.assign(n, 0.0);
    s.m_i.assign(n, 0.0);
    s.v_i.assign(n, 0.0);
    return s;
}

std::pair<Gaussian, Gaussian> clone_gaussian(const Gaussian& g, const Vec3& grad_mu) {
    Gaussian a = g;
    Gaussian b = g;
    a.intensity *= 0.5;
    b.intensity *= 0.5;
    const double n = grad_mu.norm();
    if (n > 0.0)
        b.mu = g.mu - (0.5 * g.sigma / n) * grad_mu;
    return {a, b};
}

std::pair<Gaussian, Gaussian> split_gaussian(const Gaussian& g, double split_sigma_factor,
                                             std::mt19937_64& rng) {
    if (!(g.sigma > 0.0))
        throw std::invalid_argument("split_gaussian: sigma must be > 0");
    std::normal_distribution<double> normal(0.0, g.sigma);
    auto sample_child = [&] {
        Gaussian c = g;
        c.sigma = g.sigma / split_sigma_factor;
        c.mu = {std::clamp(g.mu.x + normal(rng), 0.0, 1.0),
                std::clamp(g.mu.y + normal(rng), 0.0, 1.0),
                std::clamp(g.mu.z + normal(rng), 0.0, 1.0)};
        return c;
    };
    Gaussian a = sample_child();
    Gaussian b = sample_child();
    return {a, b};
}

MutationReport densify_and_prune(GaussianCloud& cloud, AdamState* state,
                                 const DensityConfig& cfg, std::mt19937_64& rng) {
    validate_density_config(cfg);
    if (cloud.grad_accum_steps <= 0)
        throw std::logic_error("densify_and_prune: no optimization steps accumulated");
    if (state && state->size() != cloud.size())
        throw std::invalid_argument("densify_and_prune: optimizer state misaligned");

    const std::size_t n = cloud.size();
    const double inv_steps = 1.0 / static_cast<double>(cloud.grad_accum_steps);
    const double max_sigma = cfg.max_sigma > 0.0 ? cfg.max_sigma : 2.0 * cloud.extent;
    const double sigma_clone_limit = cloud.extent / 3.0;

    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < n; ++i)
        if (cloud.grad_norm_accum[i] * inv_steps > cfg.grad_threshold)
            candidates.push_back(i);
    std::sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
        const double ga = cloud.grad_norm_accum[a];
        const double gb = cloud.grad_norm_accum[b];
        if (ga != gb)
            return ga > gb;
        return a < b;
    });

    // Each densification adds one Gaussian; keep to the hard cap.
    const std::size_t room =
        n < static_cast<std::size_t>(cfg.max_gaussians)
            ? static_cast<std::size_t>(cfg.max_gaussians) - n
            : 0;
    if (candidates.size() > room)
        candidates.resize(room);
    std::vector<char> densify(n, 0);
    for (std::size_t i : candidates)
        densify[i] = 1;

    MutationReport report;
    std::vector<Gaussian> next;
    next.reserve(n + candidates.size());
    AdamState next_state;
    const AdamState old_state = state ? *state : AdamState{};

    auto push = [&](const Gaussian& g, std::size_t parent, bool copy_moments) {
        if (g.intensity < cfg.min_intensity || g.sigma > max_sigma) {
            ++report.pruned;
            return;
        }
        next.push_back(g);
        if (!state)
            return;
        for (int a = 0; a < 3; ++a) {
            next_state.m_mu.push_back(copy_moments ? old_state.m_mu[3 * parent + a] : 0.0);
            next_state.v_mu.push_back(copy_moments ? old_state.v_mu[3 * parent + a] : 0.0);
        }
        next_state.m_s.push_back(copy_moments ? old_state.m_s[parent] : 0.0);
        next_state.v_s.push_back(copy_moments ? old_state.v_s[parent] : 0.0);
        next_state.m_i.push_back(copy_moments ? old_state.m_i[parent] : 0.0);
        next_state.v_i.push_back(copy_moments ? old_state.v_i[parent] : 0.0);
    };

    for (std::size_t i = 0; i < n; ++i) {
        const Gaussian& g = cloud.gaussians[i];
        if (!densify[i]) {
            push(g, i, true);
            continue;
        }
        if (g.sigma <= sigma_clone_limit) {
            const auto [a, b] = clone_gaussian(g, cloud.grad_mu_accum[i] * inv_steps);
            push(a, i, true);
            push(b, i, true);
            ++report.cloned;
        } else {
            const auto [a, b] = split_gaussian(g, cfg.split_sigma_factor, rng);
            push(a, i, false);
            push(b, i, false);
            ++report.split;
        }
    }

    if (next.empty())
        throw std::runtime_error("densify_and_prune: all Gaussians pruned");
    cloud.gaussians = std::move(next);
    cloud.reset_grad_accum();
    if (state) {
        next_state.t = old_state.t;
        *state = std::move(next_state);
    }
    report.n_after = static_cast<int>(cloud.size());
    return report;
}

} // namespace gaussct
