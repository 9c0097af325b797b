#include "gaussct/initializer.hpp"

#include "gaussct/threading.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gaussct {

namespace {

// Central differences, one-sided at grid borders; per-axis units 1/spacing.
std::vector<double> gradient_norms(const VoxelGrid& g) {
    std::vector<double> out(g.num_voxels());
    const int nx = g.dims[0], ny = g.dims[1], nz = g.dims[2];
    parallel_for(0, static_cast<std::size_t>(nz), [&](std::size_t kz) {
        const int k = static_cast<int>(kz);
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                auto diff = [&](int axis) {
                    int a[3] = {i, j, k};
                    int b[3] = {i, j, k};
                    const int n = g.dims[axis];
                    a[axis] = std::min(a[axis] + 1, n - 1);
                    b[axis] = std::max(b[axis] - 1, 0);
                    const double span = (a[axis] - b[axis]) *
                                        (axis == 0 ? g.spacing.x
                                                   : axis == 1 ? g.spacing.y : g.spacing.z);
                    if (span == 0.0)
                        return 0.0;
                    return (g.at(a[0], a[1], a[2]) - g.at(b[0], b[1], b[2])) / span;
                };
                const double gx = diff(0), gy = diff(1), gz = diff(2);
                out[g.index(i, j, k)] = std::sqrt(gx * gx + gy * gy + gz * gz);
            }
    });
    return out;
}

double percentile_value(const std::vector<double>& sorted, double pct) {
    if (sorted.empty())
        return 0.0;
    const double pos = pct / 100.0 * static_cast<double>(sorted.size() - 1);
    const std::size_t idx =
        std::min(sorted.size() - 1, static_cast<std::size_t>(std::llround(pos)));
    return sorted[idx];
}

// Partial Fisher-Yates draw of `count` items without replacement.
std::vector<std::size_t> sample_without_replacement(std::vector<std::size_t> pool,
                                                    std::size_t count, std::mt19937_64& rng) {
    for (std::size_t i = 0; i < count; ++i) {
        std::uniform_int_distribution<std::size_t> dist(i, pool.size() - 1);
        std::swap(pool[i], pool[dist(rng)]);
    }
    pool.resize(count);
    return pool;
}

} // namespace

void validate_init_config(const InitConfig& cfg) {
    if (cfg.num_gaussians < 1)
        throw std::invalid_argument("init: num_gaussians must be >= 1");
    if (cfg.tau < 0.0 || cfg.tau >= 1.0)
        throw std::invalid_argument("init: tau must be in [0, 1)");
    if (cfg.k_sigma <= 0.0 || cfg.k_intensity <= 0.0)
        throw std::invalid_argument("init: k_sigma and k_intensity must be > 0");
    const auto [lo, hi] = cfg.gradient_band;
    if (lo < 0.0 || hi > 100.0 || lo >= hi)
        throw std::invalid_argument("init: gradient_band must satisfy 0 <= lo < hi <= 100");
}

VoxelGrid threshold_fbp(const VoxelGrid& fbp, double tau) {
    VoxelGrid out = fbp;
    for (double& v : out.data)
        if (!(v > tau))
            v = 0.0;
    return out;
}

std::vector<Vec3> select_centers(const VoxelGrid& thr, int count,
                                 std::array<double, 2> gradient_band, std::mt19937_64& rng,
                                 std::string* warning) {
    if (count < 1)
        throw std::invalid_argument("select_centers: count must be >= 1");

    std::vector<std::size_t> foreground;
    for (std::size_t i = 0; i < thr.data.size(); ++i)
        if (thr.data[i] != 0.0)
            foreground.push_back(i);
    if (foreground.size() < static_cast<std::size_t>(count))
        throw std::runtime_error("select_centers: fewer nonzero voxels than requested centers");

    const std::vector<double> gnorm = gradient_norms(thr);
    std::vector<double> fg_norms(foreground.size());
    for (std::size_t n = 0; n < foreground.size(); ++n)
        fg_norms[n] = gnorm[foreground[n]];
    std::vector<double> sorted = fg_norms;
    std::sort(sorted.begin(), sorted.end());

    double lo = gradient_band[0], hi = gradient_band[1];
    std::vector<std::size_t> band;
    while (true) {
        const double glo = percentile_value(sorted, lo);
        const double ghi = percentile_value(sorted, hi);
        band.clear();
        for (std::size_t n = 0; n < foreground.size(); ++n)
            if (fg_norms[n] >= glo && fg_norms[n] <= ghi)
                band.push_back(foreground[n]);
        if (band.size() >= static_cast<std::size_t>(count) || (lo <= 0.0 && hi >= 100.0))
            break;
        lo = std::max(0.0, lo - 5.0);
        hi = std::min(100.0, hi + 5.0);
        if (warning)
            *warning += "gradient band widened to [" + std::to_string(lo) + ", " +
                        std::to_string(hi) + "]\n";
    }

    const std::vector<std::size_t> chosen =
        sample_without_replacement(std::move(band), static_cast<std::size_t>(count), rng);

    std::vector<Vec3> centers;
    centers.reserve(chosen.size());
    const int nx = thr.dims[0], ny = thr.dims[1];
    for (std::size_t idx : chosen) {
        const int i = static_cast<int>(idx % nx);
        const int j = static_cast<int>((idx / nx) % ny);
        const int k = static_cast<int>(idx / (static_cast<std::size_t>(nx) * ny));
        centers.push_back(thr.voxel_center(i, j, k));
    }
    return centers;
}

std::size_t SpatialHashGrid::CellHash::operator()(const CellKey& k) const {
    // large-prime mix, same idiom as common particle-grid hashes
    const std::size_t h = static_cast<std::size_t>(k.x) * 73856093u ^
                          static_cast<std::size_t>(k.y) * 19349663u ^
                          static_cast<std::size_t>(k.z) * 83492791u;
    return h;
}

SpatialHashGrid::CellKey SpatialHashGrid::key_of(const Vec3& p) const {
    return {static_cast<long long>(std::floor(p.x / cell_)),
            static_cast<long long>(std::floor(p.y / cell_)),
            static_cast<long long>(std::floor(p.z / cell_))};
}

SpatialHashGrid::SpatialHashGrid(const std::vector<Vec3>& points, double cell_size)
    : points_(points), cell_(cell_size) {
    if (cell_ <= 0.0)
        throw std::invalid_argument("SpatialHashGrid: cell size must be > 0");
    for (std::size_t i = 0; i < points_.size(); ++i)
        cells_[key_of(points_[i])].push_back(i);
}

int SpatialHashGrid::count_within(std::size_t self, double r) const {
    const Vec3& p = points_[self];
    const CellKey c = key_of(p);
    const double r2 = r * r;
    int count = 0;
    for (long long dz = -1; dz <= 1; ++dz)
        for (long long dy = -1; dy <= 1; ++dy)
            for (long long dx = -1; dx <= 1; ++dx) {
                const auto it = cells_.find(CellKey{c.x + dx, c.y + dy, c.z + dz});
                if (it == cells_.end())
                    continue;
                for (std::size_t n : it->second)
                    if (n != self && (points_[n] - p).norm2() <= r2)
                        ++count;
            }
    return count;
}

GaussianCloud init_from_fbp(const VoxelGrid& fbp, const InitConfig& cfg, double extent_d,
                            std::mt19937_64& rng, std::string* warning) {
    validate_init_config(cfg);
    const VoxelGrid thr = threshold_fbp(fbp, cfg.tau);
    const std::vector<Vec3> centers =
        select_centers(thr, cfg.num_gaussians, cfg.gradient_band, rng, warning);

    double r = cfg.neighbor_radius;
    if (r <= 0.0)
        r = 2.0 * Vec3{fbp.spacing.x, fbp.spacing.y, fbp.spacing.z}.norm();

    const SpatialHashGrid hash(centers, r);
    std::vector<int> neighbor_counts(centers.size());
    parallel_for(0, centers.size(),
                 [&](std::size_t i) { neighbor_counts[i] = hash.count_within(i, r); });

    const double sigma_cap = extent_d / 3.0;
    std::vector<Gaussian> gs(centers.size());
    for (std::size_t i = 0; i < centers.size(); ++i) {
        gs[i].mu = centers[i];
        gs[i].sigma = std::min(cfg.k_sigma / std::max(neighbor_counts[i], 1), sigma_cap);
        const Vec3 q = thr.world_to_voxel(centers[i]);
        gs[i].intensity =
            cfg.k_intensity * thr.at(static_cast<int>(std::llround(q.x)),
                                     static_cast<int>(std::llround(q.y)),
                                     static_cast<int>(std::llround(q.z)));
    }
    return make_cloud(std::move(gs), extent_d);
}

GaussianCloud init_uniform(const VoxelGrid& fbp, const InitConfig& cfg, double extent_d,
                           std::mt19937_64& rng) {
    validate_init_config(cfg);
    const VoxelGrid thr = threshold_fbp(fbp, cfg.tau);

    std::vector<std::size_t> foreground;
    for (std::size_t i = 0; i < thr.data.size(); ++i)
        if (thr.data[i] != 0.0)
            foreground.push_back(i);
    if (foreground.size() < static_cast<std::size_t>(cfg.num_gaussians))
        throw std::runtime_error("init_uniform: foreground smaller than num_gaussians");

    const std::vector<std::size_t> chosen = sample_without_replacement(
        std::move(foreground), static_cast<std::size_t>(cfg.num_gaussians), rng);

    const double sigma = std::min(cfg.k_sigma * cfg.uniform_sigma_scale, extent_d / 3.0);
    const double intensity = cfg.k_intensity * cfg.uniform_intensity_level;
    const int nx = thr.dims[0], ny = thr.dims[1];
    std::vector<Gaussian> gs;
    gs.reserve(chosen.size());
    for (std::size_t idx : chosen) {
        const int i = static_cast<int>(idx % nx);
        const int j = static_cast<int>((idx / nx) % ny);
        const int k = static_cast<int>(idx / (static_cast<std::size_t>(nx) * ny));
        gs.push_back(Gaussian{thr.voxel_center(i, j, k), sigma, intensity});
    }
    return make_cloud(std::move(gs), extent_d);
}

} // namespace gaussct
