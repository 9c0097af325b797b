#pragma once

#include "gaussct/gaussian_model.hpp"
#include "gaussct/geometry.hpp"

#include <array>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

namespace gaussct {

struct InitConfig {
    int num_gaussians = 15000;
    double tau = 0.05;          // emptiness threshold
    double neighbor_radius = 0; // world units; <= 0 means 2 voxel diagonals
    double k_sigma = 0.12;
    double k_intensity = 0.3;
    std::array<double, 2> gradient_band{30.0, 90.0}; // percentile (lo, hi)
    // uniform-init baseline: shared sigma = k_sigma * scale, shared
    // intensity = k_intensity * level
    double uniform_sigma_scale = 0.1;
    double uniform_intensity_level = 1.0;
};

void validate_init_config(const InitConfig& cfg);

// Keeps voxels with value > tau, zeroes the rest.
VoxelGrid threshold_fbp(const VoxelGrid& fbp, double tau);

// Ranks nonzero voxels by central-difference gradient norm, restricts to the
// percentile band and samples `count` voxel centers uniformly without
// replacement. Widens the band symmetrically when it holds too few voxels
// (appending to *warning when non-null); throws if nonzero voxels < count.
std::vector<Vec3> select_centers(const VoxelGrid& fbp_thresholded, int count,
                                 std::array<double, 2> gradient_band, std::mt19937_64& rng,
                                 std::string* warning = nullptr);

// FBP-prior initialization: sigma_j = k_sigma / max(N(C_j, r), 1) clamped to
// extent_d/3, I_j = k_intensity * I_FBP(C_j). Neighbor counts are exact
// (uniform spatial hash with cell size r).
GaussianCloud init_from_fbp(const VoxelGrid& fbp, const InitConfig& cfg, double extent_d,
                            std::mt19937_64& rng, std::string* warning = nullptr);

// Ablation baseline: centers uniform over the foreground (> tau), one shared
// (sigma, intensity) pair for every Gaussian.
GaussianCloud init_uniform(const VoxelGrid& fbp, const InitConfig& cfg, double extent_d,
                           std::mt19937_64& rng);

// Exact fixed-radius neighbor counting over a point set.
class SpatialHashGrid {
public:
    SpatialHashGrid(const std::vector<Vec3>& points, double cell_size);
    // Number of points within Euclidean distance <= r of `points[self]`,
    // excluding the point itself.
    int count_within(std::size_t self, double r) const;

private:
    const std::vector<Vec3>& points_;
    double cell_;
    struct CellKey {
        long long x, y, z;
        bool operator==(const CellKey&) const = default;
    };
    struct CellHash {
        std::size_t operator()(const CellKey& k) const;
    };
    CellKey key_of(const Vec3& p) const;
    std::unordered_map<CellKey, std::vector<std::size_t>, CellHash> cells_;
};

} // namespace gaussct
