#include "gaussct/phantom.hpp"

#include "gaussct/threading.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gaussct {

namespace {

bool contains(const Ellipsoid& e, const Vec3& p) {
    const Vec3 d = p - e.center;
    const double c = std::cos(e.rotation_z), s = std::sin(e.rotation_z);
    const double rx = c * d.x + s * d.y;
    const double ry = -s * d.x + c * d.y;
    const double rz = d.z;
    const double q = (rx / e.semi_axes.x) * (rx / e.semi_axes.x) +
                     (ry / e.semi_axes.y) * (ry / e.semi_axes.y) +
                     (rz / e.semi_axes.z) * (rz / e.semi_axes.z);
    return q <= 1.0;
}

} // namespace

VoxelGrid render_ellipsoid_phantom(const std::vector<Ellipsoid>& spec,
                                   const VoxelGrid& grid_spec) {
    if (spec.empty())
        throw std::invalid_argument("render_ellipsoid_phantom: empty spec");
    for (const Ellipsoid& e : spec)
        if (e.semi_axes.x <= 0.0 || e.semi_axes.y <= 0.0 || e.semi_axes.z <= 0.0)
            throw std::invalid_argument("render_ellipsoid_phantom: semi-axes must be > 0");

    VoxelGrid out = like(grid_spec);
    parallel_for(0, static_cast<std::size_t>(out.dims[2]), [&](std::size_t kz) {
        const int k = static_cast<int>(kz);
        for (int j = 0; j < out.dims[1]; ++j)
            for (int i = 0; i < out.dims[0]; ++i) {
                const Vec3 p = out.voxel_center(i, j, k);
                double v = 0.0;
                for (const Ellipsoid& e : spec)
                    if (contains(e, p))
                        v += e.intensity;
                out.at(i, j, k) = std::clamp(v, 0.0, 1.0);
            }
    });
    return out;
}

std::vector<Ellipsoid> abdomen_phantom() {
    return {
        // body
        {{0.50, 0.50, 0.50}, {0.40, 0.30, 0.42}, 0.0, 0.40},
        // liver-like organ
        {{0.38, 0.58, 0.55}, {0.16, 0.12, 0.20}, 0.4, 0.18},
        // kidney pair
        {{0.36, 0.40, 0.42}, {0.06, 0.045, 0.09}, 0.5, 0.22},
        {{0.64, 0.40, 0.42}, {0.06, 0.045, 0.09}, -0.5, 0.22},
        // spine-like column
        {{0.50, 0.30, 0.50}, {0.055, 0.05, 0.36}, 0.0, 0.45},
        // bowel gas pocket (darker)
        {{0.58, 0.62, 0.44}, {0.09, 0.07, 0.10}, 0.2, -0.25},
        // small high-contrast inserts
        {{0.46, 0.52, 0.62}, {0.022, 0.022, 0.022}, 0.0, 0.55},
        {{0.60, 0.50, 0.58}, {0.018, 0.018, 0.018}, 0.0, 0.55},
        {{0.42, 0.44, 0.38}, {0.015, 0.015, 0.015}, 0.0, 0.55},
    };
}

std::vector<Ellipsoid> chest_phantom() {
    return {
        // body
        {{0.50, 0.50, 0.50}, {0.42, 0.30, 0.42}, 0.0, 0.40},
        // lungs (carved darker)
        {{0.34, 0.50, 0.52}, {0.16, 0.17, 0.30}, 0.15, -0.30},
        {{0.66, 0.50, 0.52}, {0.16, 0.17, 0.30}, -0.15, -0.30},
        // mediastinum / heart
        {{0.50, 0.56, 0.42}, {0.10, 0.10, 0.12}, 0.0, 0.12},
        // spine
        {{0.50, 0.26, 0.50}, {0.05, 0.045, 0.36}, 0.0, 0.45},
        // airway-like thin tubes of high contrast
        {{0.50, 0.48, 0.62}, {0.018, 0.018, 0.22}, 0.0, 0.55},
        {{0.38, 0.50, 0.55}, {0.012, 0.012, 0.16}, 0.0, 0.55},
        {{0.62, 0.50, 0.55}, {0.012, 0.012, 0.16}, 0.0, 0.55},
    };
}

} // namespace gaussct
