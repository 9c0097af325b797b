#include "gaussct/geometry.hpp"

#include <numbers>
#include <stdexcept>

namespace gaussct {

VoxelGrid make_grid(std::array<int, 3> dims, Vec3 origin, Vec3 spacing) {
    if (dims[0] < 1 || dims[1] < 1 || dims[2] < 1)
        throw std::invalid_argument("make_grid: dims components must be >= 1");
    if (spacing.x <= 0.0 || spacing.y <= 0.0 || spacing.z <= 0.0)
        throw std::invalid_argument("make_grid: spacing components must be > 0");

    const double lo[3] = {origin.x - 0.5 * spacing.x, origin.y - 0.5 * spacing.y,
                          origin.z - 0.5 * spacing.z};
    const double hi[3] = {origin.x + (dims[0] - 0.5) * spacing.x,
                          origin.y + (dims[1] - 0.5) * spacing.y,
                          origin.z + (dims[2] - 0.5) * spacing.z};
    const double eps = 1e-9;
    for (int a = 0; a < 3; ++a) {
        if (lo[a] < -eps || hi[a] > 1.0 + eps)
            throw std::invalid_argument("make_grid: bounding box exceeds the [0,1]^3 cube");
    }

    VoxelGrid g;
    g.dims = dims;
    g.origin = origin;
    g.spacing = spacing;
    g.data.assign(g.num_voxels(), 0.0);
    return g;
}

VoxelGrid default_grid(std::array<int, 3> dims) {
    const int m = std::max({dims[0], dims[1], dims[2]});
    const double sp = 1.0 / m;
    Vec3 origin{0.5 - 0.5 * sp * (dims[0] - 1), 0.5 - 0.5 * sp * (dims[1] - 1),
                0.5 - 0.5 * sp * (dims[2] - 1)};
    return make_grid(dims, origin, {sp, sp, sp});
}

VoxelGrid like(const VoxelGrid& g) {
    VoxelGrid out = g;
    out.data.assign(out.num_voxels(), 0.0);
    return out;
}

ProjectionStack make_projection_stack(const ConeBeamGeometry& geom) {
    ProjectionStack p;
    p.geometry = geom;
    p.data.assign(geom.num_elements(), 0.0);
    return p;
}

ConeBeamGeometry make_semicircle_geometry(int num_views, std::array<int, 2> detector_shape,
                                          double source_distance, double detector_distance,
                                          std::array<double, 2> pixel_size) {
    if (num_views < 1)
        throw std::invalid_argument("make_semicircle_geometry: num_views must be >= 1");
    if (source_distance <= 0.0 || detector_distance <= 0.0)
        throw std::invalid_argument("make_semicircle_geometry: distances must be > 0");
    if (pixel_size[0] <= 0.0 || pixel_size[1] <= 0.0)
        throw std::invalid_argument("make_semicircle_geometry: pixel sizes must be > 0");
    if (detector_shape[0] < 1 || detector_shape[1] < 1)
        throw std::invalid_argument("make_semicircle_geometry: detector shape must be >= 1");

    ConeBeamGeometry g;
    g.source_distance = source_distance;
    g.detector_distance = detector_distance;
    g.detector_shape = detector_shape;
    g.detector_pixel_size = pixel_size;
    g.angles.resize(num_views);
    for (int k = 0; k < num_views; ++k)
        g.angles[k] = k * std::numbers::pi / num_views;
    return g;
}

void validate_geometry(const ConeBeamGeometry& geom) {
    if (geom.detector_shape[0] < 1 || geom.detector_shape[1] < 1)
        throw std::invalid_argument("geometry: detector shape must be >= 1");
    if (geom.detector_pixel_size[0] <= 0.0 || geom.detector_pixel_size[1] <= 0.0)
        throw std::invalid_argument("geometry: pixel sizes must be > 0");
    if (geom.source_distance <= 0.0 || geom.detector_distance <= 0.0)
        throw std::invalid_argument("geometry: distances must be > 0");
    if (geom.angles.empty())
        throw std::invalid_argument("geometry: at least one view angle required");
    const double two_pi = 2.0 * std::numbers::pi;
    for (std::size_t i = 0; i < geom.angles.size(); ++i) {
        if (geom.angles[i] < 0.0 || geom.angles[i] >= two_pi)
            throw std::invalid_argument("geometry: angles must lie in [0, 2pi)");
        if (i > 0 && geom.angles[i] <= geom.angles[i - 1])
            throw std::invalid_argument("geometry: angles must be strictly increasing");
    }
}

} // namespace gaussct
