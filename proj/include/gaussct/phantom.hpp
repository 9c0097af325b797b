#pragma once

#include "gaussct/geometry.hpp"

#include <vector>

namespace gaussct {

// Additive ellipsoid; negative intensity carves darker regions (lungs).
// Rotation is about the world z axis, in radians.
struct Ellipsoid {
    Vec3 center;
    Vec3 semi_axes;
    double rotation_z = 0.0;
    double intensity = 0.0;
};

// Each voxel gets the sum of intensities of ellipsoids containing its
// center, clamped to [0, 1] after summation.
VoxelGrid render_ellipsoid_phantom(const std::vector<Ellipsoid>& spec,
                                   const VoxelGrid& grid_spec);

// Large body ellipsoid, a few organs, small high-contrast inserts.
std::vector<Ellipsoid> abdomen_phantom();

// Body, two low-intensity lungs, thin high-contrast airway-like tubes.
std::vector<Ellipsoid> chest_phantom();

} // namespace gaussct
