#pragma once

#include "gaussct/geometry.hpp"

namespace gaussct {

struct RampFilter {
    enum class Kind { RamLak };
    Kind kind = Kind::RamLak;
    double frequency_scaling = 1.0; // fraction of Nyquist kept, in (0, 1]
};

// Ray-driven line integrals with trilinear interpolation and fixed step
// length 0.5 * min(spacing). Deterministic for fixed inputs.
ProjectionStack forward_project(const VoxelGrid& grid, const ConeBeamGeometry& geom);

// Exact linear adjoint of forward_project (scatters the same interpolation
// weights). grid_spec supplies dims/origin/spacing; its data is ignored.
VoxelGrid back_project(const ProjectionStack& proj, const VoxelGrid& grid_spec);

// FDK-style reconstruction: cosine pre-weighting, row-wise ramp filtering in
// the Fourier domain (zero-padded to the next power of two >= 2*cols),
// distance-weighted backprojection, output clamped to >= 0.
VoxelGrid fbp_reconstruct(const ProjectionStack& proj, const VoxelGrid& grid_spec,
                          const RampFilter& filter);

} // namespace gaussct
