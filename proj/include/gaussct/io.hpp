#pragma once

#include "gaussct/gaussian_model.hpp"
#include "gaussct/geometry.hpp"

#include <string>

namespace gaussct {

// All binary payloads are raw little-endian 32-bit floats. Each payload file
// `path` has a JSON sidecar at `path + ".json"`.

// Volume: x-fastest C order; sidecar {"dims","spacing","origin"}.
void save_volume(const VoxelGrid& grid, const std::string& path);
VoxelGrid load_volume(const std::string& path);

// Projections: (view,row,col) C order; sidecar
// {"views","rows","cols","angles","geometry":{...}}.
void save_projections(const ProjectionStack& proj, const std::string& path);
ProjectionStack load_projections(const std::string& path);

// Cloud checkpoint: N records of (mu_x, mu_y, mu_z, sigma, intensity);
// sidecar {"count","extent_d","iteration"}.
void save_cloud(const GaussianCloud& cloud, const std::string& path, int iteration);
GaussianCloud load_cloud(const std::string& path, int* iteration = nullptr);

// One binary PGM (P5) per slice along the given axis (0=x, 1=y, 2=z),
// values mapped linearly from [0,1] to [0,255]. Returns files written.
int export_slices(const VoxelGrid& grid, const std::string& dir_path, int axis);

} // namespace gaussct
