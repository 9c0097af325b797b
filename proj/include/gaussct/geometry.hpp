#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

namespace gaussct {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    Vec3& operator+=(const Vec3& o) {
        x += o.x; y += o.y; z += o.z;
        return *this;
    }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm2() const { return dot(*this); }
    double norm() const { return std::sqrt(norm2()); }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

// Dense scalar field on a regular grid. `origin` is the world position of
// the center of voxel (0,0,0); data is stored x-fastest (C order over z,y,x).
struct VoxelGrid {
    std::array<int, 3> dims{0, 0, 0}; // nx, ny, nz
    Vec3 origin;
    Vec3 spacing{1.0, 1.0, 1.0};
    std::vector<double> data;

    std::size_t num_voxels() const {
        return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
    }
    std::size_t index(int i, int j, int k) const {
        return (static_cast<std::size_t>(k) * dims[1] + j) * dims[0] + i;
    }
    double& at(int i, int j, int k) { return data[index(i, j, k)]; }
    double at(int i, int j, int k) const { return data[index(i, j, k)]; }

    Vec3 world_to_voxel(const Vec3& p) const {
        return {(p.x - origin.x) / spacing.x, (p.y - origin.y) / spacing.y,
                (p.z - origin.z) / spacing.z};
    }
    Vec3 voxel_to_world(const Vec3& q) const {
        return {origin.x + q.x * spacing.x, origin.y + q.y * spacing.y,
                origin.z + q.z * spacing.z};
    }
    Vec3 voxel_center(int i, int j, int k) const {
        return voxel_to_world({static_cast<double>(i), static_cast<double>(j),
                               static_cast<double>(k)});
    }
    bool same_shape(const VoxelGrid& o) const {
        return dims == o.dims;
    }
};

// Validates dims/spacing and that the physical bounding box stays inside the
// normalized [0,1]^3 cube. Data is allocated and zero-filled.
VoxelGrid make_grid(std::array<int, 3> dims, Vec3 origin, Vec3 spacing);

// Grid of `dims` voxels with spacing 1/max(dims), centered in [0,1]^3.
VoxelGrid default_grid(std::array<int, 3> dims);

// Shape-only copy (zeroed data).
VoxelGrid like(const VoxelGrid& g);

struct ConeBeamGeometry {
    double source_distance = 0.0;   // rotation axis -> source
    double detector_distance = 0.0; // rotation axis -> detector plane
    std::array<int, 2> detector_shape{0, 0};       // rows, cols
    std::array<double, 2> detector_pixel_size{0, 0}; // row pitch (v), col pitch (u)
    std::vector<double> angles;                    // radians, strictly increasing
    Vec3 rotation_center{0.5, 0.5, 0.5};

    int rows() const { return detector_shape[0]; }
    int cols() const { return detector_shape[1]; }
    std::size_t num_views() const { return angles.size(); }
    std::size_t num_elements() const {
        return num_views() * static_cast<std::size_t>(rows()) * cols();
    }
};

struct ProjectionStack {
    ConeBeamGeometry geometry;
    std::vector<double> data; // (view, row, col) C order

    std::size_t index(std::size_t view, int row, int col) const {
        return (view * geometry.rows() + row) * geometry.cols() + col;
    }
    double& at(std::size_t view, int row, int col) { return data[index(view, row, col)]; }
    double at(std::size_t view, int row, int col) const { return data[index(view, row, col)]; }
};

ProjectionStack make_projection_stack(const ConeBeamGeometry& geom);

// Views at angles k*pi/num_views, k = 0..num_views-1 (half-open semicircle).
ConeBeamGeometry make_semicircle_geometry(int num_views, std::array<int, 2> detector_shape,
                                          double source_distance, double detector_distance,
                                          std::array<double, 2> pixel_size);

void validate_geometry(const ConeBeamGeometry& geom);

} // namespace gaussct
