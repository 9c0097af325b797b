#include "gaussct/projector.hpp"

#include "gaussct/fft.hpp"
#include "gaussct/threading.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace gaussct {

namespace {

struct ViewFrame {
    Vec3 src;        // source position
    Vec3 det_center; // detector plane center
    Vec3 eu;         // in-plane unit vector along columns
    Vec3 ev;         // in-plane unit vector along rows (world z)
};

ViewFrame make_frame(const ConeBeamGeometry& g, double angle) {
    const Vec3 c = g.rotation_center;
    const Vec3 ew{std::cos(angle), std::sin(angle), 0.0};
    ViewFrame f;
    f.src = c + g.source_distance * ew;
    f.det_center = c - g.detector_distance * ew;
    f.eu = {-std::sin(angle), std::cos(angle), 0.0};
    f.ev = {0.0, 0.0, 1.0};
    return f;
}

Vec3 detector_pixel(const ViewFrame& f, const ConeBeamGeometry& g, int row, int col) {
    const double u = (col - 0.5 * (g.cols() - 1)) * g.detector_pixel_size[1];
    const double v = (row - 0.5 * (g.rows() - 1)) * g.detector_pixel_size[0];
    return f.det_center + u * f.eu + v * f.ev;
}

// World-space bounding box of the trilinear support (voxel coords [-1, dims]).
void support_box(const VoxelGrid& g, Vec3& lo, Vec3& hi) {
    lo = g.origin - Vec3{g.spacing.x, g.spacing.y, g.spacing.z};
    hi = g.origin + Vec3{g.dims[0] * g.spacing.x, g.dims[1] * g.spacing.y,
                         g.dims[2] * g.spacing.z};
}

bool clip_ray(const Vec3& src, const Vec3& dir, const Vec3& lo, const Vec3& hi, double& t0,
              double& t1) {
    t0 = 0.0;
    t1 = std::numeric_limits<double>::max();
    const double s[3] = {src.x, src.y, src.z};
    const double d[3] = {dir.x, dir.y, dir.z};
    const double bl[3] = {lo.x, lo.y, lo.z};
    const double bh[3] = {hi.x, hi.y, hi.z};
    for (int a = 0; a < 3; ++a) {
        if (std::abs(d[a]) < 1e-300) {
            if (s[a] < bl[a] || s[a] > bh[a])
                return false;
            continue;
        }
        double ta = (bl[a] - s[a]) / d[a];
        double tb = (bh[a] - s[a]) / d[a];
        if (ta > tb)
            std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
    }
    return t0 < t1;
}

// Samples the ray from src toward det at a fixed step of 0.5*min(spacing);
// fn(point, weight) where weight is the sample's arclength share. Shared by
// the forward projector and its adjoint so the operator pair stays matched.
template <class F>
void for_each_ray_sample(const VoxelGrid& g, const Vec3& src, const Vec3& det, F&& fn) {
    Vec3 dir = det - src;
    const double len = dir.norm();
    if (len <= 0.0)
        return;
    dir = dir / len;
    Vec3 lo, hi;
    support_box(g, lo, hi);
    double t0, t1;
    if (!clip_ray(src, dir, lo, hi, t0, t1))
        return;
    const double step = 0.5 * std::min({g.spacing.x, g.spacing.y, g.spacing.z});
    const int n = std::max(1, static_cast<int>(std::ceil((t1 - t0) / step)));
    const double h = (t1 - t0) / n;
    for (int k = 0; k < n; ++k) {
        const double t = t0 + (k + 0.5) * h;
        fn(src + t * dir, h);
    }
}

struct TrilinearStencil {
    int i0, j0, k0;
    double w[8]; // (dz, dy, dx) order
};

TrilinearStencil trilinear_stencil(const VoxelGrid& g, const Vec3& p) {
    const Vec3 q = g.world_to_voxel(p);
    TrilinearStencil s;
    s.i0 = static_cast<int>(std::floor(q.x));
    s.j0 = static_cast<int>(std::floor(q.y));
    s.k0 = static_cast<int>(std::floor(q.z));
    const double fx = q.x - s.i0, fy = q.y - s.j0, fz = q.z - s.k0;
    const double wx[2] = {1.0 - fx, fx};
    const double wy[2] = {1.0 - fy, fy};
    const double wz[2] = {1.0 - fz, fz};
    int n = 0;
    for (int dz = 0; dz < 2; ++dz)
        for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx)
                s.w[n++] = wz[dz] * wy[dy] * wx[dx];
    return s;
}

double gather_trilinear(const VoxelGrid& g, const Vec3& p) {
    const TrilinearStencil s = trilinear_stencil(g, p);
    double v = 0.0;
    int n = 0;
    for (int dz = 0; dz < 2; ++dz)
        for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx, ++n) {
                const int i = s.i0 + dx, j = s.j0 + dy, k = s.k0 + dz;
                if (i < 0 || j < 0 || k < 0 || i >= g.dims[0] || j >= g.dims[1] ||
                    k >= g.dims[2])
                    continue;
                v += s.w[n] * g.data[g.index(i, j, k)];
            }
    return v;
}

void splat_trilinear(VoxelGrid& g, const Vec3& p, double value) {
    const TrilinearStencil s = trilinear_stencil(g, p);
    int n = 0;
    for (int dz = 0; dz < 2; ++dz)
        for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx, ++n) {
                const int i = s.i0 + dx, j = s.j0 + dy, k = s.k0 + dz;
                if (i < 0 || j < 0 || k < 0 || i >= g.dims[0] || j >= g.dims[1] ||
                    k >= g.dims[2])
                    continue;
                g.data[g.index(i, j, k)] += s.w[n] * value;
            }
}

void check_source_outside(const VoxelGrid& grid, const ConeBeamGeometry& geom) {
    Vec3 lo, hi;
    support_box(grid, lo, hi);
    for (double a : geom.angles) {
        const Vec3 s = make_frame(geom, a).src;
        if (s.x >= lo.x && s.x <= hi.x && s.y >= lo.y && s.y <= hi.y && s.z >= lo.z &&
            s.z <= hi.z)
            throw std::invalid_argument("projector: source lies inside the grid bounding box");
    }
}

} // namespace

ProjectionStack forward_project(const VoxelGrid& grid, const ConeBeamGeometry& geom) {
    validate_geometry(geom);
    check_source_outside(grid, geom);
    if (grid.data.size() != grid.num_voxels())
        throw std::invalid_argument("forward_project: grid data size mismatch");

    ProjectionStack out = make_projection_stack(geom);
    const std::size_t rows = geom.rows();
    const std::size_t n_lines = geom.num_views() * rows;

    std::vector<ViewFrame> frames;
    frames.reserve(geom.num_views());
    for (double a : geom.angles)
        frames.push_back(make_frame(geom, a));

    parallel_for(0, n_lines, [&](std::size_t line) {
        const std::size_t view = line / rows;
        const int row = static_cast<int>(line % rows);
        const ViewFrame& f = frames[view];
        for (int col = 0; col < geom.cols(); ++col) {
            const Vec3 det = detector_pixel(f, geom, row, col);
            double acc = 0.0;
            for_each_ray_sample(grid, f.src, det, [&](const Vec3& p, double w) {
                acc += w * gather_trilinear(grid, p);
            });
            out.at(view, row, col) = acc;
        }
    });
    return out;
}

VoxelGrid back_project(const ProjectionStack& proj, const VoxelGrid& grid_spec) {
    const ConeBeamGeometry& geom = proj.geometry;
    validate_geometry(geom);
    check_source_outside(grid_spec, geom);
    if (proj.data.size() != geom.num_elements())
        throw std::invalid_argument("back_project: projection data size mismatch");

    VoxelGrid out = like(grid_spec);
    const std::size_t views = geom.num_views();

    // One partial grid per view chunk, merged in chunk order.
    const std::size_t workers = std::min<std::size_t>(thread_count(), views);
    std::vector<VoxelGrid> partials(workers > 1 ? workers : 0);
    parallel_chunks(0, views, [&](std::size_t chunk, std::size_t lo, std::size_t hi) {
        VoxelGrid& dst = (workers > 1) ? (partials[chunk] = like(grid_spec)) : out;
        for (std::size_t view = lo; view < hi; ++view) {
            const ViewFrame f = make_frame(geom, geom.angles[view]);
            for (int row = 0; row < geom.rows(); ++row)
                for (int col = 0; col < geom.cols(); ++col) {
                    const double y = proj.at(view, row, col);
                    if (y == 0.0)
                        continue;
                    const Vec3 det = detector_pixel(f, geom, row, col);
                    for_each_ray_sample(grid_spec, f.src, det, [&](const Vec3& p, double w) {
                        splat_trilinear(dst, p, w * y);
                    });
                }
        }
    });
    for (const VoxelGrid& part : partials) {
        if (part.data.empty())
            continue;
        for (std::size_t i = 0; i < out.data.size(); ++i)
            out.data[i] += part.data[i];
    }
    return out;
}

VoxelGrid fbp_reconstruct(const ProjectionStack& proj, const VoxelGrid& grid_spec,
                          const RampFilter& filter) {
    const ConeBeamGeometry& geom = proj.geometry;
    validate_geometry(geom);
    if (proj.data.size() != geom.num_elements())
        throw std::invalid_argument("fbp_reconstruct: projection data size mismatch");
    if (filter.frequency_scaling <= 0.0 || filter.frequency_scaling > 1.0)
        throw std::invalid_argument("fbp_reconstruct: frequency_scaling must be in (0,1]");

    const int rows = geom.rows();
    const int cols = geom.cols();
    const std::size_t views = geom.num_views();
    const double dso = geom.source_distance;
    const double dsd = geom.source_distance + geom.detector_distance;

    // Detector rescaled to the virtual plane through the rotation axis.
    const double du = geom.detector_pixel_size[1] * dso / dsd;
    const double dv = geom.detector_pixel_size[0] * dso / dsd;

    // Band-limited ramp kernel (spatial domain), transformed once.
    const std::size_t m = next_pow2(2 * static_cast<std::size_t>(cols));
    std::vector<std::complex<double>> kernel(m, 0.0);
    kernel[0] = 1.0 / (4.0 * du * du);
    for (std::size_t n = 1; n < m / 2 + 1; ++n) {
        if (n % 2 == 1) {
            const double v = -1.0 / (std::numbers::pi * std::numbers::pi *
                                     static_cast<double>(n) * static_cast<double>(n) * du * du);
            kernel[n] = v;
            kernel[m - n] = v;
        }
    }
    fft_inplace(kernel, false);
    // Frequency cutoff at frequency_scaling * Nyquist.
    const double nyquist = 1.0 / (2.0 * du);
    for (std::size_t k = 0; k < m; ++k) {
        const std::size_t kk = std::min(k, m - k);
        const double freq = static_cast<double>(kk) / (static_cast<double>(m) * du);
        if (freq > filter.frequency_scaling * nyquist)
            kernel[k] = 0.0;
    }

    // Cosine weighting + row-wise ramp filtering.
    std::vector<double> filtered(proj.data.size());
    parallel_for(0, views * static_cast<std::size_t>(rows), [&](std::size_t line) {
        const std::size_t view = line / rows;
        const int row = static_cast<int>(line % rows);
        const double v = (row - 0.5 * (rows - 1)) * dv;
        std::vector<std::complex<double>> buf(m, 0.0);
        for (int col = 0; col < cols; ++col) {
            const double u = (col - 0.5 * (cols - 1)) * du;
            const double w = dso / std::sqrt(dso * dso + u * u + v * v);
            buf[col] = proj.at(view, row, col) * w;
        }
        fft_inplace(buf, false);
        for (std::size_t k = 0; k < m; ++k)
            buf[k] *= kernel[k];
        fft_inplace(buf, true);
        const std::size_t base = (view * rows + row) * cols;
        for (int col = 0; col < cols; ++col)
            filtered[base + col] = buf[col].real() * du;
    });

    // Distance-weighted backprojection with bilinear detector interpolation.
    const double dbeta = views >= 2 ? (geom.angles[1] - geom.angles[0]) : std::numbers::pi;
    std::vector<double> cos_a(views), sin_a(views);
    for (std::size_t v = 0; v < views; ++v) {
        cos_a[v] = std::cos(geom.angles[v]);
        sin_a[v] = std::sin(geom.angles[v]);
    }

    VoxelGrid out = like(grid_spec);
    const Vec3 c = geom.rotation_center;
    parallel_for(0, static_cast<std::size_t>(grid_spec.dims[2]), [&](std::size_t kz) {
        const int k = static_cast<int>(kz);
        for (int j = 0; j < grid_spec.dims[1]; ++j)
            for (int i = 0; i < grid_spec.dims[0]; ++i) {
                const Vec3 s = grid_spec.voxel_center(i, j, k) - c;
                double acc = 0.0;
                for (std::size_t view = 0; view < views; ++view) {
                    const double dist = dso - (s.x * cos_a[view] + s.y * sin_a[view]);
                    if (dist <= 1e-9)
                        continue;
                    const double mag = dso / dist;
                    const double u = (-s.x * sin_a[view] + s.y * cos_a[view]) * mag;
                    const double v = s.z * mag;
                    const double fu = u / du + 0.5 * (cols - 1);
                    const double fv = v / dv + 0.5 * (rows - 1);
                    const int u0 = static_cast<int>(std::floor(fu));
                    const int v0 = static_cast<int>(std::floor(fv));
                    const double au = fu - u0, av = fv - v0;
                    const std::size_t base = view * rows * cols;
                    double q = 0.0;
                    for (int dr = 0; dr < 2; ++dr)
                        for (int dc = 0; dc < 2; ++dc) {
                            const int rr = v0 + dr, cc = u0 + dc;
                            if (rr < 0 || cc < 0 || rr >= rows || cc >= cols)
                                continue;
                            const double w = (dr ? av : 1.0 - av) * (dc ? au : 1.0 - au);
                            q += w * filtered[base + static_cast<std::size_t>(rr) * cols + cc];
                        }
                    acc += mag * mag * q;
                }
                out.at(i, j, k) = std::max(0.0, acc * dbeta);
            }
    });
    return out;
}

} // namespace gaussct
