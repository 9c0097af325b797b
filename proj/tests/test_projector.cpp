#include "gaussct/geometry.hpp"
#include "gaussct/phantom.hpp"
#include "gaussct/projector.hpp"

#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <random>

using namespace gaussct;

namespace {

ConeBeamGeometry small_geom(int views = 8, std::array<int, 2> det = {33, 49}) {
    return make_semicircle_geometry(views, det, 2.0, 2.0, {0.05, 0.05});
}

void fill_random(std::vector<double>& v, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double& x : v)
        x = u(rng);
}

} // namespace

TEST_CASE("zero volume projects to zero") {
    const VoxelGrid g = default_grid({16, 16, 16});
    const auto p = forward_project(g, small_geom());
    for (double v : p.data)
        CHECK(v == 0.0);
}

TEST_CASE("single center voxel: central ray integral matches the analytic chord") {
    VoxelGrid g = default_grid({33, 33, 33}); // odd so one voxel center sits at (0.5,0.5,0.5)
    g.at(16, 16, 16) = 1.0;
    const auto geom = small_geom(1); // angle 0, odd detector puts a pixel on the central ray
    const auto p = forward_project(g, geom);
    // Trilinear field of a unit voxel along a centered axis ray integrates to
    // exactly one voxel spacing.
    const double expected = g.spacing.x;
    const double got = p.at(0, geom.rows() / 2, geom.cols() / 2);
    CHECK(got == doctest::Approx(expected).epsilon(0.02));
}

TEST_CASE("homogeneous unit cube: central ray path length within 2%") {
    VoxelGrid g = default_grid({32, 32, 32});
    for (double& v : g.data)
        v = 1.0;
    const auto geom = small_geom(1);
    const auto p = forward_project(g, geom);
    const double got = p.at(0, geom.rows() / 2, geom.cols() / 2);
    CHECK(got == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("forward projection of a nonnegative volume is nonnegative") {
    std::mt19937_64 rng(11);
    VoxelGrid g = default_grid({16, 16, 16});
    fill_random(g.data, rng);
    const auto p = forward_project(g, small_geom());
    for (double v : p.data)
        CHECK(v >= 0.0);
}

TEST_CASE("forward projection is linear") {
    std::mt19937_64 rng(13);
    VoxelGrid x = default_grid({12, 12, 12});
    VoxelGrid y = default_grid({12, 12, 12});
    fill_random(x.data, rng);
    fill_random(y.data, rng);
    const double a = 0.7, b = -1.3;
    VoxelGrid z = like(x);
    for (std::size_t i = 0; i < z.data.size(); ++i)
        z.data[i] = a * x.data[i] + b * y.data[i];

    const auto geom = small_geom(4);
    const auto px = forward_project(x, geom);
    const auto py = forward_project(y, geom);
    const auto pz = forward_project(z, geom);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < pz.data.size(); ++i) {
        const double combo = a * px.data[i] + b * py.data[i];
        num += (pz.data[i] - combo) * (pz.data[i] - combo);
        den += combo * combo;
    }
    CHECK(std::sqrt(num) <= 1e-10 * std::max(1.0, std::sqrt(den)));
}

TEST_CASE("forward projection is deterministic") {
    std::mt19937_64 rng(17);
    VoxelGrid g = default_grid({16, 16, 16});
    fill_random(g.data, rng);
    const auto geom = small_geom();
    const auto p1 = forward_project(g, geom);
    const auto p2 = forward_project(g, geom);
    CHECK(p1.data == p2.data);
}

TEST_CASE("back_project of zero projections is the zero volume") {
    const VoxelGrid spec = default_grid({16, 16, 16});
    auto p = make_projection_stack(small_geom());
    const auto v = back_project(p, spec);
    for (double x : v.data)
        CHECK(x == 0.0);
}

TEST_CASE("adjoint identity <Ax,y> == <x,A^T y> over random pairs") {
    std::mt19937_64 rng(19);
    const VoxelGrid spec = default_grid({16, 16, 16});
    const auto geom = small_geom();
    for (int trial = 0; trial < 20; ++trial) {
        VoxelGrid x = like(spec);
        fill_random(x.data, rng);
        ProjectionStack y = make_projection_stack(geom);
        fill_random(y.data, rng);

        const auto ax = forward_project(x, geom);
        const auto aty = back_project(y, spec);
        double lhs = 0.0, ax_norm = 0.0, y_norm = 0.0, rhs = 0.0;
        for (std::size_t i = 0; i < ax.data.size(); ++i) {
            lhs += ax.data[i] * y.data[i];
            ax_norm += ax.data[i] * ax.data[i];
            y_norm += y.data[i] * y.data[i];
        }
        for (std::size_t i = 0; i < x.data.size(); ++i)
            rhs += x.data[i] * aty.data[i];
        const double rel =
            std::abs(lhs - rhs) / (std::sqrt(ax_norm) * std::sqrt(y_norm));
        CHECK(rel <= 1e-4);
    }
}

TEST_CASE("single detector element backprojects only along its ray") {
    const VoxelGrid spec = default_grid({16, 16, 16});
    const auto geom = small_geom(1);
    ProjectionStack p = make_projection_stack(geom);
    const int row = geom.rows() / 2, col = geom.cols() / 4;
    p.at(0, row, col) = 1.0;
    const auto v = back_project(p, spec);

    // ray endpoints for angle 0
    const Vec3 src{0.5 + geom.source_distance, 0.5, 0.5};
    const double u = (col - 0.5 * (geom.cols() - 1)) * geom.detector_pixel_size[1];
    const double w = (row - 0.5 * (geom.rows() - 1)) * geom.detector_pixel_size[0];
    const Vec3 det{0.5 - geom.detector_distance, 0.5 + u, 0.5 + w};
    Vec3 dir = det - src;
    dir = dir / dir.norm();

    bool any_nonzero = false;
    for (int k = 0; k < 16; ++k)
        for (int j = 0; j < 16; ++j)
            for (int i = 0; i < 16; ++i) {
                const double val = v.at(i, j, k);
                if (val == 0.0)
                    continue;
                any_nonzero = true;
                const Vec3 d = spec.voxel_center(i, j, k) - src;
                const Vec3 perp = d - d.dot(dir) * dir;
                CHECK(perp.norm() <= 2.0 * spec.spacing.x); // within the trilinear footprint
            }
    CHECK(any_nonzero);
}

TEST_CASE("projector rejects a source inside the grid") {
    const VoxelGrid g = default_grid({8, 8, 8});
    ConeBeamGeometry geom = small_geom(1);
    geom.source_distance = 0.05; // inside the volume
    geom.detector_distance = 2.0;
    CHECK_THROWS_AS(forward_project(g, geom), std::invalid_argument);
}

TEST_CASE("back_project rejects mismatched projection sizes") {
    const VoxelGrid spec = default_grid({8, 8, 8});
    ProjectionStack p = make_projection_stack(small_geom());
    p.data.pop_back();
    CHECK_THROWS_AS(back_project(p, spec), std::invalid_argument);
}

TEST_CASE("fbp of zero projections is the zero volume") {
    const VoxelGrid spec = default_grid({16, 16, 16});
    auto p = make_projection_stack(small_geom());
    const auto v = fbp_reconstruct(p, spec, RampFilter{});
    for (double x : v.data)
        CHECK(x == 0.0);
}

TEST_CASE("fbp rejects invalid frequency scaling") {
    const VoxelGrid spec = default_grid({8, 8, 8});
    auto p = make_projection_stack(small_geom());
    CHECK_THROWS_AS(fbp_reconstruct(p, spec, RampFilter{RampFilter::Kind::RamLak, 0.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(fbp_reconstruct(p, spec, RampFilter{RampFilter::Kind::RamLak, 1.5}),
                    std::invalid_argument);
}

namespace {

double psnr_vs(const VoxelGrid& rec, const VoxelGrid& truth) {
    double mse = 0.0;
    for (std::size_t i = 0; i < rec.data.size(); ++i) {
        const double d = rec.data[i] - truth.data[i];
        mse += d * d;
    }
    mse /= static_cast<double>(rec.data.size());
    return 10.0 * std::log10(1.0 / mse);
}

} // namespace

TEST_CASE("dense-view fbp reconstructs an ellipsoid; sparse views degrade it") {
    const VoxelGrid spec = default_grid({64, 64, 64});
    const std::vector<Ellipsoid> ell = {{{0.5, 0.5, 0.5}, {0.25, 0.18, 0.2}, 0.3, 0.8}};
    const VoxelGrid truth = render_ellipsoid_phantom(ell, spec);

    const auto dense = make_semicircle_geometry(128, {96, 144}, 2.0, 2.0, {0.035, 0.031});
    const double dense_psnr =
        psnr_vs(fbp_reconstruct(forward_project(truth, dense), spec, RampFilter{}), truth);
    CHECK(dense_psnr >= 25.0);

    const auto sparse = make_semicircle_geometry(20, {96, 144}, 2.0, 2.0, {0.035, 0.031});
    const double sparse_psnr =
        psnr_vs(fbp_reconstruct(forward_project(truth, sparse), spec, RampFilter{}), truth);
    CHECK(sparse_psnr < dense_psnr - 1.0);
}
