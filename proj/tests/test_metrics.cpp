#include "gaussct/metrics.hpp"

#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <random>

using namespace gaussct;

namespace {

VoxelGrid filled(std::array<int, 3> dims, double value) {
    VoxelGrid g = default_grid(dims);
    for (double& v : g.data)
        v = value;
    return g;
}

} // namespace

TEST_CASE("psnr of identical volumes is +infinity") {
    const VoxelGrid a = filled({8, 8, 8}, 0.37);
    CHECK(std::isinf(psnr(a, a)));
    CHECK(psnr(a, a) > 0.0);
}

TEST_CASE("psnr matches the closed form for a constant offset") {
    const VoxelGrid a = filled({16, 16, 16}, 0.5);
    VoxelGrid b = a;
    for (double& v : b.data)
        v += 0.1; // MSE = 0.01 -> 20 dB at unit range
    CHECK(psnr(a, b) == doctest::Approx(20.0).epsilon(1e-12));
    // range scaling: 10*log10(range^2/MSE)
    CHECK(psnr(a, b, 2.0) == doctest::Approx(20.0 + 20.0 * std::log10(2.0)).epsilon(1e-12));
}

TEST_CASE("psnr is symmetric and decreases with noise amplitude") {
    std::mt19937_64 rng(111);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const VoxelGrid a = filled({12, 12, 12}, 0.5);
    VoxelGrid small = a, big = a;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double n = u(rng);
        small.data[i] += 0.01 * n;
        big.data[i] += 0.1 * n;
    }
    CHECK(psnr(a, small) == psnr(small, a));
    CHECK(psnr(a, small) > psnr(a, big));
}

TEST_CASE("psnr rejects shape mismatch and bad range") {
    const VoxelGrid a = filled({8, 8, 8}, 0.5);
    const VoxelGrid b = filled({8, 8, 4}, 0.5);
    CHECK_THROWS_AS(psnr(a, b), std::invalid_argument);
    CHECK_THROWS_AS(psnr(a, a, 0.0), std::invalid_argument);
}

TEST_CASE("ssim of identical volumes is exactly 1") {
    std::mt19937_64 rng(113);
    VoxelGrid a = default_grid({16, 16, 4});
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double& v : a.data)
        v = u(rng);
    CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ssim of a checkerboard against its inverse is strongly negative") {
    VoxelGrid a = default_grid({22, 22, 2});
    VoxelGrid b = default_grid({22, 22, 2});
    for (int k = 0; k < 2; ++k)
        for (int j = 0; j < 22; ++j)
            for (int i = 0; i < 22; ++i) {
                const double v = ((i + j) % 2 == 0) ? 1.0 : 0.0;
                a.at(i, j, k) = v;
                b.at(i, j, k) = 1.0 - v;
            }
    CHECK(ssim(a, b) < -0.5);
}

TEST_CASE("ssim matches the closed form for constant volumes") {
    // constant inputs: variance and covariance vanish, so every window gives
    // (2*ma*mb + c1) / (ma^2 + mb^2 + c1)
    const VoxelGrid a = filled({16, 16, 3}, 0.6);
    const VoxelGrid b = filled({16, 16, 3}, 0.4);
    const double c1 = 0.01 * 0.01;
    const double expected = (2.0 * 0.6 * 0.4 + c1) / (0.6 * 0.6 + 0.4 * 0.4 + c1);
    CHECK(ssim(a, b) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("ssim degrades monotonically with noise") {
    std::mt19937_64 rng(117);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    VoxelGrid a = default_grid({24, 24, 4});
    for (int k = 0; k < 4; ++k)
        for (int j = 0; j < 24; ++j)
            for (int i = 0; i < 24; ++i)
                a.at(i, j, k) = 0.5 + 0.3 * std::sin(0.5 * i) * std::cos(0.4 * j);
    VoxelGrid small = a, big = a;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double n = u(rng) - 0.5;
        small.data[i] += 0.02 * n;
        big.data[i] += 0.3 * n;
    }
    const double s_small = ssim(a, small);
    const double s_big = ssim(a, big);
    CHECK(s_small > s_big);
    CHECK(s_small > 0.9);
    CHECK(s_small < 1.0);
}

TEST_CASE("ssim requires slices at least as large as the window") {
    const VoxelGrid a = filled({10, 16, 4}, 0.5);
    CHECK_THROWS_AS(ssim(a, a), std::invalid_argument);
}

TEST_CASE("ssim valid-mode: no implicit zero padding at the border") {
    // with zero padding a bright constant volume would score below 1 near
    // the rim; valid-only evaluation must give exactly 1
    const VoxelGrid a = filled({32, 32, 2}, 0.9);
    CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("compare_volumes bundles both metrics") {
    const VoxelGrid a = filled({16, 16, 2}, 0.5);
    VoxelGrid b = a;
    for (double& v : b.data)
        v += 0.1;
    const MetricReport r = compare_volumes(a, b);
    CHECK(r.psnr == doctest::Approx(20.0).epsilon(1e-12));
    CHECK(r.ssim == doctest::Approx(ssim(a, b)).epsilon(1e-15));
}
