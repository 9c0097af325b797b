#include "gaussct/metrics.hpp"

#include "gaussct/threading.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace gaussct {

namespace {

constexpr int kWindow = 11;
constexpr double kWindowSigma = 1.5;
constexpr double kK1 = 0.01;
constexpr double kK2 = 0.03;

void check_shapes(const VoxelGrid& a, const VoxelGrid& b) {
    if (!a.same_shape(b))
        throw std::invalid_argument("metrics: volume shapes differ");
    if (a.data.size() != a.num_voxels() || b.data.size() != b.num_voxels())
        throw std::invalid_argument("metrics: volume data size mismatch");
}

std::vector<double> gaussian_window() {
    std::vector<double> w(kWindow * kWindow);
    const int h = kWindow / 2;
    double sum = 0.0;
    for (int y = 0; y < kWindow; ++y)
        for (int x = 0; x < kWindow; ++x) {
            const double dx = x - h, dy = y - h;
            w[y * kWindow + x] = std::exp(-(dx * dx + dy * dy) / (2.0 * kWindowSigma * kWindowSigma));
            sum += w[y * kWindow + x];
        }
    for (double& v : w)
        v /= sum;
    return w;
}

} // namespace

double psnr(const VoxelGrid& a, const VoxelGrid& b, double data_range) {
    check_shapes(a, b);
    if (data_range <= 0.0)
        throw std::invalid_argument("psnr: data_range must be > 0");
    double mse = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        mse += d * d;
    }
    mse /= static_cast<double>(a.data.size());
    if (mse == 0.0)
        return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(data_range * data_range / mse);
}

double ssim(const VoxelGrid& a, const VoxelGrid& b, double data_range) {
    check_shapes(a, b);
    if (data_range <= 0.0)
        throw std::invalid_argument("ssim: data_range must be > 0");
    const int nx = a.dims[0], ny = a.dims[1], nz = a.dims[2];
    if (nx < kWindow || ny < kWindow)
        throw std::invalid_argument("ssim: slice smaller than the 11x11 window");

    static const std::vector<double> win = gaussian_window();
    const double c1 = (kK1 * data_range) * (kK1 * data_range);
    const double c2 = (kK2 * data_range) * (kK2 * data_range);
    const int h = kWindow / 2;

    std::vector<double> slice_means(nz, 0.0);
    parallel_for(0, static_cast<std::size_t>(nz), [&](std::size_t kz) {
        const int k = static_cast<int>(kz);
        double total = 0.0;
        std::size_t count = 0;
        for (int cy = h; cy < ny - h; ++cy)
            for (int cx = h; cx < nx - h; ++cx) {
                double ma = 0.0, mb = 0.0, saa = 0.0, sbb = 0.0, sab = 0.0;
                for (int wy = 0; wy < kWindow; ++wy)
                    for (int wx = 0; wx < kWindow; ++wx) {
                        const double w = win[wy * kWindow + wx];
                        const double va = a.at(cx + wx - h, cy + wy - h, k);
                        const double vb = b.at(cx + wx - h, cy + wy - h, k);
                        ma += w * va;
                        mb += w * vb;
                        saa += w * va * va;
                        sbb += w * vb * vb;
                        sab += w * va * vb;
                    }
                const double var_a = saa - ma * ma;
                const double var_b = sbb - mb * mb;
                const double cov = sab - ma * mb;
                const double num = (2.0 * ma * mb + c1) * (2.0 * cov + c2);
                const double den = (ma * ma + mb * mb + c1) * (var_a + var_b + c2);
                total += num / den;
                ++count;
            }
        slice_means[kz] = total / static_cast<double>(count);
    });

    double mean = 0.0;
    for (double v : slice_means)
        mean += v;
    return mean / static_cast<double>(nz);
}

MetricReport compare_volumes(const VoxelGrid& a, const VoxelGrid& b, double data_range) {
    return MetricReport{psnr(a, b, data_range), ssim(a, b, data_range)};
}

} // namespace gaussct
