#pragma once

#include "gaussct/geometry.hpp"

namespace gaussct {

struct MetricReport {
    double psnr = 0.0;
    double ssim = 0.0;
};

// 10*log10(range^2 / MSE); +infinity for identical inputs.
double psnr(const VoxelGrid& a, const VoxelGrid& b, double data_range = 1.0);

// Mean local SSIM, computed slice-wise along z with an 11x11 Gaussian window
// (sigma 1.5), K1 = 0.01, K2 = 0.03.
double ssim(const VoxelGrid& a, const VoxelGrid& b, double data_range = 1.0);

MetricReport compare_volumes(const VoxelGrid& a, const VoxelGrid& b, double data_range = 1.0);

} // namespace gaussct
