#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace gaussct {

// In-place radix-2 FFT; size must be a power of two.
// inverse=true applies the 1/n normalization.
void fft_inplace(std::vector<std::complex<double>>& a, bool inverse);

std::size_t next_pow2(std::size_t n);

} // namespace gaussct
