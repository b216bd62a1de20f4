#pragma once

#include <complex>
#include <vector>

namespace levybg {

// In-place iterative radix-2 forward DFT: a_k <- sum_j a_j exp(-2 pi i j k / n).
// n must be a power of two.
void fft(std::vector<std::complex<double>>& a);

}  // namespace levybg
