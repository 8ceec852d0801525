#pragma once

#include <complex>
#include <vector>

namespace phonopulse {

/// In-place complex DFT, radix-2 Cooley-Tukey. Size must be a power of two.
/// No normalization on the forward transform; inverse divides by N.
void fft_pow2(std::vector<std::complex<double>>& x, bool inverse);

/// Complex DFT of arbitrary length (Bluestein for non powers of two).
std::vector<std::complex<double>> fft(const std::vector<std::complex<double>>& x,
                                      bool inverse = false);

}  // namespace phonopulse
