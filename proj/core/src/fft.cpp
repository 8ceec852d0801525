#include "phonopulse/fft.hpp"

#include <cmath>
#include <stdexcept>

#include "phonopulse/constants.hpp"

namespace phonopulse {

namespace {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

void fft_pow2(std::vector<std::complex<double>>& x, bool inverse) {
  const std::size_t n = x.size();
  if (!is_pow2(n)) throw std::invalid_argument("fft_pow2: size not a power of two");
  if (n < 2) return;

  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? kTwoPi : -kTwoPi) / static_cast<double>(len);
    const std::complex<double> wstep(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const auto u = x[i + k];
        const auto v = x[i + k + len / 2] * w;
        x[i + k] = u + v;
        x[i + k + len / 2] = u - v;
        w *= wstep;
      }
    }
  }
  if (inverse) {
    const double inv_n = 1.0 / static_cast<double>(n);
    for (auto& v : x) v *= inv_n;
  }
}

std::vector<std::complex<double>> fft(const std::vector<std::complex<double>>& x,
                                      bool inverse) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  if (is_pow2(n)) {
    auto y = x;
    fft_pow2(y, inverse);
    return y;
  }

  // Bluestein: express the DFT as a convolution, evaluated with pow2 FFTs.
  const std::size_t m = next_pow2(2 * n - 1);
  std::vector<std::complex<double>> a(m, {0.0, 0.0}), b(m, {0.0, 0.0});
  std::vector<std::complex<double>> chirp(n);
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t k = 0; k < n; ++k) {
    // Phase k^2 mod 2n keeps the argument small for large k.
    const std::size_t k2 = (static_cast<std::size_t>(k) * k) % (2 * n);
    const double ang = sign * kPi * static_cast<double>(k2) / static_cast<double>(n);
    chirp[k] = {std::cos(ang), std::sin(ang)};
    a[k] = x[k] * chirp[k];
  }
  b[0] = {1.0, 0.0};
  for (std::size_t k = 1; k < n; ++k) {
    b[k] = b[m - k] = std::conj(chirp[k]);
  }
  fft_pow2(a, false);
  fft_pow2(b, false);
  for (std::size_t i = 0; i < m; ++i) a[i] *= b[i];
  fft_pow2(a, true);

  std::vector<std::complex<double>> y(n);
  for (std::size_t k = 0; k < n; ++k) y[k] = a[k] * chirp[k];
  if (inverse) {
    const double inv_n = 1.0 / static_cast<double>(n);
    for (auto& v : y) v *= inv_n;
  }
  return y;
}

}  // namespace phonopulse
