#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <complex>
#include <vector>

#include "phonopulse/constants.hpp"
#include "phonopulse/fft.hpp"
#include "phonopulse/fir.hpp"

using namespace phonopulse;

namespace {

// Direct O(N^2) DFT as the oracle.
std::vector<std::complex<double>> dft_slow(
    const std::vector<std::complex<double>>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      const double ang = -kTwoPi * static_cast<double>(k * j) /
                         static_cast<double>(n);
      acc += x[j] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
  return out;
}

std::vector<std::complex<double>> probe_signal(std::size_t n) {
  std::vector<std::complex<double>> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = {std::cos(0.1 * static_cast<double>(i * i % 97)),
            std::sin(0.37 * static_cast<double>(i % 13))};
  }
  return x;
}

}  // namespace

TEST_CASE("fft matches direct DFT for pow2 and Bluestein sizes") {
  for (std::size_t n : {16ul, 64ul, 30ul, 97ul, 125ul}) {
    const auto x = probe_signal(n);
    const auto fast = fft(x);
    const auto slow = dft_slow(x);
    for (std::size_t k = 0; k < n; ++k) {
      CHECK(std::abs(fast[k] - slow[k]) <
            1e-9 * (1.0 + std::abs(slow[k])));
    }
    // Inverse round trip.
    const auto back = fft(fast, true);
    for (std::size_t k = 0; k < n; ++k)
      CHECK(std::abs(back[k] - x[k]) < 1e-10);
  }
}

TEST_CASE("default analysis filter: settling pins the 0.25 us truncation") {
  const double fs = 125e6, bw = 6.25e6;
  const FilterSpec spec = FilterSpec::design(30e6, bw, fs);
  CHECK(spec.n_taps % 2 == 1);
  // Settling time within one sample period of 0.25 us.
  CHECK(std::abs(spec.settling_time(fs) - 0.25e-6) <= 1.0 / fs);
  CHECK(spec.settling_time(fs) >= 1.0 / bw);
}

TEST_CASE("filter taps hit the requested equivalent noise bandwidth") {
  const double fs = 125e6, bw = 6.25e6;
  const FilterSpec spec = FilterSpec::design(30e6, bw, fs);
  const auto taps = lowpass_taps(spec, fs);
  CHECK(static_cast<int>(taps.size()) == spec.n_taps);
  CHECK(filter_enbw_hz(taps, fs) == doctest::Approx(bw).epsilon(1e-9));
  // Unit DC gain anchors the tone identity.
  double sum = 0.0;
  for (double h : taps) sum += h;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("filter stopband is deep at the 20 MHz interferer offset") {
  const double fs = 125e6;
  const FilterSpec spec = FilterSpec::design(30e6, 6.25e6, fs);
  const auto taps = lowpass_taps(spec, fs);
  // Design oracle: the tap-set response itself, evaluated off-band.
  CHECK(filter_attenuation_db(taps, 20e6, fs) < -40.0);
  // And the image of the demodulated carrier at 2 f_if.
  CHECK(filter_attenuation_db(taps, 60e6, fs) < -40.0);
}

TEST_CASE("infeasible bandwidth is rejected with guidance") {
  FilterSpec spec;
  spec.f_center = 30e6;
  spec.bandwidth = 1e6;  // below the window floor for so few taps
  spec.n_taps = 33;
  spec.window = Window::hann;
  CHECK_THROWS_AS(lowpass_taps(spec, 125e6), std::invalid_argument);
}

TEST_CASE("window names round trip") {
  for (auto w : {Window::hann, Window::hamming, Window::blackman, Window::rect})
    CHECK(window_from_name(window_name(w)) == w);
  CHECK_THROWS_AS(window_from_name("kaiser"), std::invalid_argument);
}
