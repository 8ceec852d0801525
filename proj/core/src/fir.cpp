#include "phonopulse/fir.hpp"

#include <cmath>
#include <stdexcept>

#include "phonopulse/constants.hpp"

namespace phonopulse {

namespace {

double window_value(Window w, int k, int n) {
  const double x = static_cast<double>(k) / static_cast<double>(n - 1);
  switch (w) {
    case Window::hann:
      return 0.5 - 0.5 * std::cos(kTwoPi * x);
    case Window::hamming:
      return 0.54 - 0.46 * std::cos(kTwoPi * x);
    case Window::blackman:
      return 0.42 - 0.5 * std::cos(kTwoPi * x) + 0.08 * std::cos(2.0 * kTwoPi * x);
    case Window::rect:
      return 1.0;
  }
  return 1.0;
}

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  return std::sin(kPi * x) / (kPi * x);
}

// Windowed sinc with normalized cutoff nu_c (cycles/sample), DC gain 1.
std::vector<double> raw_taps(Window w, int n, double nu_c) {
  std::vector<double> h(static_cast<std::size_t>(n));
  const int mid = (n - 1) / 2;
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    h[static_cast<std::size_t>(k)] =
        window_value(w, k, n) * 2.0 * nu_c * sinc(2.0 * nu_c * (k - mid));
    sum += h[static_cast<std::size_t>(k)];
  }
  for (auto& v : h) v /= sum;
  return h;
}

double enbw_of(const std::vector<double>& h) {
  double s1 = 0.0, s2 = 0.0;
  for (double v : h) {
    s1 += v;
    s2 += v * v;
  }
  return s2 / (s1 * s1);  // in units of f_s
}

}  // namespace

Window window_from_name(const std::string& name) {
  if (name == "hann") return Window::hann;
  if (name == "hamming") return Window::hamming;
  if (name == "blackman") return Window::blackman;
  if (name == "rect") return Window::rect;
  throw std::invalid_argument("unknown filter window: " + name);
}

std::string window_name(Window w) {
  switch (w) {
    case Window::hann: return "hann";
    case Window::hamming: return "hamming";
    case Window::blackman: return "blackman";
    case Window::rect: return "rect";
  }
  return "?";
}

FilterSpec FilterSpec::design(double f_center_hz, double bandwidth_hz,
                              double sample_rate_hz) {
  FilterSpec spec;
  spec.f_center = f_center_hz;
  spec.bandwidth = bandwidth_hz;
  // Settling time 1.5625 / B, rounded to an odd tap count.
  const double settle = 1.5625 / bandwidth_hz;
  int half = static_cast<int>(std::llround(0.5 * settle * sample_rate_hz));
  if (half < 4) half = 4;
  spec.n_taps = 2 * half + 1;
  spec.window = Window::hann;
  spec.validate(sample_rate_hz);
  return spec;
}

void FilterSpec::validate(double sample_rate_hz) const {
  if (!(bandwidth > 0.0))
    throw std::invalid_argument("FilterSpec: bandwidth must be > 0");
  if (!(f_center >= 0.0))
    throw std::invalid_argument("FilterSpec: f_center must be >= 0");
  if (n_taps < 9 || n_taps % 2 == 0)
    throw std::invalid_argument("FilterSpec: n_taps must be odd and >= 9");
  if (bandwidth >= sample_rate_hz)
    throw std::invalid_argument("FilterSpec: bandwidth must be < sample rate");
  if (settling_time(sample_rate_hz) < 1.0 / bandwidth)
    throw std::invalid_argument(
        "FilterSpec: settling time (n_taps-1)/f_s shorter than 1/bandwidth; "
        "increase n_taps");
}

std::vector<double> lowpass_taps(const FilterSpec& spec, double sample_rate_hz) {
  spec.validate(sample_rate_hz);
  const double target = spec.bandwidth / sample_rate_hz;  // normalized ENBW

  // The achievable ENBW is bounded below by the bare window's; check before
  // bisecting the cutoff.
  const double floor_enbw = enbw_of(raw_taps(spec.window, spec.n_taps, 1e-7));
  if (target <= floor_enbw)
    throw std::invalid_argument(
        "FilterSpec: requested bandwidth below the window-limited minimum (" +
        std::to_string(floor_enbw * sample_rate_hz) +
        " Hz); increase n_taps or bandwidth");

  double lo = 1e-7, hi = 0.499;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double e = enbw_of(raw_taps(spec.window, spec.n_taps, mid));
    if (e < target)
      lo = mid;
    else
      hi = mid;
  }
  return raw_taps(spec.window, spec.n_taps, 0.5 * (lo + hi));
}

double filter_enbw_hz(std::span<const double> taps, double sample_rate_hz) {
  double s1 = 0.0, s2 = 0.0;
  for (double v : taps) {
    s1 += v;
    s2 += v * v;
  }
  return sample_rate_hz * s2 / (s1 * s1);
}

std::complex<double> filter_response(std::span<const double> taps, double f_hz,
                                     double sample_rate_hz) {
  const double w = kTwoPi * f_hz / sample_rate_hz;
  std::complex<double> acc(0.0, 0.0);
  for (std::size_t k = 0; k < taps.size(); ++k) {
    acc += taps[k] * std::complex<double>(std::cos(w * static_cast<double>(k)),
                                          -std::sin(w * static_cast<double>(k)));
  }
  return acc;
}

double filter_attenuation_db(std::span<const double> taps, double f_hz,
                             double sample_rate_hz) {
  const double mag = std::abs(filter_response(taps, f_hz, sample_rate_hz));
  const double dc = std::abs(filter_response(taps, 0.0, sample_rate_hz));
  return 20.0 * std::log10(mag / dc);
}

}  // namespace phonopulse
