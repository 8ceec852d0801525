#include "phonopulse/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "phonopulse/constants.hpp"
#include "phonopulse/errors.hpp"
#include "phonopulse/fft.hpp"
#include "phonopulse/leastsq.hpp"

namespace phonopulse {

void PeakAreaSeries::to_csv(std::ostream& out) const {
  out << "t_s,area_V2,area_se_V2\n";
  for (std::size_t i = 0; i < t.size(); ++i) {
    out << t[i] << "," << area[i] << ","
        << (i < area_se.size() ? area_se[i] : 0.0) << "\n";
  }
}

double Spectrum::total_power() const {
  double acc = 0.0;
  for (double v : psd) acc += v;
  return acc * resolution;
}

void Spectrum::to_csv(std::ostream& out) const {
  out << "f_Hz,psd_V2_per_Hz\n";
  for (std::size_t i = 0; i < f.size(); ++i)
    out << f[i] << "," << psd[i] << "\n";
}

std::vector<std::complex<double>> demodulate(std::span<const double> trace,
                                             double f_if, double dt) {
  if (!(f_if > 0.0)) throw std::domain_error("demodulate: f_if must be > 0");
  if (!(f_if < 0.5 / dt))
    throw std::domain_error("demodulate: f_if at or above Nyquist");
  std::vector<std::complex<double>> z(trace.size());
  const double w = kTwoPi * f_if * dt;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const double theta = w * static_cast<double>(k);
    z[k] = 2.0 * trace[k] *
           std::complex<double>(std::cos(theta), -std::sin(theta));
  }
  return z;
}

std::vector<std::complex<double>> fir_apply(
    std::span<const std::complex<double>> z, std::span<const double> taps) {
  const std::size_t n = z.size();
  const std::size_t m = taps.size();
  if (n < m)
    throw std::domain_error("fir_apply: fewer samples than filter taps");
  std::vector<std::complex<double>> y(n - m + 1);
  for (std::size_t k = 0; k + m <= n; ++k) {
    std::complex<double> acc(0.0, 0.0);
    // taps are symmetric; convolution and correlation coincide.
    for (std::size_t j = 0; j < m; ++j) acc += taps[j] * z[k + j];
    y[k] = acc;
  }
  return y;
}

PeakAreaSeries peak_area(const TraceSet& traces, const FilterSpec& filt,
                         const PeakAreaOptions& options) {
  const double fs = 1.0 / traces.dt();
  filt.validate(fs);
  const auto taps = lowpass_taps(filt, fs);
  const std::size_t m = taps.size();
  if (traces.n_samples() < m)
    throw std::domain_error("peak_area: trace shorter than the filter");

  const double f_demod =
      options.f_center_override >= 0.0 ? options.f_center_override : filt.f_center;
  const double dt = traces.dt();
  const std::size_t mid = (m - 1) / 2;

  // Output index j of the full-overlap convolution corresponds to the
  // delay-compensated input time (j + mid) dt. Keep t >= t_trunc only.
  const double t_trunc = static_cast<double>(m - 1) * dt;
  const std::size_t full_len = traces.n_samples() - m + 1;
  std::size_t first = 0;
  while (first < full_len &&
         (static_cast<double>(first + mid) * dt) < t_trunc - 0.5 * dt)
    ++first;
  const std::size_t n_pts = full_len - first;
  if (n_pts == 0) throw std::domain_error("peak_area: nothing beyond t_trunc");

  const std::size_t n_reps = traces.n_reps();
  const int n_groups_req = std::max(1, options.n_groups);
  const std::size_t n_groups =
      n_reps >= 2 * static_cast<std::size_t>(n_groups_req)
          ? static_cast<std::size_t>(n_groups_req)
          : 1;

  PeakAreaSeries series;
  series.t.resize(n_pts);
  for (std::size_t i = 0; i < n_pts; ++i)
    series.t[i] = static_cast<double>(first + i + mid) * dt;
  series.t_trunc = t_trunc;
  series.n_reps_averaged = n_reps;
  series.filter_taps = taps;
  series.dt = dt;

  std::vector<double> sum(n_pts, 0.0), sumsq(n_pts, 0.0);
  std::vector<std::vector<double>> gsum(
      n_groups, std::vector<double>(n_pts, 0.0));
  std::vector<std::size_t> gcount(n_groups, 0);

  // Per-repetition power rows are computed in parallel blocks but reduced
  // in repetition order, so results do not depend on the thread count.
  const std::size_t block = 256;
  std::vector<std::vector<double>> rows(std::min(block, n_reps));
  for (std::size_t base = 0; base < n_reps; base += block) {
    const std::size_t count = std::min(block, n_reps - base);
    parallel_for(count, options.n_threads, [&](std::size_t b, std::size_t e) {
      std::vector<double> v(traces.n_samples());
      for (std::size_t i = b; i < e; ++i) {
        const auto row = traces.row(base + i);
        for (std::size_t k = 0; k < row.size(); ++k) v[k] = row[k];
        const auto z = demodulate(v, f_demod, dt);
        const auto y = fir_apply(z, taps);
        auto& p = rows[i];
        p.resize(n_pts);
        for (std::size_t k = 0; k < n_pts; ++k) p[k] = 0.5 * std::norm(y[first + k]);
      }
    });
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t rep = base + i;
      const std::size_t g = rep * n_groups / n_reps;
      ++gcount[g];
      const auto& p = rows[i];
      for (std::size_t k = 0; k < n_pts; ++k) {
        sum[k] += p[k];
        sumsq[k] += p[k] * p[k];
        gsum[g][k] += p[k];
      }
    }
  }

  const double nn = static_cast<double>(n_reps);
  series.area.resize(n_pts);
  series.area_se.assign(n_pts, 0.0);
  for (std::size_t k = 0; k < n_pts; ++k) {
    const double mean = sum[k] / nn;
    series.area[k] = mean;
    if (n_reps > 1) {
      const double var = std::max(sumsq[k] - nn * mean * mean, 0.0) / (nn - 1.0);
      series.area_se[k] = std::sqrt(var / nn);
    }
  }
  if (n_groups > 1) {
    series.group_area.resize(n_groups);
    for (std::size_t g = 0; g < n_groups; ++g) {
      series.group_area[g].resize(n_pts);
      for (std::size_t k = 0; k < n_pts; ++k)
        series.group_area[g][k] = gsum[g][k] / static_cast<double>(gcount[g]);
    }
  }
  return series;
}

Spectrum welch_psd(std::span<const double> trace, double sample_rate,
                   std::size_t segment_length, std::size_t overlap) {
  if (segment_length < 8)
    throw std::domain_error("welch_psd: segment_length must be >= 8");
  if (segment_length > trace.size())
    throw std::domain_error("welch_psd: segment longer than the trace");
  if (overlap >= segment_length)
    throw std::domain_error("welch_psd: overlap must be < segment_length");

  const std::size_t hop = segment_length - overlap;
  const std::size_t n_segments = 1 + (trace.size() - segment_length) / hop;

  std::vector<double> window(segment_length);
  double wsum2 = 0.0;
  for (std::size_t k = 0; k < segment_length; ++k) {
    window[k] = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(k) /
                                     static_cast<double>(segment_length - 1));
    wsum2 += window[k] * window[k];
  }

  const std::size_t n_bins = segment_length / 2 + 1;
  std::vector<double> acc(n_bins, 0.0);
  std::vector<std::complex<double>> buf(segment_length);
  for (std::size_t s = 0; s < n_segments; ++s) {
    const double* x = trace.data() + s * hop;
    for (std::size_t k = 0; k < segment_length; ++k)
      buf[k] = {window[k] * x[k], 0.0};
    const auto spec = fft(buf);
    for (std::size_t b = 0; b < n_bins; ++b) acc[b] += std::norm(spec[b]);
  }

  Spectrum out;
  out.resolution = sample_rate / static_cast<double>(segment_length);
  out.f.resize(n_bins);
  out.psd.resize(n_bins);
  const double scale =
      1.0 / (sample_rate * wsum2 * static_cast<double>(n_segments));
  for (std::size_t b = 0; b < n_bins; ++b) {
    out.f[b] = static_cast<double>(b) * out.resolution;
    const bool nyquist = (segment_length % 2 == 0) && (b == n_bins - 1);
    out.psd[b] = acc[b] * scale * ((b == 0 || nyquist) ? 1.0 : 2.0);
  }
  return out;
}

double LorentzianFit::peak_area() const {
  return 0.5 * kPi * std::abs(amplitude) * fwhm;
}

LorentzianFit lorentzian_fit(std::span<const double> x,
                             std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size()) throw std::invalid_argument("lorentzian_fit: size mismatch");
  if (n < 8) throw std::domain_error("lorentzian_fit: need >= 8 points");

  // Seeds: offset from the edges, center from the power-weighted centroid,
  // width from the half-maximum count.
  const std::size_t edge = std::max<std::size_t>(1, n / 10);
  double offset0 = 0.0;
  for (std::size_t i = 0; i < edge; ++i) offset0 += y[i] + y[n - 1 - i];
  offset0 /= static_cast<double>(2 * edge);

  double amp0 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = y[i] - offset0;
    if (std::abs(d) > std::abs(amp0)) amp0 = d;
  }
  if (amp0 == 0.0)
    throw FitError("lorentzian_fit: data has no peak structure", 0.0);
  double wsum = 0.0, csum = 0.0;
  std::size_t n_half = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = y[i] - offset0;
    const double p = d * d;
    wsum += p;
    csum += p * x[i];
    if ((amp0 > 0.0 ? d : -d) >= 0.5 * std::abs(amp0)) ++n_half;
  }
  const double center0 = csum / wsum;
  const double span = std::abs(x.back() - x.front());
  const double dx = span / static_cast<double>(n - 1);
  double fwhm0 = std::max(static_cast<double>(n_half) * dx, 2.0 * dx);
  fwhm0 = std::min(fwhm0, span);

  auto callback = [&](const std::vector<double>& p, std::vector<double>& r,
                      std::vector<double>& jac) {
    const double c = p[0], wdt = p[1], a = p[2], off = p[3];
    for (std::size_t i = 0; i < n; ++i) {
      const double u = 2.0 * (x[i] - c) / wdt;
      const double den = 1.0 + u * u;
      r[i] = y[i] - (off + a / den);
      jac[i * 4 + 0] = 4.0 * a * u / (wdt * den * den);
      jac[i * 4 + 1] = 2.0 * a * u * u / (wdt * den * den);
      jac[i * 4 + 2] = 1.0 / den;
      jac[i * 4 + 3] = 1.0;
    }
  };

  const FitResult res =
      fit_least_squares(n, {center0, fwhm0, amp0, offset0}, callback);

  LorentzianFit fit;
  fit.center = res.params[0];
  fit.fwhm = std::abs(res.params[1]);
  fit.amplitude = res.params[2];
  fit.offset = res.params[3];
  fit.center_ci95 = res.ci95[0];
  fit.fwhm_ci95 = res.ci95[1];
  fit.amplitude_ci95 = res.ci95[2];
  fit.offset_ci95 = res.ci95[3];
  fit.covariance = res.covariance;
  fit.residual_rms = res.residual_rms;
  fit.iterations = res.iterations;
  if (fit.fwhm > 0.5 * span)
    throw FitError("lorentzian_fit: scan narrower than two linewidths",
                   res.residual_rms);
  return fit;
}

double lorentzian_band_fraction(double bandwidth, double fwhm) {
  if (!(bandwidth > 0.0) || !(fwhm > 0.0))
    throw std::domain_error("lorentzian_band_fraction: widths must be > 0");
  return (2.0 / kPi) * std::atan(bandwidth / fwhm);
}

double ou_passband_fraction(std::span<const double> taps, double decay_rate,
                            double dt) {
  const std::size_t m = taps.size();
  // sum_jl h_j h_l e^(-G |j-l| dt / 2), accumulated by lag.
  const double q = std::exp(-0.5 * decay_rate * dt);
  double total = 0.0;
  double norm = 0.0;
  for (double v : taps) norm += v;
  for (std::size_t lag = 0; lag < m; ++lag) {
    double s = 0.0;
    for (std::size_t j = 0; j + lag < m; ++j) s += taps[j] * taps[j + lag];
    const double w = std::pow(q, static_cast<double>(lag));
    total += (lag == 0 ? 1.0 : 2.0) * w * s;
  }
  return total / (norm * norm);
}

double ou_transient_gain(std::span<const double> taps, double decay_rate,
                         double dt) {
  const std::size_t m = taps.size();
  const std::size_t mid = (m - 1) / 2;
  double s = 0.0;
  double norm = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    s += taps[j] * std::exp(0.5 * decay_rate * dt *
                            (static_cast<double>(j) - static_cast<double>(mid)));
    norm += taps[j];
  }
  const double g = s / norm;
  return g * g;
}

}  // namespace phonopulse
