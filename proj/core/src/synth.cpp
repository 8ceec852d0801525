#include "phonopulse/synth.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>
#include <thread>

#include "phonopulse/constants.hpp"
#include "phonopulse/errors.hpp"

namespace phonopulse {

std::size_t PulseConfig::n_samples() const {
  return static_cast<std::size_t>(std::llround(t_pulse * sample_rate));
}

void PulseConfig::validate() const {
  if (!(f_if > 0.0)) throw std::invalid_argument("PulseConfig: f_if must be > 0");
  if (!(sample_rate > 2.5 * f_if))
    throw std::invalid_argument(
        "PulseConfig: sample_rate must exceed 2.5 * f_if");
  if (!(t_pulse > 0.0))
    throw std::invalid_argument("PulseConfig: t_pulse must be > 0");
  if (n_samples() < 64)
    throw std::invalid_argument("PulseConfig: pulse shorter than 64 samples");
  if (n_reps < 1) throw std::invalid_argument("PulseConfig: n_reps must be >= 1");
}

double SynthTruth::decay_rate_per_s() const {
  return decay_rate(bath.total_rate(), convention);
}

void SynthTruth::validate() const {
  bath.validate();
  if (!(alpha_v > 0.0))
    throw std::invalid_argument("SynthTruth: alpha_v must be > 0");
  if (sigma_imp < 0.0)
    throw std::invalid_argument("SynthTruth: sigma_imp must be >= 0");
  if (n_floor < 0.0)
    throw std::invalid_argument("SynthTruth: n_floor must be >= 0");
  if (n0 < 0.0) throw std::invalid_argument("SynthTruth: n0 must be >= 0");
}

TraceSet::TraceSet(double dt, std::size_t n_reps, std::size_t n_samples)
    : dt_(dt), n_reps_(n_reps), n_samples_(n_samples),
      data_(n_reps * n_samples, 0.0f) {}

std::vector<std::complex<double>> mech_amplitude_path(const OuParams& ou,
                                                      double dt,
                                                      std::size_t n_samples,
                                                      Rng& rng) {
  if (!(ou.decay_rate > 0.0))
    throw std::domain_error("mech_amplitude_path: decay rate must be > 0");
  if (!(dt * ou.decay_rate < 0.1))
    throw std::domain_error(
        "mech_amplitude_path: dt * Gamma >= 0.1 does not resolve the "
        "relaxation");
  if (ou.n_initial < 0.0 || ou.n_target < 0.0)
    throw std::domain_error("mech_amplitude_path: occupancies must be >= 0");

  const double decay_amp = std::exp(-0.5 * ou.decay_rate * dt);
  const double drive = std::sqrt(ou.n_target * (1.0 - decay_amp * decay_amp));
  constexpr double kInvSqrt2 = 0.70710678118654752440;

  std::vector<std::complex<double>> path(n_samples);
  const double amp0 = std::sqrt(ou.n_initial);
  std::complex<double> a(amp0 * kInvSqrt2 * rng.gaussian(),
                         amp0 * kInvSqrt2 * rng.gaussian());
  for (std::size_t k = 0; k < n_samples; ++k) {
    path[k] = a;
    const std::complex<double> xi(kInvSqrt2 * rng.gaussian(),
                                  kInvSqrt2 * rng.gaussian());
    a = a * decay_amp + xi * drive;
  }
  return path;
}

std::vector<double> synthesize_trace(const PulseConfig& cfg,
                                     const SynthTruth& truth,
                                     std::uint64_t rep_index) {
  cfg.validate();
  truth.validate();

  const std::size_t n = cfg.n_samples();
  const double dt = 1.0 / cfg.sample_rate;
  Rng rng = Rng::stream(cfg.base_seed, rep_index);

  // Draw order is part of the reproducibility contract: phase, then the
  // mechanical path, then the per-sample imprecision noise.
  const double phi = kTwoPi * rng.uniform();

  OuParams ou;
  ou.n_initial = truth.n0 + truth.n_floor;
  ou.n_target = equilibrium_occupancy(truth.bath) + truth.n_floor;
  ou.decay_rate = truth.decay_rate_per_s();
  const auto path = mech_amplitude_path(ou, dt, n, rng);

  const double gain = std::sqrt(2.0 * truth.alpha_v);
  std::vector<double> v(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double theta = kTwoPi * cfg.f_if * (static_cast<double>(k) * dt) + phi;
    const double carrier =
        path[k].real() * std::cos(theta) - path[k].imag() * std::sin(theta);
    v[k] = gain * carrier;
  }
  if (truth.sigma_imp > 0.0) {
    for (std::size_t k = 0; k < n; ++k) v[k] += truth.sigma_imp * rng.gaussian();
  }
  return v;
}

TraceSet synthesize_ensemble(const PulseConfig& cfg, const SynthTruth& truth,
                             int n_threads, std::uint64_t max_bytes) {
  cfg.validate();
  truth.validate();

  const std::uint64_t bytes =
      static_cast<std::uint64_t>(cfg.n_reps) * cfg.n_samples() * sizeof(float);
  if (bytes > max_bytes)
    throw ResourceError("synthesize_ensemble: ensemble exceeds memory budget",
                        bytes);

  TraceSet set(1.0 / cfg.sample_rate, cfg.n_reps, cfg.n_samples());
  set.truth() = truth;
  set.provenance().base_seed = cfg.base_seed;

  parallel_for(cfg.n_reps, n_threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t rep = begin; rep < end; ++rep) {
      const auto v = synthesize_trace(cfg, truth, rep);
      auto row = set.mutable_row(rep);
      for (std::size_t k = 0; k < v.size(); ++k)
        row[k] = static_cast<float>(v[k]);
    }
  });
  return set;
}

void parallel_for(std::size_t count, int n_threads,
                  const std::function<void(std::size_t, std::size_t)>& body) {
  if (count == 0) return;
  std::size_t workers = n_threads > 0
                            ? static_cast<std::size_t>(n_threads)
                            : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, count);
  if (workers <= 1) {
    body(0, count);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(begin + chunk, count);
    if (begin >= end) break;
    pool.emplace_back([&body, begin, end] { body(begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace phonopulse
