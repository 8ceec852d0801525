#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "phonopulse/model.hpp"
#include "phonopulse/rng.hpp"

namespace phonopulse {

/// Pulsed heterodyne acquisition settings.
struct PulseConfig {
  double f_if = 30e6;          ///< intermediate (beat) frequency, Hz
  double sample_rate = 125e6;  ///< Hz
  double t_pulse = 5e-6;       ///< s
  std::size_t n_reps = 1;
  std::uint64_t base_seed = 1;

  std::size_t n_samples() const;
  void validate() const;
};

/// Ground truth for a synthetic run. The mechanical sideband carries the
/// occupancy n(t) plus n_floor, a constant pseudo-occupancy standing in for
/// ground-state and backaction spectral content; only its in-band area
/// matters downstream, where it lands in the noise offset beta together
/// with the white imprecision floor sigma_imp.
struct SynthTruth {
  BathModel bath;
  RateConvention convention = RateConvention::angular;
  double n0 = 0.0;         ///< initial mechanical occupancy, phonons
  double alpha_v = 1e-6;   ///< transduction gain, V^2 per phonon
  double sigma_imp = 0.0;  ///< imprecision white-noise RMS per sample, V
  double n_floor = 0.0;    ///< ground-state + backaction pseudo-occupancy

  /// Total decay rate of the two-bath relaxation, 1/s, per the convention.
  double decay_rate_per_s() const;
  void validate() const;
};

/// One-step-exact complex Ornstein-Uhlenbeck parameters; occupancies include
/// any floor contribution, the rate is the full decay rate in 1/s.
struct OuParams {
  double n_initial = 0.0;
  double n_target = 0.0;
  double decay_rate = 0.0;  ///< 1/s
};

struct Provenance {
  std::uint64_t base_seed = 0;
  std::uint64_t config_hash = 0;
};

/// Immutable ensemble of detector voltage traces (row-major float32).
class TraceSet {
 public:
  TraceSet() = default;
  TraceSet(double dt, std::size_t n_reps, std::size_t n_samples);

  double dt() const { return dt_; }
  std::size_t n_reps() const { return n_reps_; }
  std::size_t n_samples() const { return n_samples_; }
  std::span<const float> row(std::size_t rep) const {
    return {data_.data() + rep * n_samples_, n_samples_};
  }
  std::span<float> mutable_row(std::size_t rep) {
    return {data_.data() + rep * n_samples_, n_samples_};
  }
  std::span<const float> raw() const { return data_; }

  std::optional<SynthTruth>& truth() { return truth_; }
  const std::optional<SynthTruth>& truth() const { return truth_; }
  std::optional<double>& temperature_k() { return temperature_k_; }
  const std::optional<double>& temperature_k() const { return temperature_k_; }
  Provenance& provenance() { return provenance_; }
  const Provenance& provenance() const { return provenance_; }

 private:
  double dt_ = 0.0;
  std::size_t n_reps_ = 0;
  std::size_t n_samples_ = 0;
  std::vector<float> data_;
  std::optional<SynthTruth> truth_;
  std::optional<double> temperature_k_;
  Provenance provenance_;
};

/// Complex amplitude path with exact one-step OU discretization:
/// a_{k+1} = a_k e^(-G dt / 2) + xi_k sqrt(n_target (1 - e^(-G dt))),
/// xi_k circular standard complex normal. The ensemble mean of |a_k|^2
/// follows occupancy_evolution(n_initial, n_target, G, k dt). Step sizes
/// must resolve the relaxation: dt * G < 0.1.
std::vector<std::complex<double>> mech_amplitude_path(const OuParams& ou,
                                                      double dt,
                                                      std::size_t n_samples,
                                                      Rng& rng);

/// Detector voltage for one repetition:
/// V_k = sqrt(2 alpha_v) Re[a_k e^(i 2 pi f_if t_k + i phi)] + sigma_imp w_k
/// with phi uniform per repetition and the RNG stream derived from
/// (base_seed, rep_index).
std::vector<double> synthesize_trace(const PulseConfig& cfg,
                                     const SynthTruth& truth,
                                     std::uint64_t rep_index);

/// Full ensemble; repetitions are independent streams, so the result is
/// identical for any scheduling. Throws ResourceError when the sample buffer
/// would exceed max_bytes.
TraceSet synthesize_ensemble(const PulseConfig& cfg, const SynthTruth& truth,
                             int n_threads = 1,
                             std::uint64_t max_bytes = (1ull << 31));

/// Chunked index-range parallelism used across the library; n_threads <= 0
/// picks the hardware concurrency.
void parallel_for(std::size_t count, int n_threads,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace phonopulse
