#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "phonopulse/fir.hpp"
#include "phonopulse/infer.hpp"
#include "phonopulse/kvdoc.hpp"
#include "phonopulse/model.hpp"
#include "phonopulse/synth.hpp"

namespace phonopulse {

/// Full run description, parsed from the nested key-value config text.
/// Unknown keys are hard errors; silent typos must not reach the physics.
struct RunConfig {
  // [device]
  double f_m_hz = 2.3725e9;
  double q_m = 0.0;         ///< either q_m or gamma_m_hz must be given
  double gamma_m_hz = 0.0;
  double f_c_hz = 0.0;      ///< optional, reporting only
  double kappa_hz = 5.0e9;
  double g0_hz = 1.3e6;
  double n_cav = 230.0;

  // [hot_bath]
  double gamma_p_hz = 0.967e6;
  double n_p = 103.094;
  RateConvention convention = RateConvention::angular;

  // [sweep]
  std::vector<double> temperatures_k;

  // [pulse]
  double f_if_hz = 30e6;
  double sample_rate_hz = 125e6;
  double t_pulse_s = 5e-6;
  std::int64_t n_reps = 1000;
  std::uint64_t base_seed = 20260808;

  // [truth]
  double alpha_v = 1e-6;
  double sigma_imp_v = 3.07e-3;
  double n_floor = 0.6;

  // [filter]
  double bandwidth_hz = 6.25e6;
  std::int64_t n_taps = 0;  ///< 0 = derive from bandwidth
  std::string window = "hann";
  double offres_offset_hz = 0.0;  ///< 0 = 2.5 * bandwidth above f_if

  // [fit]
  double t_min_k = 1.5;
  std::string offset_convention = "occupancy";
  std::int64_t n_groups = 16;
  std::int64_t min_calibration_points = 3;

  // [transduction] (optional; defaults derived from the bath model)
  double gamma_total_hz = 0.0;  ///< 0 = gamma_m + gamma_p
  double n_eq = 0.0;            ///< 0 = bath equilibrium at base temperature
  double n_th = 0.0;            ///< 0 = take the fitted n_base downstream

  // [limits]
  std::uint64_t max_output_bytes = (1ull << 31);

  static RunConfig from_file(const std::filesystem::path& path);
  static RunConfig from_text(const std::string& text);
  KvDoc to_doc() const;
  std::uint64_t hash() const { return to_doc().hash(); }
  void validate() const;

  MechanicalMode mechanical_mode() const;
  OpticalMode optical_mode() const;
  /// Bath with the ambient occupancy pinned to the fridge temperature.
  BathModel bath_for_temperature(double temperature_k) const;
  SynthTruth truth_for_temperature(double temperature_k) const;
  PulseConfig pulse_config() const;
  FilterSpec filter_spec() const;
  double offres_center_hz() const;
  OffsetConvention offset_convention_enum() const;
  double effective_gamma_total_hz() const;
};

}  // namespace phonopulse
