#pragma once

#include <cstdint>

namespace phonopulse {

/// GHz mechanical breathing mode. Linewidth is tied to f_m / q_m.
struct MechanicalMode {
  double f_m = 0.0;      ///< resonance frequency, Hz
  double q_m = 0.0;      ///< quality factor
  double gamma_m = 0.0;  ///< linewidth f_m / q_m, Hz

  MechanicalMode() = default;
  MechanicalMode(double f_m_hz, double quality);
  /// Construct from a quoted linewidth instead of Q.
  static MechanicalMode from_linewidth(double f_m_hz, double gamma_m_hz);
  void validate() const;
};

/// Telecom optical cavity mode and its optomechanical drive strength.
struct OpticalMode {
  double f_c = 0.0;    ///< cavity frequency, Hz
  double kappa = 0.0;  ///< cavity linewidth, Hz
  double g0 = 0.0;     ///< vacuum optomechanical coupling, Hz
  double n_cav = 0.0;  ///< intracavity photon number

  void validate() const;
};

/// Two-bath phonon environment: the ambient fridge bath plus the
/// laser-induced hot bath that switches on with the optical pulse.
struct BathModel {
  double n_th = 0.0;     ///< ambient bath occupancy, phonons
  double gamma_m = 0.0;  ///< ambient coupling rate, Hz (quoted value)
  double n_p = 0.0;      ///< hot bath occupancy, phonons
  double gamma_p = 0.0;  ///< hot bath coupling rate, Hz (quoted value)

  double total_rate() const { return gamma_m + gamma_p; }
  void validate() const;
};

struct Environment {
  double t_fridge = 0.0;  ///< fridge plate temperature, K
  void validate() const;
};

/// How a quoted rate value maps onto the e^(-Gamma t) decay exponent.
///
/// Quoted coupling rates carry no explicit 2pi. Under `angular` the quoted
/// number is already the decay rate in 1/s; under `ordinary` it is an
/// ordinary frequency and the decay rate is 2pi times larger. Ratios of
/// same-convention rates (cooperativities) are unaffected either way.
/// Default is `angular`: it reproduces the observed few-microsecond
/// saturation of the heating curve.
enum class RateConvention { angular, ordinary };

/// Decay rate in 1/s for a quoted rate value under `conv`.
double decay_rate(double quoted_rate_hz, RateConvention conv);

/// Thermal (Bose-Einstein) occupancy of a mode of frequency f at temperature T.
double bose_einstein(double temperature_k, double frequency_hz);

/// Inverse of bose_einstein: temperature that yields occupancy n.
double bose_einstein_temperature(double occupancy, double frequency_hz);

/// Relaxation of the mean occupancy between n0 and n_eq:
/// n(t) = n0 e^(-Gamma t) + n_eq (1 - e^(-Gamma t)).
/// `decay_rate_per_s` is the total rate in 1/s (see RateConvention).
double occupancy_evolution(double n0, double n_eq, double decay_rate_per_s,
                           double t_s);

/// Rate-weighted equilibrium of the two baths:
/// n_eq = (gamma_m n_th + gamma_p n_p) / (gamma_m + gamma_p).
double equilibrium_occupancy(const BathModel& bath);

/// P(0) = 1 / (1 + n) for a thermal (geometric) state.
double ground_state_probability(double occupancy);

}  // namespace phonopulse
