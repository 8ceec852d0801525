#pragma once

#include "phonopulse/dsp.hpp"
#include "phonopulse/model.hpp"

namespace phonopulse {

/// Transduction figures of merit derived from device parameters and the
/// measured bath state.
struct FiguresOfMerit {
  double gamma_om = 0.0;      ///< optomechanical interaction rate, Hz
  double coop = 0.0;          ///< intrinsic cooperativity gamma_om / gamma_m
  double coop_q = 0.0;        ///< quantum cooperativity gamma_om / (Gamma n_eq)
  double n_add_ambient = 0.0; ///< added quanta from the ambient bath
  double n_add_total = 0.0;   ///< added quanta from ambient + hot baths
};

/// Optomechanical interaction rate 4 g0^2 n_cav / kappa (quoted-rate units).
double gamma_om(const OpticalMode& optical);

struct Cooperativities {
  double coop = 0.0;
  double coop_q = 0.0;
};

/// (gamma_om / gamma_m, gamma_om / (gamma_total n_eq)). All rates must be
/// quoted in the same convention; the ratios are convention independent.
Cooperativities cooperativities(double gamma_om_hz, const MechanicalMode& mech,
                                double gamma_total_hz, double n_eq);

/// Added thermal quanta (C + s^2) / (1 + s^2) with s = kappa / (4 f_m);
/// C = n_th / coop for the ambient bath, C = 1 / coop_q for the total.
double added_noise(double c_param, double kappa_hz, double f_m_hz);

FiguresOfMerit compute_figures_of_merit(const OpticalMode& optical,
                                        const MechanicalMode& mech,
                                        double gamma_total_hz, double n_eq,
                                        double n_th);

struct PhaseCalTone {
  double f_cal = 0.0;            ///< calibration tone frequency, Hz
  double phase_mod_depth = 0.0;  ///< rad
};

/// Vacuum optomechanical coupling from a spectrum holding the mechanical
/// peak and an EOM phase-calibration tone:
///   g0^2 = (depth^2 f_cal^2 / (4 n_mech)) * A_mech / A_cal,
/// with A_* the integrated spectral areas above the background. The
/// mechanical peak is Lorentzian-fitted with the calibration bins masked;
/// the tone area is summed over its bins minus the fitted background.
double estimate_g0(const Spectrum& spectrum, const PhaseCalTone& cal,
                   double n_mech, double f_m);

}  // namespace phonopulse
