#include "phonopulse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "phonopulse/errors.hpp"

namespace phonopulse {

double gamma_om(const OpticalMode& optical) {
  optical.validate();
  if (!(optical.kappa > 0.0))
    throw std::domain_error("gamma_om: kappa must be > 0");
  return 4.0 * optical.g0 * optical.g0 * optical.n_cav / optical.kappa;
}

Cooperativities cooperativities(double gamma_om_hz, const MechanicalMode& mech,
                                double gamma_total_hz, double n_eq) {
  mech.validate();
  if (!(mech.gamma_m > 0.0))
    throw std::domain_error("cooperativities: gamma_m must be > 0");
  if (!(gamma_total_hz > 0.0))
    throw std::domain_error("cooperativities: total rate must be > 0");
  if (!(n_eq > 0.0))
    throw std::domain_error("cooperativities: n_eq must be > 0");
  Cooperativities c;
  c.coop = gamma_om_hz / mech.gamma_m;
  c.coop_q = gamma_om_hz / (gamma_total_hz * n_eq);
  return c;
}

double added_noise(double c_param, double kappa_hz, double f_m_hz) {
  if (c_param < 0.0)
    throw std::domain_error("added_noise: C parameter must be >= 0");
  if (!(f_m_hz > 0.0)) throw std::domain_error("added_noise: f_m must be > 0");
  if (kappa_hz < 0.0) throw std::domain_error("added_noise: kappa must be >= 0");
  const double s = kappa_hz / (4.0 * f_m_hz);
  const double s2 = s * s;
  return (c_param + s2) / (1.0 + s2);
}

FiguresOfMerit compute_figures_of_merit(const OpticalMode& optical,
                                        const MechanicalMode& mech,
                                        double gamma_total_hz, double n_eq,
                                        double n_th) {
  FiguresOfMerit fom;
  fom.gamma_om = gamma_om(optical);
  if (fom.gamma_om == 0.0) return fom;  // no interaction, all metrics zero
  const Cooperativities c =
      cooperativities(fom.gamma_om, mech, gamma_total_hz, n_eq);
  fom.coop = c.coop;
  fom.coop_q = c.coop_q;
  fom.n_add_ambient = added_noise(n_th / c.coop, optical.kappa, mech.f_m);
  fom.n_add_total = added_noise(1.0 / c.coop_q, optical.kappa, mech.f_m);
  return fom;
}

double estimate_g0(const Spectrum& spectrum, const PhaseCalTone& cal,
                   double n_mech, double f_m) {
  if (!(n_mech > 0.0)) throw std::domain_error("estimate_g0: n_mech must be > 0");
  if (!(cal.phase_mod_depth > 0.0) || !(cal.f_cal > 0.0))
    throw std::domain_error("estimate_g0: calibration tone not specified");
  if (spectrum.f.size() < 16)
    throw std::domain_error("estimate_g0: spectrum too short");

  const double df = spectrum.resolution;
  // Mask the calibration tone out of the mechanical fit.
  const double cal_halfwidth = 3.0 * df;
  std::vector<double> xs, ys;
  xs.reserve(spectrum.f.size());
  for (std::size_t i = 0; i < spectrum.f.size(); ++i) {
    if (std::abs(spectrum.f[i] - cal.f_cal) <= cal_halfwidth) continue;
    xs.push_back(spectrum.f[i]);
    ys.push_back(spectrum.psd[i]);
  }
  LorentzianFit mech_fit;
  try {
    mech_fit = lorentzian_fit(xs, ys);
  } catch (const FitError& e) {
    throw std::domain_error(std::string("estimate_g0: mechanical peak not "
                                        "fittable: ") +
                            e.what());
  }
  if (!(mech_fit.amplitude > 0.0))
    throw std::domain_error("estimate_g0: no mechanical peak above background");
  if (mech_fit.fwhm < 2.0 * df)
    throw std::domain_error("estimate_g0: mechanical peak unresolved");
  if (std::abs(mech_fit.center - f_m) > std::max(2.0 * mech_fit.fwhm, 4.0 * df))
    throw std::domain_error("estimate_g0: fitted peak far from f_m");

  // Tone area: bins near f_cal minus the fitted mechanical background.
  double a_cal = 0.0;
  std::size_t n_cal_bins = 0;
  for (std::size_t i = 0; i < spectrum.f.size(); ++i) {
    if (std::abs(spectrum.f[i] - cal.f_cal) > cal_halfwidth) continue;
    const double u = 2.0 * (spectrum.f[i] - mech_fit.center) / mech_fit.fwhm;
    const double background =
        mech_fit.offset + mech_fit.amplitude / (1.0 + u * u);
    a_cal += (spectrum.psd[i] - background) * df;
    ++n_cal_bins;
  }
  if (n_cal_bins == 0 || !(a_cal > 0.0))
    throw std::domain_error("estimate_g0: calibration tone unresolved");

  const double a_mech = mech_fit.peak_area();
  const double g0_sq = cal.phase_mod_depth * cal.phase_mod_depth * cal.f_cal *
                       cal.f_cal / (4.0 * n_mech) * (a_mech / a_cal);
  return std::sqrt(g0_sq);
}

}  // namespace phonopulse
