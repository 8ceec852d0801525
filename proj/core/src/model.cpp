#include "phonopulse/model.hpp"

#include <cmath>
#include <stdexcept>

#include "phonopulse/constants.hpp"

namespace phonopulse {

MechanicalMode::MechanicalMode(double f_m_hz, double quality)
    : f_m(f_m_hz), q_m(quality), gamma_m(f_m_hz / quality) {
  validate();
}

MechanicalMode MechanicalMode::from_linewidth(double f_m_hz,
                                              double gamma_m_hz) {
  if (gamma_m_hz <= 0.0)
    throw std::invalid_argument("MechanicalMode: gamma_m must be > 0");
  return MechanicalMode(f_m_hz, f_m_hz / gamma_m_hz);
}

void MechanicalMode::validate() const {
  if (!(f_m > 0.0)) throw std::invalid_argument("MechanicalMode: f_m must be > 0");
  if (!(q_m > 0.0)) throw std::invalid_argument("MechanicalMode: q_m must be > 0");
  const double expected = f_m / q_m;
  if (std::abs(gamma_m - expected) > 1e-12 * expected)
    throw std::invalid_argument("MechanicalMode: gamma_m != f_m / q_m");
}

void OpticalMode::validate() const {
  if (!(kappa > 0.0)) throw std::invalid_argument("OpticalMode: kappa must be > 0");
  if (n_cav < 0.0) throw std::invalid_argument("OpticalMode: n_cav must be >= 0");
  if (g0 < 0.0) throw std::invalid_argument("OpticalMode: g0 must be >= 0");
}

void BathModel::validate() const {
  if (n_th < 0.0 || n_p < 0.0)
    throw std::invalid_argument("BathModel: occupancies must be >= 0");
  if (gamma_m < 0.0 || gamma_p < 0.0)
    throw std::invalid_argument("BathModel: rates must be >= 0");
}

void Environment::validate() const {
  if (!(t_fridge > 0.0))
    throw std::invalid_argument("Environment: t_fridge must be > 0");
}

double decay_rate(double quoted_rate_hz, RateConvention conv) {
  return conv == RateConvention::angular ? quoted_rate_hz
                                         : kTwoPi * quoted_rate_hz;
}

double bose_einstein(double temperature_k, double frequency_hz) {
  if (!(temperature_k > 0.0))
    throw std::domain_error("bose_einstein: temperature must be > 0");
  if (!(frequency_hz > 0.0))
    throw std::domain_error("bose_einstein: frequency must be > 0");
  const double x = kPlanck * frequency_hz / (kBoltzmann * temperature_k);
  // expm1 keeps the classical limit k_B T / h f accurate at small x.
  return 1.0 / std::expm1(x);
}

double bose_einstein_temperature(double occupancy, double frequency_hz) {
  if (!(occupancy > 0.0))
    throw std::domain_error("bose_einstein_temperature: occupancy must be > 0");
  if (!(frequency_hz > 0.0))
    throw std::domain_error("bose_einstein_temperature: frequency must be > 0");
  return kPlanck * frequency_hz /
         (kBoltzmann * std::log1p(1.0 / occupancy));
}

double occupancy_evolution(double n0, double n_eq, double decay_rate_per_s,
                           double t_s) {
  if (t_s < 0.0) throw std::domain_error("occupancy_evolution: t must be >= 0");
  if (decay_rate_per_s < 0.0)
    throw std::domain_error("occupancy_evolution: rate must be >= 0");
  const double decay = std::exp(-decay_rate_per_s * t_s);
  return n0 * decay + n_eq * (1.0 - decay);
}

double equilibrium_occupancy(const BathModel& bath) {
  bath.validate();
  const double total = bath.total_rate();
  if (!(total > 0.0))
    throw std::domain_error("equilibrium_occupancy: total bath rate is zero");
  return (bath.gamma_m * bath.n_th + bath.gamma_p * bath.n_p) / total;
}

double ground_state_probability(double occupancy) {
  if (occupancy < 0.0)
    throw std::domain_error("ground_state_probability: occupancy must be >= 0");
  return 1.0 / (1.0 + occupancy);
}

}  // namespace phonopulse
