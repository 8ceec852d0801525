#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <vector>

#include "phonopulse/constants.hpp"
#include "phonopulse/metrics.hpp"
#include "phonopulse/rng.hpp"

using namespace phonopulse;

namespace {
constexpr double kFm = 2.3725e9;
constexpr double kKappa = 5.0e9;

OpticalMode device_optics() { return OpticalMode{193.7e12, kKappa, 1.3e6, 230.0}; }
}  // namespace

TEST_CASE("optomechanical interaction rate") {
  const double g = gamma_om(device_optics());
  CHECK(g == doctest::Approx(0.31096e6).epsilon(1e-6));
  // Device regression: 0.31 MHz within 2%.
  CHECK(std::abs(g - 0.31e6) / 0.31e6 < 0.02);

  OpticalMode dark = device_optics();
  dark.n_cav = 0.0;
  CHECK(gamma_om(dark) == 0.0);

  OpticalMode strong = device_optics();
  strong.g0 *= 2.0;
  CHECK(gamma_om(strong) == doctest::Approx(4.0 * g).epsilon(1e-12));

  OpticalMode bad = device_optics();
  bad.kappa = 0.0;
  CHECK_THROWS(gamma_om(bad));
}

TEST_CASE("cooperativities reproduce the device values") {
  const MechanicalMode mech = MechanicalMode::from_linewidth(kFm, 83e3);
  const double g_om = 0.31096e6;
  const Cooperativities c = cooperativities(g_om, mech, 1.05e6, 95.0);
  CHECK(c.coop == doctest::Approx(3.7465).epsilon(1e-3));
  CHECK(std::abs(c.coop - 3.7) / 3.7 < 0.03);
  CHECK(c.coop_q == doctest::Approx(3.1174e-3).epsilon(1e-3));
  CHECK(std::abs(c.coop_q - 3.1e-3) / 3.1e-3 < 0.05);

  // Limiting identity: n_eq = 1 and Gamma = gamma_m collapse the two.
  const Cooperativities lim = cooperativities(g_om, mech, mech.gamma_m, 1.0);
  CHECK(lim.coop_q == doctest::Approx(lim.coop).epsilon(1e-12));

  CHECK_THROWS_AS(cooperativities(g_om, mech, 0.0, 95.0), std::domain_error);
  CHECK_THROWS_AS(cooperativities(g_om, mech, 1.05e6, 0.0), std::domain_error);
}

TEST_CASE("cooperativity identity and rescale invariance") {
  const MechanicalMode mech = MechanicalMode::from_linewidth(kFm, 83e3);
  const double g_om = 0.31096e6;
  const double gamma_total = 1.05e6, n_eq = 95.0;
  const Cooperativities c = cooperativities(g_om, mech, gamma_total, n_eq);
  // C_qu * n_eq * (Gamma / gamma_m) = C.
  CHECK(c.coop_q * n_eq * (gamma_total / mech.gamma_m) ==
        doctest::Approx(c.coop).epsilon(1e-12));

  for (double s : {1e-3, 42.0}) {
    const MechanicalMode mech_s =
        MechanicalMode::from_linewidth(kFm, 83e3 * s);
    const Cooperativities cs =
        cooperativities(g_om * s, mech_s, gamma_total * s, n_eq);
    CHECK(cs.coop == doctest::Approx(c.coop).epsilon(1e-12));
    CHECK(cs.coop_q == doctest::Approx(c.coop_q).epsilon(1e-12));
  }
}

TEST_CASE("added noise reproduces both quoted bath values") {
  // Ambient bath: C = n_th / C_int with the quoted 3.7.
  const double ambient = added_noise(0.7 / 3.7, kKappa, kFm);
  CHECK(ambient == doctest::Approx(0.36536).epsilon(1e-4));
  CHECK(std::abs(ambient - 0.4) / 0.4 < 0.10);

  // Combined baths: C = 1 / C_qu with the quoted 3e-3.
  const double total = added_noise(1.0 / 3e-3, kKappa, kFm);
  CHECK(total == doctest::Approx(261.12).epsilon(1e-4));
  CHECK(std::abs(total - 262.0) / 262.0 < 0.03);

  // Resolved-sideband noiseless limit.
  CHECK(added_noise(0.0, 0.0, kFm) == doctest::Approx(0.0));
  CHECK_THROWS_AS(added_noise(-0.1, kKappa, kFm), std::domain_error);
}

TEST_CASE("added noise is monotone in C and in kappa / f_m") {
  double prev = -1.0;
  for (double c = 0.0; c < 10.0; c += 0.37) {
    const double v = added_noise(c, kKappa, kFm);
    CHECK(v > prev);
    prev = v;
  }
  prev = -1.0;
  for (double kappa = 0.0; kappa < 30e9; kappa += 1.7e9) {
    const double v = added_noise(0.19, kappa, kFm);
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("figures of merit aggregate") {
  const MechanicalMode mech = MechanicalMode::from_linewidth(kFm, 83e3);
  const FiguresOfMerit fom =
      compute_figures_of_merit(device_optics(), mech, 1.05e6, 95.0, 0.7);
  CHECK(fom.gamma_om == doctest::Approx(0.31096e6).epsilon(1e-6));
  CHECK(fom.coop == doctest::Approx(3.7465).epsilon(1e-3));
  CHECK(fom.coop_q == doctest::Approx(3.1174e-3).epsilon(1e-3));
  CHECK(fom.n_add_ambient == doctest::Approx(0.3635).epsilon(1e-3));
  // Chain-computed total (unrounded C_qu), distinct from the quoted-input
  // regression above.
  CHECK(fom.n_add_total == doctest::Approx(251.3).epsilon(1e-3));
  CHECK(fom.coop_q <= fom.coop);

  OpticalMode dark = device_optics();
  dark.n_cav = 0.0;
  const FiguresOfMerit zero =
      compute_figures_of_merit(dark, mech, 1.05e6, 95.0, 0.7);
  CHECK(zero.gamma_om == 0.0);
  CHECK(zero.coop == 0.0);
  CHECK(zero.n_add_total == 0.0);
}

TEST_CASE("g0 estimation: identity, round trip, and device scale") {
  // Prefactor identity: equal areas and a unit prefactor.
  const double depth = 0.2, n_mech = 4.0, f_cal = 2.37e9;

  auto build_spectrum = [&](double area_ratio, double noise_frac,
                            std::uint64_t seed) {
    Spectrum spec;
    spec.resolution = 2e4;
    const double fwhm = kFm / 1.1e3;  // Q = 1100 at 4.2 K
    const double a_cal = 1e-9;
    const double a_mech = area_ratio * a_cal;
    const double amp = a_mech * 2.0 / (kPi * fwhm);
    Rng rng(seed);
    for (double f = 2.360e9; f <= 2.385e9; f += spec.resolution) {
      const double u = 2.0 * (f - kFm) / fwhm;
      double s = 1e-3 * amp + amp / (1.0 + u * u);
      if (std::abs(f - f_cal) < 0.5 * spec.resolution)
        s += a_cal / spec.resolution;
      if (noise_frac > 0.0) s *= 1.0 + noise_frac * rng.gaussian();
      spec.f.push_back(f);
      spec.psd.push_back(s);
    }
    return spec;
  };

  // Forward-model round trip: spectrum built from the formula's own areas.
  const double g0_target = 1.1e6;
  const double ratio =
      4.0 * n_mech * g0_target * g0_target / (depth * depth * f_cal * f_cal);
  const Spectrum clean = build_spectrum(ratio, 0.0, 0);
  const double g0_est = estimate_g0(clean, {f_cal, depth}, n_mech, kFm);
  CHECK(g0_est == doctest::Approx(g0_target).epsilon(1e-3));

  // Unit prefactor: g0 = depth * f_cal / (2 sqrt(n_mech)).
  const Spectrum unit = build_spectrum(1.0, 0.0, 0);
  const double g0_unit = estimate_g0(unit, {f_cal, depth}, n_mech, kFm);
  CHECK(g0_unit ==
        doctest::Approx(depth * f_cal / (2.0 * std::sqrt(n_mech)))
            .epsilon(1e-3));

  // Device scale at 4.2 K: n_mech from the thermal occupancy (~36.4),
  // recovered inside the 1.3 +- 0.3 MHz band.
  const double n_42 = bose_einstein(4.2, kFm);
  CHECK(n_42 == doctest::Approx(36.39).epsilon(1e-3));
  const double ratio_dev =
      4.0 * n_42 * 1.3e6 * 1.3e6 / (depth * depth * f_cal * f_cal);
  const Spectrum dev = build_spectrum(ratio_dev, 0.01, 42);
  const double g0_dev = estimate_g0(dev, {f_cal, depth}, n_42, kFm);
  CHECK(std::abs(g0_dev - 1.3e6) < 0.3e6);

  // Unresolved peak: coarse grid must be rejected.
  Spectrum coarse;
  coarse.resolution = 5e6;
  for (double f = 2.30e9; f <= 2.45e9; f += coarse.resolution) {
    coarse.f.push_back(f);
    coarse.psd.push_back(1e-16);
  }
  CHECK_THROWS_AS(estimate_g0(coarse, {f_cal, depth}, n_mech, kFm),
                  std::domain_error);
}
