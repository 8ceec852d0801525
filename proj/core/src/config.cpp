#include "phonopulse/config.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace phonopulse {

namespace {

const std::set<std::pair<std::string, std::string>>& known_keys() {
  static const std::set<std::pair<std::string, std::string>> keys = {
      {"device", "f_m_hz"},          {"device", "q_m"},
      {"device", "gamma_m_hz"},      {"device", "f_c_hz"},
      {"device", "kappa_hz"},        {"device", "g0_hz"},
      {"device", "n_cav"},           {"hot_bath", "gamma_p_hz"},
      {"hot_bath", "n_p"},           {"hot_bath", "rate_convention"},
      {"sweep", "temperatures_k"},   {"pulse", "f_if_hz"},
      {"pulse", "sample_rate_hz"},   {"pulse", "t_pulse_s"},
      {"pulse", "n_reps"},           {"pulse", "base_seed"},
      {"truth", "alpha_v_v2_per_phonon"}, {"truth", "sigma_imp_v"},
      {"truth", "n_floor_phonons"},  {"filter", "bandwidth_hz"},
      {"filter", "n_taps"},          {"filter", "window"},
      {"filter", "offres_offset_hz"},{"fit", "t_min_k"},
      {"fit", "offset_convention"},  {"fit", "n_groups"},
      {"fit", "min_calibration_points"}, {"transduction", "gamma_total_hz"},
      {"transduction", "n_eq"},      {"transduction", "n_th"},
      {"limits", "max_output_bytes"},
  };
  return keys;
}

}  // namespace

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  const KvDoc doc = KvDoc::load(path);
  RunConfig cfg;
  // Reject unknown sections or keys before reading anything.
  for (const auto& sec : doc.sections()) {
    for (const auto& e : sec.entries) {
      if (!known_keys().count({sec.name, e.key}))
        throw std::invalid_argument("config: unknown key [" + sec.name + "] " +
                                    e.key);
    }
  }

  auto opt_double = [&](const char* s, const char* k, double& out) {
    if (doc.has(s, k)) out = doc.get_double(s, k);
  };
  auto opt_int = [&](const char* s, const char* k, std::int64_t& out) {
    if (doc.has(s, k)) out = doc.get_int(s, k);
  };

  opt_double("device", "f_m_hz", cfg.f_m_hz);
  cfg.q_m = 0.0;
  cfg.gamma_m_hz = 0.0;
  opt_double("device", "q_m", cfg.q_m);
  opt_double("device", "gamma_m_hz", cfg.gamma_m_hz);
  opt_double("device", "f_c_hz", cfg.f_c_hz);
  opt_double("device", "kappa_hz", cfg.kappa_hz);
  opt_double("device", "g0_hz", cfg.g0_hz);
  opt_double("device", "n_cav", cfg.n_cav);

  opt_double("hot_bath", "gamma_p_hz", cfg.gamma_p_hz);
  opt_double("hot_bath", "n_p", cfg.n_p);
  if (doc.has("hot_bath", "rate_convention")) {
    const std::string v = doc.get("hot_bath", "rate_convention");
    if (v == "angular")
      cfg.convention = RateConvention::angular;
    else if (v == "ordinary")
      cfg.convention = RateConvention::ordinary;
    else
      throw std::invalid_argument(
          "config: rate_convention must be 'angular' or 'ordinary', got '" + v +
          "'");
  }

  if (doc.has("sweep", "temperatures_k"))
    cfg.temperatures_k = doc.get_double_list("sweep", "temperatures_k");

  opt_double("pulse", "f_if_hz", cfg.f_if_hz);
  opt_double("pulse", "sample_rate_hz", cfg.sample_rate_hz);
  opt_double("pulse", "t_pulse_s", cfg.t_pulse_s);
  opt_int("pulse", "n_reps", cfg.n_reps);
  if (doc.has("pulse", "base_seed"))
    cfg.base_seed = static_cast<std::uint64_t>(doc.get_int("pulse", "base_seed"));

  opt_double("truth", "alpha_v_v2_per_phonon", cfg.alpha_v);
  opt_double("truth", "sigma_imp_v", cfg.sigma_imp_v);
  opt_double("truth", "n_floor_phonons", cfg.n_floor);

  opt_double("filter", "bandwidth_hz", cfg.bandwidth_hz);
  opt_int("filter", "n_taps", cfg.n_taps);
  if (doc.has("filter", "window")) cfg.window = doc.get("filter", "window");
  opt_double("filter", "offres_offset_hz", cfg.offres_offset_hz);

  opt_double("fit", "t_min_k", cfg.t_min_k);
  if (doc.has("fit", "offset_convention"))
    cfg.offset_convention = doc.get("fit", "offset_convention");
  opt_int("fit", "n_groups", cfg.n_groups);
  opt_int("fit", "min_calibration_points", cfg.min_calibration_points);

  opt_double("transduction", "gamma_total_hz", cfg.gamma_total_hz);
  opt_double("transduction", "n_eq", cfg.n_eq);
  opt_double("transduction", "n_th", cfg.n_th);

  if (doc.has("limits", "max_output_bytes"))
    cfg.max_output_bytes =
        static_cast<std::uint64_t>(doc.get_int("limits", "max_output_bytes"));

  cfg.validate();
  return cfg;
}

RunConfig RunConfig::from_text(const std::string& text) {
  const std::filesystem::path tmp =
      std::filesystem::temp_directory_path() /
      ("phonopulse_cfg_" + std::to_string(KvDoc::parse_text(text).hash()) +
       ".cfg");
  atomic_write_text(tmp, text);
  RunConfig cfg = from_file(tmp);
  std::filesystem::remove(tmp);
  return cfg;
}

KvDoc RunConfig::to_doc() const {
  KvDoc doc;
  doc.set_double("device", "f_m_hz", f_m_hz);
  if (q_m > 0.0) doc.set_double("device", "q_m", q_m);
  if (gamma_m_hz > 0.0) doc.set_double("device", "gamma_m_hz", gamma_m_hz);
  if (f_c_hz > 0.0) doc.set_double("device", "f_c_hz", f_c_hz);
  doc.set_double("device", "kappa_hz", kappa_hz);
  doc.set_double("device", "g0_hz", g0_hz);
  doc.set_double("device", "n_cav", n_cav);
  doc.set_double("hot_bath", "gamma_p_hz", gamma_p_hz);
  doc.set_double("hot_bath", "n_p", n_p);
  doc.set("hot_bath", "rate_convention",
          convention == RateConvention::angular ? "angular" : "ordinary");
  if (!temperatures_k.empty()) {
    std::string list;
    for (std::size_t i = 0; i < temperatures_k.size(); ++i) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.17g", temperatures_k[i]);
      list += buf;
      if (i + 1 < temperatures_k.size()) list += ", ";
    }
    doc.set("sweep", "temperatures_k", list);
  }
  doc.set_double("pulse", "f_if_hz", f_if_hz);
  doc.set_double("pulse", "sample_rate_hz", sample_rate_hz);
  doc.set_double("pulse", "t_pulse_s", t_pulse_s);
  doc.set_int("pulse", "n_reps", n_reps);
  doc.set_int("pulse", "base_seed", static_cast<std::int64_t>(base_seed));
  doc.set_double("truth", "alpha_v_v2_per_phonon", alpha_v);
  doc.set_double("truth", "sigma_imp_v", sigma_imp_v);
  doc.set_double("truth", "n_floor_phonons", n_floor);
  doc.set_double("filter", "bandwidth_hz", bandwidth_hz);
  doc.set_int("filter", "n_taps", n_taps);
  doc.set("filter", "window", window);
  doc.set_double("filter", "offres_offset_hz", offres_offset_hz);
  doc.set_double("fit", "t_min_k", t_min_k);
  doc.set("fit", "offset_convention", offset_convention);
  doc.set_int("fit", "n_groups", n_groups);
  doc.set_int("fit", "min_calibration_points", min_calibration_points);
  doc.set_double("transduction", "gamma_total_hz", gamma_total_hz);
  doc.set_double("transduction", "n_eq", n_eq);
  doc.set_double("transduction", "n_th", n_th);
  doc.set_int("limits", "max_output_bytes",
              static_cast<std::int64_t>(max_output_bytes));
  return doc;
}

void RunConfig::validate() const {
  if (!(f_m_hz > 0.0)) throw std::invalid_argument("config: f_m_hz must be > 0");
  if (!(q_m > 0.0) && !(gamma_m_hz > 0.0))
    throw std::invalid_argument("config: give device q_m or gamma_m_hz");
  if (q_m > 0.0 && gamma_m_hz > 0.0) {
    const double implied = f_m_hz / q_m;
    if (std::abs(implied - gamma_m_hz) > 1e-9 * gamma_m_hz)
      throw std::invalid_argument(
          "config: q_m and gamma_m_hz disagree; give one of them");
  }
  mechanical_mode();  // runs the type invariants
  optical_mode();
  if (gamma_p_hz < 0.0 || n_p < 0.0)
    throw std::invalid_argument("config: hot bath values must be >= 0");
  pulse_config().validate();
  filter_spec().validate(sample_rate_hz);
  if (offres_center_hz() + 0.5 * bandwidth_hz >= 0.5 * sample_rate_hz)
    throw std::invalid_argument(
        "config: off-resonance band crosses Nyquist; reduce offres_offset_hz");
  if (bandwidth_hz <= effective_gamma_total_hz())
    throw std::invalid_argument(
        "config: filter bandwidth must exceed the mechanical linewidth");
  if (!(t_min_k > 0.0)) throw std::invalid_argument("config: t_min_k must be > 0");
  if (offset_convention != "occupancy" && offset_convention != "temperature")
    throw std::invalid_argument(
        "config: offset_convention must be 'occupancy' or 'temperature'");
  if (n_groups < 1) throw std::invalid_argument("config: n_groups must be >= 1");
  if (min_calibration_points < 2)
    throw std::invalid_argument("config: min_calibration_points must be >= 2");
  for (double t : temperatures_k) Environment{t}.validate();
  if (!(alpha_v > 0.0))
    throw std::invalid_argument("config: alpha_v_v2_per_phonon must be > 0");
  if (sigma_imp_v < 0.0 || n_floor < 0.0)
    throw std::invalid_argument("config: truth noise terms must be >= 0");
}

MechanicalMode RunConfig::mechanical_mode() const {
  if (q_m > 0.0) return MechanicalMode(f_m_hz, q_m);
  return MechanicalMode::from_linewidth(f_m_hz, gamma_m_hz);
}

OpticalMode RunConfig::optical_mode() const {
  OpticalMode opt;
  opt.f_c = f_c_hz;
  opt.kappa = kappa_hz;
  opt.g0 = g0_hz;
  opt.n_cav = n_cav;
  opt.validate();
  return opt;
}

BathModel RunConfig::bath_for_temperature(double temperature_k) const {
  BathModel bath;
  bath.n_th = bose_einstein(temperature_k, f_m_hz);
  bath.gamma_m = mechanical_mode().gamma_m;
  bath.n_p = n_p;
  bath.gamma_p = gamma_p_hz;
  bath.validate();
  return bath;
}

SynthTruth RunConfig::truth_for_temperature(double temperature_k) const {
  SynthTruth truth;
  truth.bath = bath_for_temperature(temperature_k);
  truth.convention = convention;
  truth.n0 = truth.bath.n_th;  // device starts in ambient equilibrium
  truth.alpha_v = alpha_v;
  truth.sigma_imp = sigma_imp_v;
  truth.n_floor = n_floor;
  return truth;
}

PulseConfig RunConfig::pulse_config() const {
  PulseConfig pc;
  pc.f_if = f_if_hz;
  pc.sample_rate = sample_rate_hz;
  pc.t_pulse = t_pulse_s;
  pc.n_reps = static_cast<std::size_t>(n_reps);
  pc.base_seed = base_seed;
  return pc;
}

FilterSpec RunConfig::filter_spec() const {
  FilterSpec spec = FilterSpec::design(f_if_hz, bandwidth_hz, sample_rate_hz);
  if (n_taps > 0) spec.n_taps = static_cast<int>(n_taps);
  spec.window = window_from_name(window);
  return spec;
}

double RunConfig::offres_center_hz() const {
  const double offset =
      offres_offset_hz > 0.0 ? offres_offset_hz : 2.5 * bandwidth_hz;
  return f_if_hz + offset;
}

OffsetConvention RunConfig::offset_convention_enum() const {
  return offset_convention == "temperature" ? OffsetConvention::temperature
                                            : OffsetConvention::occupancy;
}

double RunConfig::effective_gamma_total_hz() const {
  if (gamma_total_hz > 0.0) return gamma_total_hz;
  return mechanical_mode().gamma_m + gamma_p_hz;
}

}  // namespace phonopulse
