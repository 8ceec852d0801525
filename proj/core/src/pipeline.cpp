#include "phonopulse/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "phonopulse/constants.hpp"
#include "phonopulse/errors.hpp"
#include "phonopulse/kvdoc.hpp"
#include "phonopulse/leastsq.hpp"
#include "phonopulse/trace_io.hpp"

namespace phonopulse {

namespace {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t s = base ^ (0xa0761d6478bd642full * (index + 1));
  return splitmix64(s);
}

std::string temp_tag(double temperature_k) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "T%.4fK", temperature_k);
  return buf;
}

std::string hash_hex(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<std::string> provenance_header(std::uint64_t config_hash,
                                           std::uint64_t seed) {
  return {"config_hash = " + hash_hex(config_hash),
          "seed = " + std::to_string(seed)};
}

void set_provenance(KvDoc& doc, std::uint64_t config_hash, std::uint64_t seed) {
  doc.set("provenance", "config_hash", hash_hex(config_hash));
  doc.set_int("provenance", "seed", static_cast<std::int64_t>(seed));
}

void write_csv(const std::filesystem::path& path, const std::string& body,
               std::uint64_t config_hash, std::uint64_t seed) {
  std::string text = "# config_hash = " + hash_hex(config_hash) + "\n# seed = " +
                     std::to_string(seed) + "\n" + body;
  atomic_write_text(path, text);
}

// Time-average of an off-resonance area series with a group-scatter error.
void offres_statistics(const PeakAreaSeries& series, double* mean_out,
                       double* se_out) {
  double mean = std::accumulate(series.area.begin(), series.area.end(), 0.0) /
                static_cast<double>(series.area.size());
  double se = 0.0;
  const std::size_t k = series.group_area.size();
  if (k >= 2) {
    std::vector<double> gmean(k, 0.0);
    for (std::size_t g = 0; g < k; ++g)
      gmean[g] =
          std::accumulate(series.group_area[g].begin(),
                          series.group_area[g].end(), 0.0) /
          static_cast<double>(series.group_area[g].size());
    const double m = std::accumulate(gmean.begin(), gmean.end(), 0.0) /
                     static_cast<double>(k);
    double ss = 0.0;
    for (double v : gmean) ss += (v - m) * (v - m);
    se = std::sqrt(ss / static_cast<double>(k - 1) / static_cast<double>(k));
  }
  *mean_out = mean;
  *se_out = se;
}

struct HeatingRecord {
  double temperature_k = 0.0;
  HeatingFit fit;
  double offres_area = 0.0;
  double offres_area_se = 0.0;
};

HeatingRecord parse_heating_report(const std::filesystem::path& path) {
  const KvDoc doc = KvDoc::load(path);
  HeatingRecord rec;
  rec.temperature_k = doc.get_double("heating_fit", "temperature_k");
  rec.fit.area_t0 = doc.get_double("heating_fit", "area_t0_v2");
  rec.fit.area_t0_se = doc.get_double("heating_fit", "area_t0_se_v2");
  rec.fit.area_t0_ci95 = doc.get_double("heating_fit", "area_t0_ci95_v2");
  rec.fit.area_eq = doc.get_double("heating_fit", "area_eq_v2");
  rec.fit.area_eq_ci95 = doc.get_double("heating_fit", "area_eq_ci95_v2");
  rec.fit.gamma_fit = doc.get_double("heating_fit", "gamma_fit_per_s");
  rec.fit.gamma_ci95 = doc.get_double("heating_fit", "gamma_ci95_per_s");
  rec.fit.se_dof = doc.get_double("heating_fit", "se_dof");
  rec.fit.residual_rms = doc.get_double("heating_fit", "residual_rms_v2");
  rec.fit.ill_conditioned = doc.get_int("heating_fit", "ill_conditioned") != 0;
  rec.fit.n_points =
      static_cast<std::size_t>(doc.get_int("heating_fit", "n_points"));
  rec.offres_area = doc.get_double("offres", "area_v2");
  rec.offres_area_se = doc.get_double("offres", "area_se_v2");
  return rec;
}

KvDoc heating_report_doc(const AnalyzeItem& item, double t_trunc,
                         std::uint64_t config_hash, std::uint64_t seed) {
  KvDoc doc;
  const HeatingFit& f = item.heating;
  doc.set_double("heating_fit", "temperature_k", item.temperature_k);
  doc.set_double("heating_fit", "area_t0_v2", f.area_t0);
  doc.set_double("heating_fit", "area_t0_se_v2", f.area_t0_se);
  doc.set_double("heating_fit", "area_t0_ci95_v2", f.area_t0_ci95);
  doc.set_double("heating_fit", "area_eq_v2", f.area_eq);
  doc.set_double("heating_fit", "area_eq_ci95_v2", f.area_eq_ci95);
  doc.set_double("heating_fit", "gamma_fit_per_s", f.gamma_fit);
  doc.set_double("heating_fit", "gamma_ci95_per_s", f.gamma_ci95);
  doc.set_double("heating_fit", "se_dof", f.se_dof);
  doc.set_double("heating_fit", "residual_rms_v2", f.residual_rms);
  doc.set_int("heating_fit", "n_points", static_cast<std::int64_t>(f.n_points));
  doc.set_int("heating_fit", "ill_conditioned", f.ill_conditioned ? 1 : 0);
  doc.set_int("heating_fit", "scatter_ci", f.scatter_ci ? 1 : 0);
  doc.set_double("heating_fit", "t_trunc_s", t_trunc);
  doc.set_double("offres", "area_v2", item.offres_area);
  doc.set_double("offres", "area_se_v2", item.offres_area_se);
  set_provenance(doc, config_hash, seed);
  return doc;
}

}  // namespace

SimulateResult run_simulate(const RunConfig& cfg,
                            const std::filesystem::path& out_dir,
                            std::optional<std::uint64_t> seed_override,
                            int n_threads) {
  cfg.validate();
  if (cfg.temperatures_k.empty())
    throw std::invalid_argument("simulate: [sweep] temperatures_k is empty");

  const std::uint64_t seed = seed_override.value_or(cfg.base_seed);
  const std::uint64_t config_hash = cfg.hash();
  const PulseConfig pulse_base = cfg.pulse_config();

  // Size preflight for the whole sweep.
  const std::uint64_t bytes_per_set = static_cast<std::uint64_t>(
      pulse_base.n_reps) * pulse_base.n_samples() * sizeof(float);
  const std::uint64_t total = bytes_per_set * cfg.temperatures_k.size();
  if (total > cfg.max_output_bytes)
    throw ResourceError(
        "simulate: sweep output would exceed [limits] max_output_bytes = " +
            std::to_string(cfg.max_output_bytes),
        total);

  std::filesystem::create_directories(out_dir);
  SimulateResult result;
  result.seed = seed;
  result.config_hash = config_hash;
  for (std::size_t i = 0; i < cfg.temperatures_k.size(); ++i) {
    const double t_k = cfg.temperatures_k[i];
    PulseConfig pulse = pulse_base;
    pulse.base_seed = derive_seed(seed, i);
    const SynthTruth truth = cfg.truth_for_temperature(t_k);
    TraceSet set =
        synthesize_ensemble(pulse, truth, n_threads, cfg.max_output_bytes);
    set.temperature_k() = t_k;
    set.provenance().base_seed = seed;
    set.provenance().config_hash = config_hash;
    const std::filesystem::path path =
        out_dir / ("traces_" + temp_tag(t_k) + ".bin");
    write_traceset(set, path);
    result.trace_files.push_back(path);
  }
  return result;
}

AnalyzeItem analyze_traceset(const RunConfig& cfg, const TraceSet& traces,
                             double temperature_k, int n_threads) {
  const FilterSpec filt = cfg.filter_spec();
  PeakAreaOptions opts;
  opts.n_groups = static_cast<int>(cfg.n_groups);
  opts.n_threads = n_threads;

  AnalyzeItem item;
  item.temperature_k = temperature_k;
  item.series = peak_area(traces, filt, opts);
  item.heating = fit_heating(item.series);

  PeakAreaOptions off_opts = opts;
  off_opts.f_center_override = cfg.offres_center_hz();
  const PeakAreaSeries off = peak_area(traces, filt, off_opts);
  offres_statistics(off, &item.offres_area, &item.offres_area_se);
  return item;
}

AnalyzeResult run_analyze(const RunConfig& cfg,
                          const std::vector<std::filesystem::path>& trace_files,
                          const std::filesystem::path& out_dir, int n_threads) {
  if (trace_files.empty())
    throw std::invalid_argument("analyze: no input trace files given");
  std::filesystem::create_directories(out_dir);

  AnalyzeResult result;
  for (const auto& path : trace_files) {
    const TraceSet traces = read_traceset(path);
    if (!traces.temperature_k())
      throw FormatError("analyze: trace sidecar lacks the sweep temperature",
                        "trace.temperature_k");
    AnalyzeItem item =
        analyze_traceset(cfg, traces, *traces.temperature_k(), n_threads);

    const std::string tag = temp_tag(item.temperature_k);
    item.area_csv = out_dir / ("area_" + tag + ".csv");
    std::ostringstream csv;
    item.series.to_csv(csv);
    write_csv(item.area_csv, csv.str(), traces.provenance().config_hash,
              traces.provenance().base_seed);

    // Ensemble-averaged Welch spectrum, for background and linewidth plots.
    {
      const std::size_t seg =
          std::min<std::size_t>(512, traces.n_samples());
      Spectrum psd;
      std::vector<double> row(traces.n_samples());
      for (std::size_t r = 0; r < traces.n_reps(); ++r) {
        const auto raw = traces.row(r);
        for (std::size_t k = 0; k < raw.size(); ++k) row[k] = raw[k];
        const Spectrum one =
            welch_psd(row, 1.0 / traces.dt(), seg, seg / 2);
        if (psd.f.empty()) {
          psd = one;
        } else {
          for (std::size_t b = 0; b < psd.psd.size(); ++b)
            psd.psd[b] += one.psd[b];
        }
      }
      for (auto& v : psd.psd) v /= static_cast<double>(traces.n_reps());
      item.psd_csv = out_dir / ("psd_" + tag + ".csv");
      std::ostringstream psd_csv;
      psd.to_csv(psd_csv);
      write_csv(item.psd_csv, psd_csv.str(), traces.provenance().config_hash,
                traces.provenance().base_seed);
    }

    item.report_path = out_dir / ("heating_" + tag + ".report");
    heating_report_doc(item, item.series.t_trunc,
                       traces.provenance().config_hash,
                       traces.provenance().base_seed)
        .save(item.report_path, {"heating fit report"});
    result.items.push_back(std::move(item));
  }
  return result;
}

CalibrateResult calibrate_points(const RunConfig& cfg,
                                 const std::vector<HeatingPoint>& input) {
  if (input.empty())
    throw std::invalid_argument("calibrate: no heating fits given");
  std::vector<HeatingPoint> records = input;
  std::sort(records.begin(), records.end(),
            [](const HeatingPoint& a, const HeatingPoint& b) {
              return a.temperature_k < b.temperature_k;
            });

  const double f_m = cfg.f_m_hz;
  std::vector<CalPoint> cal_points;
  for (const auto& r : records)
    cal_points.push_back({r.temperature_k, r.area_t0, r.area_t0_se});

  NoiseBudget budget =
      fit_calibration(cal_points, f_m, cfg.t_min_k,
                      static_cast<int>(cfg.min_calibration_points));
  budget.delta_omega = cfg.bandwidth_hz;

  // Off-resonance imprecision, averaged over the sweep.
  double s_imp = 0.0, sw = 0.0;
  for (const auto& r : records) {
    const double w =
        r.offres_area_se > 0.0 ? 1.0 / (r.offres_area_se * r.offres_area_se)
                               : 1.0;
    s_imp += w * r.offres_area;
    sw += w;
  }
  s_imp /= sw;
  budget.s_imp = s_imp;
  budget.s_imp_frac = s_imp <= budget.beta
                          ? imprecision_split(budget.beta, s_imp)
                          : std::numeric_limits<double>::quiet_NaN();

  // Occupancy points from calibrated initial areas.
  std::vector<OccPoint> points;
  for (const auto& r : records) {
    OccPoint p;
    p.temperature_k = r.temperature_k;
    p.occupancy = to_occupancy(r.area_t0, budget);
    p.sigma = r.area_t0_se / budget.alpha;
    points.push_back(p);
  }

  OccupancyFit occ =
      fit_occupancy_curve(points, f_m, cfg.offset_convention_enum());

  // Full-chain uncertainty on n_base: linear propagation of every area_t0
  // through the calibration (alpha, beta) and the occupancy fit.
  {
    // Calibration hat coefficients a_j, b_j (alpha = sum a_j y_j, ...).
    double s = 0.0, sx = 0.0, sxx = 0.0;
    std::vector<double> wj(records.size(), 0.0), xj(records.size(), 0.0);
    std::vector<bool> in_cal(records.size(), false);
    for (std::size_t j = 0; j < records.size(); ++j) {
      if (records[j].temperature_k < cfg.t_min_k) continue;
      in_cal[j] = true;
      xj[j] = bose_einstein(records[j].temperature_k, f_m);
      const double se = records[j].area_t0_se;
      wj[j] = se > 0.0 ? 1.0 / (se * se) : 1.0;
      s += wj[j];
      sx += wj[j] * xj[j];
      sxx += wj[j] * xj[j] * xj[j];
    }
    const double det = s * sxx - sx * sx;

    // Occupancy-fit influence weights u_i (d n_base / d n_i).
    std::vector<double> ui(records.size(), 0.0);
    double swu = 0.0;
    std::vector<double> jmodel(records.size(), 1.0);
    if (cfg.offset_convention_enum() == OffsetConvention::temperature) {
      const double theta = kPlanck * f_m / kBoltzmann;
      for (std::size_t i = 0; i < records.size(); ++i) {
        const double t_dev = records[i].temperature_k + occ.offset_param;
        const double x = theta / std::max(t_dev, 1e-6);
        const double ex = std::exp(x);
        jmodel[i] = theta / (t_dev * t_dev) * ex / ((ex - 1.0) * (ex - 1.0));
      }
    }
    double t_min_pt = records.front().temperature_k;
    for (const auto& r : records) t_min_pt = std::min(t_min_pt, r.temperature_k);
    double j_base = 1.0;
    if (cfg.offset_convention_enum() == OffsetConvention::temperature) {
      const double theta = kPlanck * f_m / kBoltzmann;
      const double t_dev = t_min_pt + occ.offset_param;
      const double x = theta / std::max(t_dev, 1e-6);
      const double ex = std::exp(x);
      j_base = theta / (t_dev * t_dev) * ex / ((ex - 1.0) * (ex - 1.0));
    }
    for (std::size_t i = 0; i < records.size(); ++i) {
      const double sig = points[i].sigma;
      const double w2 = sig > 0.0 ? 1.0 / (sig * sig) : 1.0;
      ui[i] = w2 * jmodel[i];
      swu += w2 * jmodel[i] * jmodel[i];
    }
    for (auto& v : ui) v = j_base * v / swu;
    const double u_sum = std::accumulate(ui.begin(), ui.end(), 0.0);
    double u_dot_n = 0.0;
    for (std::size_t i = 0; i < records.size(); ++i)
      u_dot_n += ui[i] * points[i].occupancy;

    double var = 0.0, ws_den = 0.0;
    for (std::size_t k = 0; k < records.size(); ++k) {
      double a_k = 0.0, b_k = 0.0;
      if (in_cal[k] && det > 0.0) {
        a_k = wj[k] * (s * xj[k] - sx) / det;
        b_k = wj[k] * (sxx - sx * xj[k]) / det;
      }
      const double g_k = (ui[k] - u_sum * b_k - u_dot_n * a_k) / budget.alpha;
      const double sig_k = records[k].area_t0_se;
      const double term = g_k * g_k * sig_k * sig_k;
      var += term;
      const double dof_k = std::max(records[k].se_dof, 1.0);
      ws_den += term * term / dof_k;
    }
    if (var > 0.0 && ws_den > 0.0) {
      const double dof_eff = var * var / ws_den;  // Welch-Satterthwaite
      occ.n_base_ci95 = student_t_975(dof_eff) * std::sqrt(var);
      occ.chain_ci = true;
      if (occ.n_base > 0.0) {
        const double theta = kPlanck * f_m / kBoltzmann;
        const double lg = std::log1p(1.0 / occ.n_base);
        occ.t_device_ci95 = theta / (lg * lg) /
                            (occ.n_base * occ.n_base + occ.n_base) *
                            occ.n_base_ci95;
      }
    }
  }

  CalibrateResult result;
  result.budget = budget;
  result.occupancy = occ;
  result.points = points;
  return result;
}

namespace {

CalibrateResult calibrate_and_write(const RunConfig& cfg,
                                    const std::vector<HeatingPoint>& records,
                                    const std::filesystem::path& out_dir,
                                    std::uint64_t config_hash,
                                    std::uint64_t seed) {
  CalibrateResult result = calibrate_points(cfg, records);
  const NoiseBudget& budget = result.budget;
  const OccupancyFit& occ = result.occupancy;
  const std::vector<OccPoint>& points = result.points;
  const double f_m = cfg.f_m_hz;
  std::filesystem::create_directories(out_dir);

  KvDoc bdoc;
  bdoc.set_double("noise_budget", "alpha_v2_per_phonon", budget.alpha);
  bdoc.set_double("noise_budget", "alpha_ci95", budget.alpha_ci95);
  bdoc.set_double("noise_budget", "beta_v2", budget.beta);
  bdoc.set_double("noise_budget", "beta_ci95", budget.beta_ci95);
  bdoc.set_double("noise_budget", "s_imp_v2", budget.s_imp);
  bdoc.set_double("noise_budget", "s_imp_frac", budget.s_imp_frac);
  bdoc.set_double("noise_budget", "delta_omega_hz", budget.delta_omega);
  bdoc.set_double("noise_budget", "residual_rms_v2", budget.residual_rms);
  bdoc.set_int("noise_budget", "n_points",
               static_cast<std::int64_t>(budget.n_points));
  bdoc.set_double("noise_budget", "t_min_k", cfg.t_min_k);
  set_provenance(bdoc, config_hash, seed);
  result.budget_path = out_dir / "noise_budget.report";
  bdoc.save(result.budget_path, {"phonon-number calibration (noise budget)"});

  KvDoc odoc;
  odoc.set("occupancy_fit", "offset_convention", cfg.offset_convention);
  odoc.set_double("occupancy_fit", "offset_param", occ.offset_param);
  odoc.set_double("occupancy_fit", "offset_ci95", occ.offset_ci95);
  odoc.set_double("occupancy_fit", "n_base_phonons", occ.n_base);
  odoc.set_double("occupancy_fit", "n_base_ci95_phonons", occ.n_base_ci95);
  odoc.set_int("occupancy_fit", "chain_ci", occ.chain_ci ? 1 : 0);
  odoc.set_double("occupancy_fit", "t_device_base_k", occ.t_device_base);
  odoc.set_double("occupancy_fit", "t_device_ci95_k", occ.t_device_ci95);
  odoc.set_double("occupancy_fit", "residual_rms_phonons", occ.residual_rms);
  odoc.set_int("occupancy_fit", "n_points",
               static_cast<std::int64_t>(occ.n_points));
  odoc.set_double("occupancy_fit", "ground_state_probability",
                  occ.n_base >= 0.0 ? ground_state_probability(occ.n_base)
                                    : std::numeric_limits<double>::quiet_NaN());
  set_provenance(odoc, config_hash, seed);
  result.occupancy_path = out_dir / "occupancy_fit.report";
  odoc.save(result.occupancy_path, {"Bose-Einstein occupancy fit"});

  std::ostringstream csv;
  csv << "T_K,bose_einstein,occupancy_phonons,occupancy_se_phonons\n";
  for (const auto& p : points) {
    csv << p.temperature_k << "," << bose_einstein(p.temperature_k, f_m) << ","
        << p.occupancy << "," << p.sigma << "\n";
  }
  result.points_csv = out_dir / "occupancy_points.csv";
  write_csv(result.points_csv, csv.str(), config_hash, seed);
  return result;
}

}  // namespace

CalibrateResult run_calibrate(const RunConfig& cfg,
                              const std::vector<std::filesystem::path>& reports,
                              const std::filesystem::path& out_dir) {
  if (reports.empty())
    throw std::invalid_argument("calibrate: no heating reports given");
  std::vector<HeatingPoint> records;
  std::uint64_t config_hash = cfg.hash();
  std::uint64_t seed = cfg.base_seed;
  for (const auto& p : reports) {
    const HeatingRecord rec = parse_heating_report(p);
    HeatingPoint point;
    point.temperature_k = rec.temperature_k;
    point.area_t0 = rec.fit.area_t0;
    point.area_t0_se = rec.fit.area_t0_se;
    point.se_dof = rec.fit.se_dof;
    point.offres_area = rec.offres_area;
    point.offres_area_se = rec.offres_area_se;
    records.push_back(point);
    const KvDoc doc = KvDoc::load(p);
    if (doc.has("provenance", "seed"))
      seed = static_cast<std::uint64_t>(doc.get_int("provenance", "seed"));
  }
  return calibrate_and_write(cfg, records, out_dir, config_hash, seed);
}

MetricsResult run_metrics(const RunConfig& cfg,
                          const std::filesystem::path& out_dir,
                          const std::vector<std::filesystem::path>&
                              heating_reports,
                          const std::optional<std::filesystem::path>&
                              occupancy_report) {
  const MechanicalMode mech = cfg.mechanical_mode();
  const OpticalMode optical = cfg.optical_mode();

  MetricsResult result;

  // Total decoherence rate: explicit config value, else the mean fitted rate
  // mapped back to quoted units, else the bath model.
  if (cfg.gamma_total_hz > 0.0) {
    result.gamma_total_hz = cfg.gamma_total_hz;
  } else if (!heating_reports.empty()) {
    double acc = 0.0;
    std::size_t n = 0;
    for (const auto& p : heating_reports) {
      const HeatingRecord rec = parse_heating_report(p);
      if (rec.fit.ill_conditioned) continue;
      acc += rec.fit.gamma_fit;
      ++n;
    }
    if (n == 0)
      throw std::invalid_argument(
          "metrics: no well-conditioned heating fits for the total rate");
    const double mean_decay = acc / static_cast<double>(n);
    result.gamma_total_hz = cfg.convention == RateConvention::angular
                                ? mean_decay
                                : mean_decay / kTwoPi;
  } else {
    result.gamma_total_hz = cfg.effective_gamma_total_hz();
  }

  // Equilibrium occupancy under the pulse.
  if (cfg.n_eq > 0.0) {
    result.n_eq = cfg.n_eq;
  } else if (!cfg.temperatures_k.empty()) {
    const double t_base =
        *std::min_element(cfg.temperatures_k.begin(), cfg.temperatures_k.end());
    result.n_eq = equilibrium_occupancy(cfg.bath_for_temperature(t_base));
  } else {
    throw std::invalid_argument(
        "metrics: n_eq unavailable; set [transduction] n_eq or a sweep");
  }

  // Ambient occupancy: fitted base occupancy when available. A noisy fit
  // can come out slightly negative; zero is the physical floor.
  if (occupancy_report) {
    const KvDoc doc = KvDoc::load(*occupancy_report);
    result.n_th =
        std::max(doc.get_double("occupancy_fit", "n_base_phonons"), 0.0);
  } else if (cfg.n_th > 0.0) {
    result.n_th = cfg.n_th;
  } else {
    throw std::invalid_argument(
        "metrics: n_th unavailable; set [transduction] n_th or give an "
        "occupancy report");
  }

  result.figures = compute_figures_of_merit(optical, mech, result.gamma_total_hz,
                                            result.n_eq, result.n_th);

  std::filesystem::create_directories(out_dir);
  KvDoc doc;
  doc.set_double("figures_of_merit", "gamma_om_hz", result.figures.gamma_om);
  doc.set_double("figures_of_merit", "cooperativity", result.figures.coop);
  doc.set_double("figures_of_merit", "quantum_cooperativity",
                 result.figures.coop_q);
  doc.set_double("figures_of_merit", "n_add_ambient_quanta",
                 result.figures.n_add_ambient);
  doc.set_double("figures_of_merit", "n_add_total_quanta",
                 result.figures.n_add_total);
  doc.set_double("inputs", "g0_hz", optical.g0);
  doc.set_double("inputs", "n_cav", optical.n_cav);
  doc.set_double("inputs", "kappa_hz", optical.kappa);
  doc.set_double("inputs", "f_m_hz", mech.f_m);
  doc.set_double("inputs", "gamma_m_hz", mech.gamma_m);
  doc.set_double("inputs", "gamma_total_hz", result.gamma_total_hz);
  doc.set_double("inputs", "n_eq", result.n_eq);
  doc.set_double("inputs", "n_th", result.n_th);
  set_provenance(doc, cfg.hash(), cfg.base_seed);
  result.report_path = out_dir / "figures_of_merit.report";
  doc.save(result.report_path, {"transduction figures of merit"});
  return result;
}

PipelineResult run_pipeline(const RunConfig& cfg,
                            const std::filesystem::path& out_dir,
                            std::optional<std::uint64_t> seed_override,
                            int n_threads) {
  PipelineResult result;
  result.simulate = run_simulate(cfg, out_dir, seed_override, n_threads);
  result.analyze =
      run_analyze(cfg, result.simulate.trace_files, out_dir, n_threads);

  std::vector<std::filesystem::path> reports;
  for (const auto& item : result.analyze.items) reports.push_back(item.report_path);
  result.calibrate = run_calibrate(cfg, reports, out_dir);

  // Figures of merit from the fitted chain: total rate from the heating
  // fits, n_eq from the recalibrated saturation level at base temperature,
  // n_th from the occupancy fit.
  RunConfig metrics_cfg = cfg;
  if (metrics_cfg.gamma_total_hz <= 0.0) {
    double acc = 0.0;
    std::size_t n = 0;
    for (const auto& item : result.analyze.items) {
      if (item.heating.ill_conditioned) continue;
      acc += item.heating.gamma_fit;
      ++n;
    }
    if (n > 0) {
      const double mean_decay = acc / static_cast<double>(n);
      metrics_cfg.gamma_total_hz = cfg.convention == RateConvention::angular
                                       ? mean_decay
                                       : mean_decay / kTwoPi;
    }
  }
  if (metrics_cfg.n_eq <= 0.0) {
    const AnalyzeItem* base_item = &result.analyze.items.front();
    for (const auto& item : result.analyze.items)
      if (item.temperature_k < base_item->temperature_k) base_item = &item;
    metrics_cfg.n_eq =
        to_occupancy(base_item->heating.area_eq, result.calibrate.budget);
  }
  if (metrics_cfg.n_th <= 0.0)
    metrics_cfg.n_th = std::max(result.calibrate.occupancy.n_base, 1e-9);
  result.metrics = run_metrics(metrics_cfg, out_dir, {}, {});

  KvDoc doc;
  doc.set_double("results", "n_base_phonons", result.calibrate.occupancy.n_base);
  doc.set_double("results", "n_base_ci95_phonons",
                 result.calibrate.occupancy.n_base_ci95);
  doc.set_double("results", "t_device_base_k",
                 result.calibrate.occupancy.t_device_base);
  doc.set_double("results", "ground_state_probability",
                 ground_state_probability(
                     std::max(result.calibrate.occupancy.n_base, 0.0)));
  doc.set_double("results", "alpha_v2_per_phonon", result.calibrate.budget.alpha);
  doc.set_double("results", "beta_v2", result.calibrate.budget.beta);
  doc.set_double("results", "s_imp_frac", result.calibrate.budget.s_imp_frac);
  doc.set_double("results", "n_eq_base_phonons", result.metrics.n_eq);
  doc.set_double("results", "gamma_total_hz", result.metrics.gamma_total_hz);
  doc.set_double("results", "cooperativity", result.metrics.figures.coop);
  doc.set_double("results", "quantum_cooperativity",
                 result.metrics.figures.coop_q);
  doc.set_double("results", "n_add_ambient_quanta",
                 result.metrics.figures.n_add_ambient);
  doc.set_double("results", "n_add_total_quanta",
                 result.metrics.figures.n_add_total);
  int idx = 0;
  for (const auto& f : result.simulate.trace_files)
    doc.set("files", "trace_" + std::to_string(idx++), f.filename().string());
  doc.set("files", "noise_budget",
          result.calibrate.budget_path.filename().string());
  doc.set("files", "occupancy_fit",
          result.calibrate.occupancy_path.filename().string());
  doc.set("files", "figures_of_merit",
          result.metrics.report_path.filename().string());
  set_provenance(doc, result.simulate.config_hash, result.simulate.seed);
  result.summary_path = out_dir / "pipeline_summary.report";
  doc.save(result.summary_path, {"end-to-end pipeline summary"});
  return result;
}

ScanFitResult run_scan_fit(const std::filesystem::path& input_csv,
                           const std::filesystem::path& out_dir) {
  std::ifstream in(input_csv);
  if (!in) throw std::runtime_error("cannot open " + input_csv.string());
  std::string header;
  std::getline(in, header);
  while (!header.empty() && (header[0] == '#')) std::getline(in, header);

  std::string first_col = header.substr(0, header.find(','));
  // Strip spaces.
  first_col.erase(std::remove_if(first_col.begin(), first_col.end(),
                                 [](unsigned char c) { return std::isspace(c); }),
                  first_col.end());
  const bool wavelength = first_col == "wavelength_nm";
  if (!wavelength && first_col != "frequency_hz" && first_col != "f_Hz" &&
      first_col != "f_hz")
    throw FormatError(
        "scan-fit: first column must be wavelength_nm or frequency_hz",
        "header");

  std::vector<double> x, y;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw FormatError("scan-fit: expected two comma-separated columns at line " +
                            std::to_string(line_no),
                        "row");
    try {
      x.push_back(std::stod(line.substr(0, comma)));
      y.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw FormatError("scan-fit: non-numeric row at line " +
                            std::to_string(line_no),
                        "row");
    }
  }

  ScanFitResult result;
  result.fit = lorentzian_fit(x, y);
  result.wavelength_input = wavelength;
  if (wavelength) {
    const double lambda_m = result.fit.center * 1e-9;
    result.center_hz = kSpeedOfLight / lambda_m;
    result.fwhm_hz =
        kSpeedOfLight * result.fit.fwhm * 1e-9 / (lambda_m * lambda_m);
  } else {
    result.center_hz = result.fit.center;
    result.fwhm_hz = result.fit.fwhm;
  }

  std::filesystem::create_directories(out_dir);
  KvDoc doc;
  doc.set("scan_fit", "input", input_csv.filename().string());
  doc.set("scan_fit", "x_unit", wavelength ? "nm" : "Hz");
  doc.set_double("scan_fit", "center", result.fit.center);
  doc.set_double("scan_fit", "center_ci95", result.fit.center_ci95);
  doc.set_double("scan_fit", "fwhm", result.fit.fwhm);
  doc.set_double("scan_fit", "fwhm_ci95", result.fit.fwhm_ci95);
  doc.set_double("scan_fit", "amplitude", result.fit.amplitude);
  doc.set_double("scan_fit", "offset", result.fit.offset);
  doc.set_double("scan_fit", "residual_rms", result.fit.residual_rms);
  doc.set_double("scan_fit", "center_hz", result.center_hz);
  doc.set_double("scan_fit", "fwhm_hz", result.fwhm_hz);
  result.report_path = out_dir / (input_csv.stem().string() + "_scan_fit.report");
  doc.save(result.report_path, {"Lorentzian scan fit"});
  return result;
}

}  // namespace phonopulse
