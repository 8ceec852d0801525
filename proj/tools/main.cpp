// phonopulse: simulate and analyze pulsed heterodyne thermometry of a GHz
// mechanical mode. Subcommands: simulate, analyze, calibrate, metrics,
// pipeline, scan-fit.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "phonopulse/config.hpp"
#include "phonopulse/errors.hpp"
#include "phonopulse/pipeline.hpp"

namespace {

// Exit codes: 0 ok, 2 validation/config, 3 fit, 4 I/O or format.
constexpr int kExitValidation = 2;
constexpr int kExitFit = 3;
constexpr int kExitIo = 4;

struct CommonOpts {
  std::string config_path;
  std::string out_dir = "out";
  std::int64_t seed = -1;
  int threads = 1;

  std::optional<std::uint64_t> seed_override() const {
    if (seed < 0) return std::nullopt;
    return static_cast<std::uint64_t>(seed);
  }
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool needs_config = true) {
  auto* c = cmd->add_option("--config", opts.config_path,
                            "run configuration file");
  if (needs_config) c->required();
  cmd->add_option("--out", opts.out_dir, "output directory");
  cmd->add_option("--seed", opts.seed, "override the config base seed");
  cmd->add_option("--threads", opts.threads,
                  "worker threads (speed only, never results)");
}

std::vector<std::filesystem::path> to_paths(const std::vector<std::string>& v) {
  return {v.begin(), v.end()};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pulsed heterodyne thermometry simulator and analysis chain"};
  app.require_subcommand(1);

  CommonOpts sim_opts, ana_opts, cal_opts, met_opts, pipe_opts;
  std::vector<std::string> ana_inputs, cal_inputs, met_heating;
  std::string met_occupancy, scan_input, scan_out = "out";

  auto* sim = app.add_subcommand("simulate",
                                 "synthesize trace ensembles for the sweep");
  add_common(sim, sim_opts);

  auto* ana = app.add_subcommand(
      "analyze", "peak areas and heating fits from trace files");
  add_common(ana, ana_opts);
  ana->add_option("traces", ana_inputs, "trace container files");

  auto* cal = app.add_subcommand(
      "calibrate", "noise budget and occupancy fit from heating reports");
  add_common(cal, cal_opts);
  cal->add_option("reports", cal_inputs, "heating fit report files");

  auto* met =
      app.add_subcommand("metrics", "transduction figures of merit");
  add_common(met, met_opts);
  met->add_option("--heating", met_heating,
                  "heating reports for the fitted total rate");
  met->add_option("--occupancy", met_occupancy,
                  "occupancy fit report for the ambient occupancy");

  auto* pipe = app.add_subcommand(
      "pipeline", "simulate, analyze, calibrate, metrics in one run");
  add_common(pipe, pipe_opts);

  auto* scan = app.add_subcommand(
      "scan-fit", "Lorentzian fit of a (wavelength, transmission) scan");
  scan->add_option("input", scan_input, "two-column CSV")->required();
  scan->add_option("--out", scan_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*sim) {
      const auto cfg = phonopulse::RunConfig::from_file(sim_opts.config_path);
      const auto res = phonopulse::run_simulate(
          cfg, sim_opts.out_dir, sim_opts.seed_override(), sim_opts.threads);
      for (const auto& f : res.trace_files)
        std::cout << "wrote " << f.string() << "\n";
    } else if (*ana) {
      const auto cfg = phonopulse::RunConfig::from_file(ana_opts.config_path);
      const auto res = phonopulse::run_analyze(
          cfg, to_paths(ana_inputs), ana_opts.out_dir, ana_opts.threads);
      for (const auto& item : res.items) {
        std::printf("T = %.4f K: area_t0 = %.6g V^2 (+-%.2g), Gamma = %.6g 1/s\n",
                    item.temperature_k, item.heating.area_t0,
                    item.heating.area_t0_ci95, item.heating.gamma_fit);
      }
    } else if (*cal) {
      const auto cfg = phonopulse::RunConfig::from_file(cal_opts.config_path);
      const auto res = phonopulse::run_calibrate(cfg, to_paths(cal_inputs),
                                                 cal_opts.out_dir);
      std::printf("alpha = %.6g V^2/phonon, beta = %.6g V^2\n",
                  res.budget.alpha, res.budget.beta);
      std::printf("n_base = %.3g +- %.3g phonons (T_device = %.4g K)\n",
                  res.occupancy.n_base, res.occupancy.n_base_ci95,
                  res.occupancy.t_device_base);
    } else if (*met) {
      const auto cfg = phonopulse::RunConfig::from_file(met_opts.config_path);
      std::optional<std::filesystem::path> occ;
      if (!met_occupancy.empty()) occ = met_occupancy;
      const auto res = phonopulse::run_metrics(cfg, met_opts.out_dir,
                                               to_paths(met_heating), occ);
      std::printf("Gamma_om = %.6g Hz, C = %.4g, C_qu = %.4g\n",
                  res.figures.gamma_om, res.figures.coop, res.figures.coop_q);
      std::printf("n_add ambient = %.4g, total = %.4g quanta\n",
                  res.figures.n_add_ambient, res.figures.n_add_total);
    } else if (*pipe) {
      const auto cfg = phonopulse::RunConfig::from_file(pipe_opts.config_path);
      const auto res = phonopulse::run_pipeline(
          cfg, pipe_opts.out_dir, pipe_opts.seed_override(), pipe_opts.threads);
      std::printf("n_base = %.3g +- %.3g phonons, P(ground) = %.3f\n",
                  res.calibrate.occupancy.n_base,
                  res.calibrate.occupancy.n_base_ci95,
                  phonopulse::ground_state_probability(
                      std::max(res.calibrate.occupancy.n_base, 0.0)));
      std::cout << "summary: " << res.summary_path.string() << "\n";
    } else if (*scan) {
      const auto res = phonopulse::run_scan_fit(scan_input, scan_out);
      std::printf("center = %.8g Hz, fwhm = %.6g Hz\n", res.center_hz,
                  res.fwhm_hz);
      std::cout << "report: " << res.report_path.string() << "\n";
    }
  } catch (const phonopulse::FitError& e) {
    std::cerr << "fit error: " << e.what() << "\n";
    return kExitFit;
  } catch (const phonopulse::FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return kExitIo;
  } catch (const phonopulse::ResourceError& e) {
    std::cerr << "resource error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::domain_error& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  }
  return 0;
}
