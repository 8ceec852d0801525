#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "phonopulse/config.hpp"
#include "phonopulse/infer.hpp"
#include "phonopulse/metrics.hpp"

namespace phonopulse {

// Orchestration behind the CLI subcommands. Every artifact embeds the config
// hash and seed; identical (config, seed) runs produce byte-identical files
// regardless of the worker-thread count.

struct SimulateResult {
  std::vector<std::filesystem::path> trace_files;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
};

SimulateResult run_simulate(const RunConfig& cfg,
                            const std::filesystem::path& out_dir,
                            std::optional<std::uint64_t> seed_override,
                            int n_threads);

struct AnalyzeItem {
  double temperature_k = 0.0;
  PeakAreaSeries series;
  HeatingFit heating;
  double offres_area = 0.0;
  double offres_area_se = 0.0;
  std::filesystem::path area_csv;
  std::filesystem::path psd_csv;
  std::filesystem::path report_path;
};

struct AnalyzeResult {
  std::vector<AnalyzeItem> items;
};

AnalyzeResult run_analyze(const RunConfig& cfg,
                          const std::vector<std::filesystem::path>& trace_files,
                          const std::filesystem::path& out_dir, int n_threads);

struct CalibrateResult {
  NoiseBudget budget;
  OccupancyFit occupancy;
  std::vector<OccPoint> points;
  std::filesystem::path budget_path;
  std::filesystem::path occupancy_path;
  std::filesystem::path points_csv;
};

/// One calibration input: an extrapolated initial area with its uncertainty,
/// plus the off-resonance imprecision area for the noise split.
struct HeatingPoint {
  double temperature_k = 0.0;
  double area_t0 = 0.0;
  double area_t0_se = 0.0;
  double se_dof = 1.0;
  double offres_area = 0.0;
  double offres_area_se = 0.0;
};

/// In-memory calibration chain: noise budget from the T >= t_min subset,
/// occupancies, Bose-Einstein-with-offset fit, and a full-chain CI on the
/// base occupancy (propagating every area through alpha and beta).
CalibrateResult calibrate_points(const RunConfig& cfg,
                                 const std::vector<HeatingPoint>& points);

CalibrateResult run_calibrate(const RunConfig& cfg,
                              const std::vector<std::filesystem::path>& reports,
                              const std::filesystem::path& out_dir);

struct MetricsResult {
  FiguresOfMerit figures;
  double gamma_total_hz = 0.0;
  double n_eq = 0.0;
  double n_th = 0.0;
  std::filesystem::path report_path;
};

/// Figures of merit from config values, optionally overridden by fit outputs
/// (heating report for the total rate, budget + occupancy for n_eq and n_th).
MetricsResult run_metrics(const RunConfig& cfg,
                          const std::filesystem::path& out_dir,
                          const std::vector<std::filesystem::path>&
                              heating_reports = {},
                          const std::optional<std::filesystem::path>&
                              occupancy_report = {});

struct PipelineResult {
  SimulateResult simulate;
  AnalyzeResult analyze;
  CalibrateResult calibrate;
  MetricsResult metrics;
  std::filesystem::path summary_path;
};

PipelineResult run_pipeline(const RunConfig& cfg,
                            const std::filesystem::path& out_dir,
                            std::optional<std::uint64_t> seed_override,
                            int n_threads);

struct ScanFitResult {
  LorentzianFit fit;
  bool wavelength_input = false;
  double center_hz = 0.0;   ///< converted when the input is a wavelength scan
  double fwhm_hz = 0.0;
  std::filesystem::path report_path;
};

/// Lorentzian fit of a two-column scan (wavelength_nm or frequency_hz first).
ScanFitResult run_scan_fit(const std::filesystem::path& input_csv,
                           const std::filesystem::path& out_dir);

/// Analyze one trace set already in memory (used by tests and run_analyze).
AnalyzeItem analyze_traceset(const RunConfig& cfg, const TraceSet& traces,
                             double temperature_k, int n_threads);

}  // namespace phonopulse
