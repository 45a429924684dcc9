#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nls/dynamics.hpp"
#include "nls/functionals.hpp"
#include "nls/ground_state.hpp"
#include "nls/lab/config.hpp"
#include "nls/modulation.hpp"
#include "nls/virial.hpp"

namespace nls::lab {

/// Closed form for d = 1, Petviashvili otherwise; certified on `grid` and
/// cached per (d, p, L, n) for the lifetime of the process.
const GroundState& ground_state_for(const PhysParams& params, const GridSpec& grid);

/// Initial datum of the configured scenario on Q's grid.
Field build_datum(const ExperimentConfig& cfg, const GroundState& Q);

/// Everything computed at one sample, without the state itself.
struct SampleRow {
  FunctionalRecord rec;
  SampleDiagnostics diag;
  ThresholdProducts products;
  double kmu_residual = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> J, Jp, A;  ///< one per probe radius
  std::optional<ModulationFit> fit;  ///< g and h fields dropped to save memory
  TrackState track;
  double variance = 0.0;  ///< ∫|x - X|²|u|²
};

struct DirectionResult {
  std::string direction;  ///< "forward" or "backward"
  RunStatus status = RunStatus::ReachedTEnd;
  double t_final = 0.0;
  double t_escape = std::numeric_limits<double>::quiet_NaN();  ///< first |t| with ||∇u|| > 2||∇Q||
  double max_grad_ratio = 0.0;
  long steps = 0;
  bool sponge_active = false;
  double max_abs_dM = 0.0, max_abs_dE = 0.0;
  double max_delta = std::numeric_limits<double>::quiet_NaN();  ///< over samples with a fit
  RateFit delta_rate;
  DriftBoundReport drift_bound;
  std::vector<TailRatioRow> tail_ratio;
  std::vector<SampleRow> samples;
  std::vector<std::string> checkpoints;
  Field final_state;
};

struct RunSummary {
  ExperimentConfig cfg;
  std::filesystem::path dir;
  double Q_mass = 0.0, Q_grad_sq = 0.0, Q_lp1 = 0.0, Q_variance = 0.0, Q_energy = 0.0;
  FunctionalRecord initial;
  ThresholdProducts initial_products;
  std::vector<DirectionResult> directions;
};

/// Builds Q and the datum, runs forward (and backward when configured),
/// writes <root>/<output_dir>/{config.txt, forward.csv, backward.csv,
/// tail_ratio_<dir>.csv, checkpoints/, summary.json}.
RunSummary run_scenario(const ExperimentConfig& cfg, const std::filesystem::path& root);

/// Linear interpolation of the first crossing of ||∇u|| / ||∇Q|| = level.
double escape_time(const std::vector<SampleRow>& samples, double level = 2.0);

/// Column names of the per-sample CSV for dimension d and the given radii.
std::vector<std::string> diagnostics_header(int d, const std::vector<double>& radii, const std::vector<double>& eps);

}  // namespace nls::lab
