#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nls/dynamics.hpp"
#include "nls/lab/config.hpp"

namespace nls::lab {

struct SweepEntry {
  double b = 0.0;
  std::string dir;  ///< relative to the sweep directory
  bool ok = false;
  RunStatus status = RunStatus::ReachedTEnd;
  double t_final = 0.0;
  double t_escape = 0.0;  ///< NaN when ||∇u|| never exceeded 2||∇Q||
  double max_grad_ratio = 0.0;
  long steps = 0;
  std::string error;      ///< set when the run threw
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  int points = 0;
};

struct SweepSummary {
  std::vector<SweepEntry> entries;  ///< in input order
  bool escape_nonincreasing_in_b = false;
  bool escape_strictly_decreasing_in_b = false;
  LinearFit escape_vs_log;  ///< T_esc against -log(b - 1), distinct b only
};

/// Least squares y = slope x + intercept.
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Runs the threshold_kneg scenario of `base` for each b concurrently (at
/// most `max_parallel` at once, 0 meaning hardware concurrency), each in
/// <root>/<base.output_dir>/run_<index>_b<b>/, and writes sweep.csv there.
SweepSummary sweep(const ExperimentConfig& base, const std::vector<double>& bs, const std::filesystem::path& root,
                   unsigned max_parallel = 0);

}  // namespace nls::lab
