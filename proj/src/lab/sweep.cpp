#include "nls/lab/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <map>
#include <thread>

#include "nls/error.hpp"
#include "nls/lab/csv.hpp"
#include "nls/lab/scenario.hpp"

namespace nls::lab {

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  LinearFit f;
  const std::size_t n = std::min(x.size(), y.size());
  f.points = static_cast<int>(n);
  if (n < 2) return f;
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double vxx = 0, vyy = 0, vxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    vxx += (x[i] - mx) * (x[i] - mx);
    vyy += (y[i] - my) * (y[i] - my);
    vxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(vxx > 0.0)) return f;
  f.slope = vxy / vxx;
  f.intercept = my - f.slope * mx;
  f.r2 = vyy > 0.0 ? vxy * vxy / (vxx * vyy) : 1.0;
  return f;
}

SweepSummary sweep(const ExperimentConfig& base, const std::vector<double>& bs, const std::filesystem::path& root,
                   unsigned max_parallel) {
  if (bs.empty()) throw ConfigError("sweep needs at least one b value");
  for (double b : bs)
    if (!(b > 1.0)) throw ConfigError("sweep b values must exceed 1");
  const auto sweep_dir = root / base.output_dir;
  std::filesystem::create_directories(sweep_dir);
  if (max_parallel == 0) max_parallel = std::max(1u, std::thread::hardware_concurrency());

  SweepSummary sum;
  sum.entries.resize(bs.size());
  auto run_one = [&](std::size_t i) {
    SweepEntry e;
    e.b = bs[i];
    char name[64];
    std::snprintf(name, sizeof name, "run_%02zu_b%.6g", i, bs[i]);
    e.dir = name;
    ExperimentConfig cfg = base;
    cfg.scenario = Scenario::ThresholdKneg;
    cfg.b = bs[i];
    cfg.output_dir = (std::filesystem::path(base.output_dir) / name).string();
    try {
      const RunSummary rs = run_scenario(cfg, root);
      const auto& fw = rs.directions.front();
      e.ok = true;
      e.status = fw.status;
      e.t_final = fw.t_final;
      e.t_escape = fw.t_escape;
      e.max_grad_ratio = fw.max_grad_ratio;
      e.steps = fw.steps;
    } catch (const std::exception& ex) {
      e.error = ex.what();
      e.t_escape = std::numeric_limits<double>::quiet_NaN();
    }
    return e;
  };

  // Bounded fan-out: launch in waves of max_parallel.
  for (std::size_t start = 0; start < bs.size(); start += max_parallel) {
    std::vector<std::future<SweepEntry>> futs;
    const std::size_t stop = std::min(bs.size(), start + max_parallel);
    for (std::size_t i = start; i < stop; ++i) futs.push_back(std::async(std::launch::async, run_one, i));
    for (std::size_t i = start; i < stop; ++i) sum.entries[i] = futs[i - start].get();
  }

  // One escape time per distinct b, ordered by b.
  std::map<double, double> by_b;
  for (const auto& e : sum.entries)
    if (e.ok && std::isfinite(e.t_escape)) by_b.emplace(e.b, e.t_escape);
  std::map<double, int> distinct;
  for (double b : bs) distinct[b] = 1;
  const bool all_escaped = by_b.size() == distinct.size();
  sum.escape_nonincreasing_in_b = all_escaped;
  sum.escape_strictly_decreasing_in_b = all_escaped;
  std::vector<double> xs, ys;
  double prev = 0.0;
  bool first = true;
  for (const auto& [b, t] : by_b) {
    if (!first) {
      if (t > prev) sum.escape_nonincreasing_in_b = false;
      if (!(t < prev)) sum.escape_strictly_decreasing_in_b = false;
    }
    prev = t;
    first = false;
    xs.push_back(-std::log(b - 1.0));
    ys.push_back(t);
  }
  sum.escape_vs_log = fit_line(xs, ys);

  CsvWriter csv(sweep_dir / "sweep.csv",
                {"b", "dir", "status", "t_final", "t_escape", "max_grad_ratio", "steps", "error"});
  for (const auto& e : sum.entries) {
    CsvRow row;
    row.add(e.b).add(e.dir).add(e.ok ? to_string(e.status) : std::string("error")).add(e.t_final).add(e.t_escape);
    row.add(e.max_grad_ratio).add(e.steps).add(e.error);
    csv.write(row);
  }
  return sum;
}

}  // namespace nls::lab
