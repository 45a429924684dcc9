#include "nls/lab/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <mutex>
#include <tuple>

#include "json.hpp"

#include "nls/core.hpp"
#include "nls/error.hpp"
#include "nls/lab/checkpoint.hpp"
#include "nls/lab/csv.hpp"
#include "nls/lab/threshold.hpp"

namespace nls::lab {

namespace fs = std::filesystem;

const GroundState& ground_state_for(const PhysParams& params, const GridSpec& grid) {
  using Key = std::tuple<int, double, double, int>;
  static std::mutex mu;
  static std::map<Key, std::unique_ptr<GroundState>> cache;
  const Key key{params.d, params.p, grid.L, grid.n};
  std::lock_guard lock(mu);
  auto it = cache.find(key);
  if (it != cache.end()) return *it->second;
  auto gs = std::make_unique<GroundState>(params.d == 1 ? solve_1d_closed_form(params, grid)
                                                         : solve_petviashvili(params, grid, PetviashviliOptions{},
                                                                              default_tolerances(params.d, grid)));
  return *cache.emplace(key, std::move(gs)).first->second;
}

Field build_datum(const ExperimentConfig& cfg, const GroundState& Q) {
  switch (cfg.scenario) {
    case Scenario::GroundOrbit: return make_scaled_datum(Q, 1.0, cfg.boost);
    case Scenario::ThresholdKneg: return make_threshold_datum(Q, cfg.b, cfg.phase_sign);
    case Scenario::ThresholdKpos: return make_threshold_kpos_datum(Q, cfg.b);
    case Scenario::Subcritical:
    case Scenario::Supercritical: return make_scaled_datum(Q, cfg.effective_amplitude(), cfg.boost);
    case Scenario::Custom: {
      Field u = load_checkpoint(cfg.seed_file);
      if (!u.same_grid(Q.profile))
        throw ConfigError("seed_file grid or params differ from the configured run (d, p, L, n)");
      return u;
    }
  }
  throw ConfigError("unhandled scenario");
}

double escape_time(const std::vector<SampleRow>& samples, double level) {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double g = samples[i].products.grad_ratio;
    if (!(g > level)) continue;
    const double t1 = std::abs(samples[i].rec.t);
    if (i == 0) return t1;
    const double t0 = std::abs(samples[i - 1].rec.t);
    const double g0 = samples[i - 1].products.grad_ratio;
    return t0 + (level - g0) / (g - g0) * (t1 - t0);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

namespace {

std::string radius_tag(double r) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", r);
  return buf;
}

}  // namespace

std::vector<std::string> diagnostics_header(int d, const std::vector<double>& radii, const std::vector<double>& eps) {
  std::vector<std::string> h = {"t", "M", "E"};
  for (int a = 1; a <= d; ++a) h.push_back("P_" + std::to_string(a));
  for (const char* c : {"K", "mu", "grad_sq", "lp1", "men_class", "me_ratio", "grad_ratio", "kmu_residual", "dM_rel",
                        "dE_rel", "tail_fraction", "dt", "annulus_fraction", "steps"})
    h.push_back(c);
  for (double r : radii) {
    h.push_back("J@" + radius_tag(r));
    h.push_back("Jprime@" + radius_tag(r));
    h.push_back("A@" + radius_tag(r));
  }
  h.push_back("fit_ok");
  for (int a = 1; a <= d; ++a) h.push_back("x_" + std::to_string(a));
  for (const char* c : {"theta", "rho", "g_h1", "h_h1", "re_Qh", "r1", "r2_max", "delta"}) h.push_back(c);
  for (int a = 1; a <= d; ++a) h.push_back("X_" + std::to_string(a));
  h.push_back("track_source");
  for (double e : eps) h.push_back("R_eps@" + radius_tag(e));
  h.push_back("variance");
  return h;
}

namespace {

CsvRow csv_row(const SampleRow& s, int d, const std::vector<double>& eps) {
  CsvRow row;
  const auto& r = s.rec;
  row.add(r.t).add(r.M).add(r.E);
  for (int a = 0; a < d; ++a) row.add(r.P[a]);
  row.add(r.K).add(r.mu).add(r.gradL2sq).add(r.Lp1).add(to_string(r.men_class));
  row.add(s.products.me_ratio).add(s.products.grad_ratio).add(s.kmu_residual);
  row.add(s.diag.dM_rel).add(s.diag.dE_rel).add(s.diag.tail_fraction).add(s.diag.dt).add(s.diag.annulus_fraction);
  row.add(s.diag.steps);
  for (std::size_t j = 0; j < s.J.size(); ++j) row.add(s.J[j]).add(s.Jp[j]).add(s.A[j]);
  if (s.fit) {
    const auto& f = *s.fit;
    row.add(true);
    for (int a = 0; a < d; ++a) row.add(f.x[a]);
    double r2 = 0.0;
    for (double v : f.r2) r2 = std::max(r2, std::abs(v));
    row.add(f.theta).add(f.rho).add(f.g_h1).add(f.h_h1).add(f.re_Qh).add(f.r1).add(r2).add(f.g_h1);
  } else {
    row.add(false);
    for (int a = 0; a < d + 8; ++a) row.empty();
  }
  for (int a = 0; a < d; ++a) row.add(s.track.X[a]);
  row.add(to_string(s.track.source));
  for (double e : eps) row.add(s.track.radius.at(e));
  row.add(s.variance);
  return row;
}

nlohmann::json num(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

DirectionResult run_direction(const ExperimentConfig& cfg, const GroundState& Q, const Field& u0, bool backward,
                              const fs::path& dir) {
  DirectionResult res;
  res.direction = backward ? "backward" : "forward";
  const int d = cfg.d;
  const auto radii = cfg.radii();
  const CutoffProfile cutoff = build_cutoff();
  std::vector<VirialProbe> probes;
  for (double r : radii) probes.emplace_back(r, d, Q.grid(), cutoff);
  const double mu0 = cfg.mu0_fraction * Q.grad_sq;
  Tracker tracker(mu0, cfg.eps);
  std::optional<ModulationGuess> guess;
  double guess_t = 0.0;

  fs::create_directories(dir / "checkpoints");
  CsvWriter csv(dir / (res.direction + ".csv"), diagnostics_header(d, radii, cfg.eps));
  std::size_t index = 0;

  SampleSink sink = [&](const Field& u, const FunctionalRecord& rec,
                        const SampleDiagnostics& dg) -> std::optional<std::string> {
    SampleRow s;
    s.rec = rec;
    s.diag = dg;
    s.products = threshold_products(cfg.params(), rec.M, rec.E, rec.gradL2sq, Q);
    if (is_threshold(rec.men_class)) s.kmu_residual = k_mu_relation_check(rec, cfg.params());
    for (const auto& pr : probes) {
      s.J.push_back(J(u, pr));
      s.Jp.push_back(Jprime(u, pr));
      s.A.push_back(A(u, pr));
    }
    if (cfg.modulation && std::abs(rec.mu) < mu0) {
      ModulationOptions opts;
      opts.mu0 = mu0;
      std::optional<ModulationGuess> g0;
      if (guess) {
        g0 = guess;
        g0->theta += rec.t - guess_t;
      }
      for (int attempt = 0; attempt < 2 && !s.fit; ++attempt) {
        try {
          s.fit = fit(u, Q, attempt == 0 ? g0 : std::nullopt, opts);
        } catch (const NonConvergence&) {
        } catch (const ZeroMass&) {
        }
        if (!g0) break;
      }
      if (s.fit) {
        guess = ModulationGuess{s.fit->x, s.fit->theta};
        guess_t = rec.t;
      }
    }
    s.track = tracker.push(u, rec, s.fit ? &*s.fit : nullptr);
    s.variance = centered_variance(u, s.track.X);
    if (s.fit) {
      s.fit->g = Field();
      s.fit->h = Field();
    }
    csv.write(csv_row(s, d, cfg.eps));

    double xn = 0.0;
    for (double x : s.track.X) xn += x * x;
    auto rows = tail_ratio_rows(rec.t, rec.mu, rec.gradL2sq, std::sqrt(xn), radii, s.A);
    res.tail_ratio.insert(res.tail_ratio.end(), rows.begin(), rows.end());
    res.samples.push_back(std::move(s));

    std::optional<std::string> path;
    if (cfg.checkpoint_every > 0 && index % static_cast<std::size_t>(cfg.checkpoint_every) == 0) {
      char name[64];
      std::snprintf(name, sizeof name, "%s_%06zu.nlsc", res.direction.c_str(), index);
      save_checkpoint(u, dir / "checkpoints" / name);
      path = std::string("checkpoints/") + name;
    }
    ++index;
    return path;
  };

  RunOutcome out = backward ? evolve_backward(u0, cfg.integrator, Q, sink) : evolve(u0, cfg.integrator, Q, sink);
  res.status = out.status;
  res.t_final = out.t_final;
  res.max_grad_ratio = out.max_grad_ratio;
  res.steps = out.steps;
  res.sponge_active = out.sponge_active;
  res.checkpoints = out.checkpoints;
  const std::string final_name = res.direction + "_final.nlsc";
  if (out.final_state.all_finite()) {
    save_checkpoint(out.final_state, dir / "checkpoints" / final_name);
    res.checkpoints.push_back("checkpoints/" + final_name);
  }
  res.final_state = std::move(out.final_state);

  res.t_escape = escape_time(res.samples);
  std::vector<ConvergenceRow> conv;
  std::vector<TrackState> tr;
  std::vector<FunctionalRecord> recs;
  for (const auto& s : res.samples) {
    res.max_abs_dM = std::max(res.max_abs_dM, std::abs(s.diag.dM_rel));
    res.max_abs_dE = std::max(res.max_abs_dE, std::abs(s.diag.dE_rel));
    if (s.fit) {
      res.max_delta = std::isnan(res.max_delta) ? s.fit->g_h1 : std::max(res.max_delta, s.fit->g_h1);
      ConvergenceRow c;
      c.t = std::abs(s.rec.t);
      c.delta = s.fit->g_h1;
      conv.push_back(c);
    }
    tr.push_back(s.track);
    FunctionalRecord r = s.rec;
    r.t = std::abs(r.t);
    recs.push_back(r);
  }
  if (!conv.empty()) res.delta_rate = fit_log_rate(conv, conv.front().t, conv.back().t, 1e-14);
  res.drift_bound = drift_bound_monitor(tr, recs, 1.0);

  CsvWriter tail_csv(dir / ("tail_ratio_" + res.direction + ".csv"),
                {"t", "R", "R_minus_X", "absA", "absMu", "ratio", "degenerate", "violation"});
  for (const auto& r : res.tail_ratio) {
    CsvRow row;
    row.add(r.t).add(r.R).add(r.R_minus_X).add(r.absA).add(r.absMu).add(r.ratio).add(r.degenerate).add(r.violation);
    tail_csv.write(row);
  }
  return res;
}

}  // namespace

RunSummary run_scenario(const ExperimentConfig& cfg, const fs::path& root) {
  cfg.validate();
  RunSummary sum;
  sum.cfg = cfg;
  sum.dir = root / cfg.output_dir;
  fs::create_directories(sum.dir);
  {
    std::ofstream os(sum.dir / "config.txt", std::ios::binary | std::ios::trunc);
    os << render(cfg);
  }

  const GroundState& Q = ground_state_for(cfg.params(), cfg.grid());
  sum.Q_mass = Q.mass;
  sum.Q_grad_sq = Q.grad_sq;
  sum.Q_lp1 = Q.lp1;
  sum.Q_variance = Q.variance;
  sum.Q_energy = Q.energy();
  const Field u0 = build_datum(cfg, Q);
  sum.initial = evaluate(u0, Q);
  sum.initial_products = threshold_products(u0, Q);

  sum.directions.push_back(run_direction(cfg, Q, u0, false, sum.dir));
  if (cfg.backward) sum.directions.push_back(run_direction(cfg, Q, u0, true, sum.dir));

  nlohmann::ordered_json js;
  js["scenario"] = to_string(cfg.scenario);
  js["d"] = cfg.d;
  js["p"] = cfg.p;
  js["L"] = cfg.L;
  js["n"] = cfg.n;
  js["mu0"] = cfg.mu0_fraction * Q.grad_sq;
  js["ground_state"] = {{"method", to_string(Q.method)}, {"mass", Q.mass}, {"grad_sq", Q.grad_sq},
                        {"lp1", Q.lp1},                  {"variance", Q.variance}, {"energy", Q.energy()}};
  js["initial"] = {{"M", sum.initial.M},
                   {"E", sum.initial.E},
                   {"K", sum.initial.K},
                   {"mu", sum.initial.mu},
                   {"men_class", to_string(sum.initial.men_class)},
                   {"me_ratio", num(sum.initial_products.me_ratio)},
                   {"grad_ratio", num(sum.initial_products.grad_ratio)}};
  for (const auto& dres : sum.directions) {
    nlohmann::ordered_json dj;
    dj["status"] = to_string(dres.status);
    dj["t_final"] = dres.t_final;
    dj["t_escape"] = num(dres.t_escape);
    dj["max_grad_ratio"] = dres.max_grad_ratio;
    dj["steps"] = dres.steps;
    dj["sponge_active"] = dres.sponge_active;
    dj["samples"] = dres.samples.size();
    dj["max_abs_dM_rel"] = dres.max_abs_dM;
    dj["max_abs_dE_rel"] = dres.max_abs_dE;
    dj["max_delta"] = num(dres.max_delta);
    dj["delta_rate"] = {{"slope", num(dres.delta_rate.slope)},
                        {"r2", num(dres.delta_rate.r2)},
                        {"points", dres.delta_rate.points}};
    dj["drift_bound"] = {{"C", num(dres.drift_bound.C)},
                     {"pairs", dres.drift_bound.pairs},
                     {"zero_integral_moves", dres.drift_bound.zero_integral_moves},
                     {"max_displacement", num(dres.drift_bound.max_displacement)}};
    int violations = 0;
    for (const auto& r : dres.tail_ratio) violations += r.violation;
    dj["tail_ratio_violations"] = violations;
    dj["checkpoints"] = dres.checkpoints;
    js[dres.direction] = dj;
  }
  std::ofstream os(sum.dir / "summary.json", std::ios::binary | std::ios::trunc);
  os << js.dump(2) << "\n";
  return sum;
}

}  // namespace nls::lab
