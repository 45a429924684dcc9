// nlslab: command-line front end for the threshold NLS laboratory.
//
// Exit codes: 0 ok, 2 configuration error, 3 numerical failure, 4 format
// error, 1 anything else (I/O, internal).

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "nls/core.hpp"
#include "nls/error.hpp"
#include "nls/functionals.hpp"
#include "nls/ground_state.hpp"
#include "nls/lab/checkpoint.hpp"
#include "nls/lab/config.hpp"
#include "nls/lab/scenario.hpp"
#include "nls/lab/sweep.hpp"
#include "nls/modulation.hpp"
#include "nls/virial.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitFormat = 4;

int exit_code(nls::Error::Kind k) {
  switch (k) {
    case nls::Error::Kind::Config: return kExitConfig;
    case nls::Error::Kind::Numerical: return kExitNumerical;
    case nls::Error::Kind::Format: return kExitFormat;
  }
  return kExitOther;
}

ordered_json num(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

/// Config file plus per-key flags, shared by the subcommands that run things.
struct ConfigOptions {
  std::string file;
  std::vector<std::string> sets;
  std::map<std::string, std::string> flags;

  void attach(CLI::App* app) {
    app->add_option("-c,--config", file, "key = value config file")->check(CLI::ExistingFile);
    app->add_option("-s,--set", sets, "override as key=value (repeatable)");
    for (const auto& key : nls::lab::config_keys())
      app->add_option("--" + key, flags[key], "config key '" + key + "'")->group("Config keys");
  }

  /// File values first, then --set, then the dedicated flags.
  nls::lab::ExperimentConfig resolve(const CLI::App* app) const {
    nls::lab::KeyValues kv;
    if (!file.empty()) kv = nls::lab::read_config_file(file);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw nls::ConfigError("--set expects key=value, got '" + s + "'");
      kv[CLI::detail::trim_copy(s.substr(0, eq))] = CLI::detail::trim_copy(s.substr(eq + 1));
    }
    for (const auto& [key, value] : flags)
      if (app->count("--" + key) > 0) kv[key] = value;
    return nls::lab::apply(nls::lab::ExperimentConfig{}, kv);
  }
};

ordered_json certificate_json(const nls::Certificate& c) {
  return {{"residual", c.residual},
          {"pohozaev_grad", c.pohozaev_grad},
          {"pohozaev_mass", c.pohozaev_mass},
          {"virial", c.virial},
          {"energy_formula", c.energy_formula},
          {"symmetry", c.symmetry},
          {"boundary", c.boundary},
          {"min_interior", c.min_interior},
          {"iterations", c.iterations}};
}

int cmd_groundstate(const nls::lab::ExperimentConfig& cfg, const std::string& method) {
  const auto params = cfg.params();
  const auto grid = cfg.grid();
  const auto tol = nls::default_tolerances(params.d, grid);
  nls::GroundState Q;
  if (method == "closed" || (method == "auto" && params.d == 1))
    Q = nls::solve_1d_closed_form(params, grid, tol);
  else
    Q = nls::solve_petviashvili(params, grid, nls::PetviashviliOptions{}, tol);

  const fs::path dir = nls::lab::output_root() / cfg.output_dir;
  fs::create_directories(dir);
  nls::lab::save_checkpoint(Q.profile, dir / "ground_state.nlsc");
  ordered_json js;
  js["d"] = params.d;
  js["p"] = params.p;
  js["L"] = grid.L;
  js["n"] = grid.n;
  js["method"] = nls::to_string(Q.method);
  js["mass"] = Q.mass;
  js["grad_sq"] = Q.grad_sq;
  js["lp1"] = Q.lp1;
  js["variance"] = Q.variance;
  js["energy"] = Q.energy();
  js["certificate"] = certificate_json(Q.certificate);
  js["checkpoint"] = "ground_state.nlsc";
  std::ofstream(dir / "ground_state.json", std::ios::binary | std::ios::trunc) << js.dump(2) << "\n";
  std::cout << js.dump(2) << "\n";
  return kExitOk;
}

int cmd_evolve(const nls::lab::ExperimentConfig& cfg) {
  const auto sum = nls::lab::run_scenario(cfg, nls::lab::output_root());
  std::printf("scenario %s  d=%d p=%g L=%g n=%d  initial class %s\n", nls::lab::to_string(cfg.scenario).c_str(),
              cfg.d, cfg.p, cfg.L, cfg.n, nls::to_string(sum.initial.men_class).c_str());
  for (const auto& dr : sum.directions)
    std::printf("%-8s %-15s t_final=%.6g t_escape=%.6g max_grad_ratio=%.6g samples=%zu\n", dr.direction.c_str(),
                nls::to_string(dr.status).c_str(), dr.t_final, dr.t_escape, dr.max_grad_ratio, dr.samples.size());
  std::printf("outputs in %s\n", sum.dir.string().c_str());
  return kExitOk;
}

int cmd_sweep(const nls::lab::ExperimentConfig& cfg, const std::vector<double>& bs, unsigned jobs) {
  const auto sum = nls::lab::sweep(cfg, bs, nls::lab::output_root(), jobs);
  int failed = 0;
  for (const auto& e : sum.entries) {
    if (e.ok)
      std::printf("b=%-8g %-15s t_escape=%.6g\n", e.b, nls::to_string(e.status).c_str(), e.t_escape);
    else {
      std::printf("b=%-8g error: %s\n", e.b, e.error.c_str());
      ++failed;
    }
  }
  std::printf("T_esc strictly decreasing in b: %s\n", sum.escape_strictly_decreasing_in_b ? "yes" : "no");
  std::printf("T_esc vs -log(b-1): slope=%.6g intercept=%.6g R2=%.6g (%d points)\n", sum.escape_vs_log.slope,
              sum.escape_vs_log.intercept, sum.escape_vs_log.r2, sum.escape_vs_log.points);
  return failed ? kExitNumerical : kExitOk;
}

int cmd_diagnose(const std::string& path, bool modulation) {
  const nls::Field u = nls::lab::load_checkpoint(path);
  const auto& Q = nls::lab::ground_state_for(u.params, u.grid);
  const auto rec = nls::evaluate(u, Q);
  const auto prod = nls::threshold_products(u, Q);

  ordered_json js;
  js["checkpoint"] = path;
  js["d"] = u.d();
  js["p"] = u.params.p;
  js["L"] = u.grid.L;
  js["n"] = u.grid.n;
  js["t"] = u.t;
  js["M"] = rec.M;
  js["E"] = rec.E;
  js["P"] = rec.P;
  js["K"] = rec.K;
  js["mu"] = rec.mu;
  js["grad_sq"] = rec.gradL2sq;
  js["lp1"] = rec.Lp1;
  js["men_class"] = nls::to_string(rec.men_class);
  js["me_ratio"] = num(prod.me_ratio);
  js["grad_ratio"] = num(prod.grad_ratio);
  if (nls::is_threshold(rec.men_class)) js["kmu_residual"] = nls::k_mu_relation_check(rec, u.params);
  js["tail_fraction"] = nls::tail_fraction(u);

  const auto cutoff = nls::build_cutoff();
  ordered_json vir = ordered_json::array();
  for (double R : nls::default_probe_radii(u.grid)) {
    const nls::VirialProbe probe(R, u.d(), u.grid, cutoff);
    vir.push_back({{"R", R}, {"J", nls::J(u, probe)}, {"Jprime", nls::Jprime(u, probe)}, {"A", nls::A(u, probe)}});
  }
  js["virial"] = vir;

  if (modulation) {
    const double mu0 = nls::default_mu0(Q);
    if (std::abs(rec.mu) < mu0) {
      try {
        const auto f = nls::fit(u, Q);
        js["modulation"] = {{"x", f.x},         {"theta", f.theta},   {"rho", f.rho}, {"delta", f.g_h1},
                            {"h_h1", f.h_h1},   {"iterations", f.iterations},
                            {"max_residual", f.max_residual()}};
      } catch (const nls::NonConvergence& e) {
        js["modulation"] = {{"error", e.what()}};
      }
    } else {
      js["modulation"] = {{"skipped", "|mu| >= mu0"}, {"mu0", mu0}};
    }
  }
  std::cout << js.dump(2) << "\n";
  return kExitOk;
}

int cmd_cutoff_check(int mesh_points, double margin) {
  const auto phi = nls::build_cutoff(mesh_points, margin);
  const auto rep = nls::check_cutoff(phi, margin);
  ordered_json js;
  js["shape"] = {{"a", phi.shape().a}, {"c", phi.shape().c}, {"e", phi.shape().e}};
  js["dip"] = phi.dip();
  js["plateau"] = phi.plateau();
  js["max_inner_error"] = rep.max_inner_error;
  js["max_outer_value"] = rep.max_outer_value;
  js["min_phi"] = rep.min_phi;
  js["max_phi2"] = rep.max_phi2;
  js["jump_at_1"] = rep.jump_at_1;
  js["jump_at_3"] = rep.jump_at_3;
  js["max_internal_jump"] = rep.max_internal_jump;
  js["refined_jump_at_1"] = rep.refined_jump_at_1;
  js["refined_jump_at_3"] = rep.refined_jump_at_3;
  js["self_consistency"] = rep.self_consistency;
  js["ok"] = rep.ok;
  std::cout << js.dump(2) << "\n";
  return rep.ok ? kExitOk : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Threshold dynamics laboratory for the focusing NLS"};
  app.require_subcommand(1);
  app.footer(std::string("Outputs go under $") + nls::lab::kOutputRootEnv + " (default: current directory).");

  auto* gs = app.add_subcommand("groundstate", "compute, certify and export Q");
  ConfigOptions gs_cfg;
  gs_cfg.attach(gs);
  std::string method = "auto";
  gs->add_option("--method", method, "auto, closed or petviashvili")
      ->check(CLI::IsMember({"auto", "closed", "petviashvili"}));

  auto* ev = app.add_subcommand("evolve", "run one scenario");
  ConfigOptions ev_cfg;
  ev_cfg.attach(ev);

  auto* sw = app.add_subcommand("sweep", "threshold runs over a list of b > 1");
  ConfigOptions sw_cfg;
  sw_cfg.attach(sw);
  std::vector<double> bs;
  unsigned jobs = 0;
  sw->add_option("--bs", bs, "b values, comma separated")->required()->delimiter(',');
  sw->add_option("-j,--jobs", jobs, "concurrent runs (0 = hardware threads)");

  auto* dg = app.add_subcommand("diagnose", "recompute functionals of a checkpoint");
  std::string ckpt;
  bool no_fit = false;
  dg->add_option("checkpoint", ckpt, "checkpoint file")->required()->check(CLI::ExistingFile);
  dg->add_flag("--no-modulation", no_fit, "skip the modulation fit");

  auto* cc = app.add_subcommand("cutoff-check", "validate the virial cutoff");
  int mesh_points = 8001;
  double margin = 0.5;
  cc->add_option("--mesh-points", mesh_points, "tabulation points")->check(CLI::Range(16, 10'000'000));
  cc->add_option("--margin", margin, "checked extent past r = 3")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*gs) return cmd_groundstate(gs_cfg.resolve(gs), method);
    if (*ev) return cmd_evolve(ev_cfg.resolve(ev));
    if (*sw) return cmd_sweep(sw_cfg.resolve(sw), bs, jobs);
    if (*dg) return cmd_diagnose(ckpt, !no_fit);
    if (*cc) return cmd_cutoff_check(mesh_points, margin);
  } catch (const nls::Error& e) {
    std::fprintf(stderr, "nlslab: %s\n", e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "nlslab: %s\n", e.what());
    return kExitOther;
  }
  return kExitOther;
}
