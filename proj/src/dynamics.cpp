#include "nls/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nls/core.hpp"
#include "nls/error.hpp"
#include "nls/fft.hpp"
#include "nls/kernels.hpp"

namespace nls {

namespace kp = kernels::parallel;

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::ReachedTEnd: return "ReachedTEnd";
    case RunStatus::BlowupDetected: return "BlowupDetected";
    case RunStatus::ResolutionLost: return "ResolutionLost";
    case RunStatus::Diverged: return "Diverged";
  }
  return "?";
}

void IntegratorConfig::validate() const {
  std::ostringstream err;
  if (!(dt_min > 0.0)) err << " dt_min must be > 0;";
  if (!(dt0 > dt_min)) err << " dt0 must exceed dt_min;";
  if (!(cfl_c > 0.0)) err << " cfl_c must be > 0;";
  if (!(t_end >= 0.0)) err << " t_end must be >= 0;";
  if (!(sample_every > 0.0)) err << " sample_every must be > 0;";
  if (!(blowup_grad_factor > 1.0)) err << " blowup_grad_factor must be > 1;";
  if (!(tail_fraction_max > 0.0)) err << " tail_fraction_max must be > 0;";
  if (sponge_strength < 0.0) err << " sponge_strength must be >= 0;";
  if (!(sponge_width > 0.0 && sponge_width < 0.5)) err << " sponge_width must lie in (0, 0.5);";
  if (!err.str().empty()) throw ConfigError("integrator config:" + err.str());
}

SplitStepper::SplitStepper(const PhysParams& params, const GridSpec& grid, bool nonlinear,
                           double sponge_strength, double sponge_width)
    : params_(params), grid_(grid), nonlinear_(nonlinear), lat_(Lattice::get(params.d, grid)) {
  const std::size_t N = lat_->size();
  spec_.resize(N);
  mult_.resize(N);
  high_.assign(N, 0);
  const double kcut = (2.0 / 3.0) * std::abs(lat_->k()[grid.n / 2]);
  int idx[3];
  for (std::size_t i = 0; i < N; ++i) {
    lat_->unravel(i, idx);
    for (int a = 0; a < params.d; ++a)
      if (std::abs(lat_->k()[idx[a]]) > kcut) high_[i] = 1;
  }
  if (sponge_strength > 0.0) {
    sponge_.assign(N, 0.0);
    const double start = (1.0 - sponge_width) * grid.L;
    for (std::size_t i = 0; i < N; ++i) {
      lat_->unravel(i, idx);
      double s = 0.0;
      for (int a = 0; a < params.d; ++a) {
        double z = (std::abs(lat_->x()[idx[a]]) - start) / (sponge_width * grid.L);
        z = std::clamp(z, 0.0, 1.0);
        s += z * z * z * (10.0 - 15.0 * z + 6.0 * z * z);
      }
      sponge_[i] = sponge_strength * s;
    }
  }
}

void SplitStepper::set_dt(double dt) {
  if (dt == dt_cached_) return;
  kp::free_propagator(mult_, lat_->k2(), dt);
  dt_cached_ = dt;
}

void SplitStepper::step(Field& u, double dt) {
  const double power = params_.p - 1.0;
  const auto& fft = Fft::get(params_.d, grid_.n);
  set_dt(dt);
  if (nonlinear_) kp::nonlinear_phase(u.values, 0.5 * dt, power);
  fft.forward(u.values, spec_);
  kp::multiply(spec_, mult_);
  const double total = kp::sum_abs2(spec_);
  const double high = kernels::reduce(spec_.size(), [&](std::size_t i) { return high_[i] ? std::norm(spec_[i]) : 0.0; });
  tail_ = total > 0.0 ? high / total : 0.0;
  grad_sq_ = grad_norm_sq_spectral(*lat_, spec_);
  fft.inverse(spec_, u.values);
  if (nonlinear_) kp::nonlinear_phase(u.values, 0.5 * dt, power);
  if (!sponge_.empty()) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(u.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) u.values[i] *= std::exp(-dt * sponge_[i]);
  }
  u.t += dt;
}

Field step(const Field& u, double dt, bool nonlinear) {
  if (!(dt > 0.0)) throw PreconditionError("step size must be positive");
  SplitStepper stepper(u.params, u.grid, nonlinear);
  Field out = u;
  stepper.step(out, dt);
  if (!out.all_finite()) throw NonFinite("split step produced non-finite values");
  return out;
}

double tail_fraction(const Field& u) {
  const auto lat = u.lattice();
  const auto spec = to_spectral(u);
  const double kcut = (2.0 / 3.0) * std::abs(lat->k()[u.grid.n / 2]);
  const double total = kp::sum_abs2(spec);
  const double high = kernels::reduce(spec.size(), [&](std::size_t i) {
    int idx[3];
    lat->unravel(i, idx);
    for (int a = 0; a < u.d(); ++a)
      if (std::abs(lat->k()[idx[a]]) > kcut) return std::norm(spec[i]);
    return 0.0;
  });
  return total > 0.0 ? high / total : 0.0;
}

namespace {

double annulus_fraction(const Field& u) {
  const auto lat = u.lattice();
  const double edge = 0.75 * u.grid.L;
  const double total = kp::sum_abs2(u.values);
  if (!(total > 0.0)) return 0.0;
  const double outer = kernels::reduce(u.size(), [&](std::size_t i) {
    int idx[3];
    lat->unravel(i, idx);
    for (int a = 0; a < u.d(); ++a)
      if (std::abs(lat->x()[idx[a]]) > edge) return std::norm(u.values[i]);
    return 0.0;
  });
  return outer / total;
}

}  // namespace

RunOutcome evolve(const Field& u0, const IntegratorConfig& cfg, const GroundState& Q, const SampleSink& sink) {
  cfg.validate();
  if (!u0.all_finite()) throw NonFinite("initial datum contains non-finite values");
  if (!(u0.params == Q.params()) || !(u0.grid == Q.grid()))
    throw GridMismatch("evolve: datum and ground state differ in grid or params");

  RunOutcome out;
  out.sponge_active = cfg.sponge_strength > 0.0;
  SplitStepper stepper(u0.params, u0.grid, cfg.nonlinear, cfg.sponge_strength, cfg.sponge_width);
  Field u = u0;
  const double t0 = u0.t;
  const double power = u0.params.p - 1.0;

  const FunctionalRecord first = evaluate(u, Q);
  const double M0 = first.M, E0 = first.E;
  double last_dt = 0.0;
  double last_tail = tail_fraction(u);
  long steps = 0;
  out.max_grad_ratio = std::sqrt(first.gradL2sq / Q.grad_sq);

  auto sample = [&](const FunctionalRecord* pre) {
    FunctionalRecord rec = pre ? *pre : evaluate(u, Q);
    SampleDiagnostics dg;
    dg.dM_rel = M0 > 0.0 ? (rec.M - M0) / M0 : rec.M;
    dg.dE_rel = E0 != 0.0 ? (rec.E - E0) / std::abs(E0) : rec.E;
    dg.tail_fraction = last_tail;
    dg.dt = last_dt;
    dg.annulus_fraction = annulus_fraction(u);
    dg.steps = steps;
    if (sink) {
      if (auto path = sink(u, rec, dg)) out.checkpoints.push_back(*path);
    }
    out.records.push_back(std::move(rec));
    out.diagnostics.push_back(dg);
  };

  sample(&first);
  long sample_index = 1;
  const double tol = 1e-12 * std::max(1.0, cfg.t_end);
  for (;;) {
    const double elapsed = u.t - t0;
    if (elapsed >= cfg.t_end - tol) {
      out.status = RunStatus::ReachedTEnd;
      break;
    }
    if (steps >= cfg.max_steps) {
      out.status = RunStatus::ResolutionLost;
      sample(nullptr);
      break;
    }
    const double umax = kp::max_abs(u.values);
    double dt = cfg.dt0;
    if (cfg.nonlinear && umax > 0.0) dt = std::min(dt, cfg.cfl_c / std::pow(umax, power));
    if (dt < cfg.dt_min) {
      out.status = RunStatus::ResolutionLost;
      sample(nullptr);
      break;
    }
    const double next_sample = std::min(sample_index * cfg.sample_every, cfg.t_end);
    bool lands = false;
    if (elapsed + dt >= next_sample - tol) {
      dt = next_sample - elapsed;
      lands = true;
    }
    stepper.step(u, dt);
    if (lands) u.t = t0 + next_sample;
    ++steps;
    last_dt = dt;
    last_tail = stepper.last_tail_fraction();
    const double grad_ratio = std::sqrt(stepper.last_grad_sq() / Q.grad_sq);
    if (!std::isfinite(last_tail) || !std::isfinite(grad_ratio)) {
      out.status = RunStatus::Diverged;
      break;
    }
    out.max_grad_ratio = std::max(out.max_grad_ratio, grad_ratio);
    if (last_tail > cfg.tail_fraction_max) {
      out.status = grad_ratio > cfg.blowup_grad_factor ? RunStatus::BlowupDetected : RunStatus::ResolutionLost;
      sample(nullptr);
      break;
    }
    if (lands) {
      sample(nullptr);
      ++sample_index;
    }
  }
  out.t_final = u.t - t0;
  out.steps = steps;
  out.final_state = std::move(u);
  return out;
}

RunOutcome evolve_backward(const Field& u0, const IntegratorConfig& cfg, const GroundState& Q, const SampleSink& sink) {
  Field v0 = conjugate(u0);
  v0.t = -u0.t;
  SampleSink wrapped;
  if (sink) {
    wrapped = [&](const Field& v, const FunctionalRecord& rec, const SampleDiagnostics& dg) {
      Field u = conjugate(v);
      u.t = -v.t;
      FunctionalRecord r = rec;
      r.t = -rec.t;
      for (auto& p : r.P) p = -p;
      return sink(u, r, dg);
    };
  }
  RunOutcome out = evolve(v0, cfg, Q, wrapped);
  for (auto& r : out.records) {
    r.t = -r.t;
    for (auto& p : r.P) p = -p;
  }
  out.t_final = -out.t_final;
  const double t = -out.final_state.t;
  out.final_state = conjugate(out.final_state);
  out.final_state.t = t;
  return out;
}

}  // namespace nls
