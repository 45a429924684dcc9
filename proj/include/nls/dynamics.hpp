#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nls/field.hpp"
#include "nls/functionals.hpp"
#include "nls/ground_state.hpp"

namespace nls {

struct IntegratorConfig {
  double dt0 = 1e-3;
  double dt_min = 1e-12;
  double cfl_c = 0.1;               ///< max nonlinear phase rotation per step (rad)
  double t_end = 1.0;
  double sample_every = 0.1;
  double blowup_grad_factor = 50.0;
  double tail_fraction_max = 1e-4;
  bool nonlinear = true;            ///< false gives the free Schrödinger flow (test hook)
  double sponge_strength = 0.0;     ///< > 0 enables the absorbing layer
  double sponge_width = 0.15;       ///< layer thickness as a fraction of L
  long max_steps = 200'000'000;

  /// Throws ConfigError on inconsistent settings.
  void validate() const;
};

enum class RunStatus { ReachedTEnd, BlowupDetected, ResolutionLost, Diverged };
std::string to_string(RunStatus s);

/// Per-sample integrator diagnostics that accompany each FunctionalRecord.
struct SampleDiagnostics {
  double dM_rel = 0.0;            ///< (M - M0) / M0
  double dE_rel = 0.0;            ///< (E - E0) / |E0|
  double tail_fraction = 0.0;     ///< spectral mass with |k|_inf > 2/3 k_max, over total
  double dt = 0.0;                ///< last step size
  double annulus_fraction = 0.0;  ///< mass with |x|_inf > 3L/4, over total
  long steps = 0;
};

struct RunOutcome {
  RunStatus status = RunStatus::ReachedTEnd;
  double t_final = 0.0;  ///< signed: negative for backward runs
  std::vector<FunctionalRecord> records;
  std::vector<SampleDiagnostics> diagnostics;
  std::vector<std::string> checkpoints;
  bool sponge_active = false;
  double max_grad_ratio = 0.0;  ///< sup over all steps of ||∇u|| / ||∇Q||
  long steps = 0;
  Field final_state;
};

/// Called at every sample. May return a checkpoint path to record.
using SampleSink =
    std::function<std::optional<std::string>(const Field&, const FunctionalRecord&, const SampleDiagnostics&)>;

/// Strang split-step integrator with reusable buffers. Not thread-safe; use
/// one instance per run.
class SplitStepper {
 public:
  SplitStepper(const PhysParams& params, const GridSpec& grid, bool nonlinear = true,
               double sponge_strength = 0.0, double sponge_width = 0.15);

  /// Half nonlinear phase, exact linear step, half nonlinear phase.
  void step(Field& u, double dt);

  /// Diagnostics of the mid-step spectrum (after the linear substep).
  double last_tail_fraction() const { return tail_; }
  double last_grad_sq() const { return grad_sq_; }

 private:
  void set_dt(double dt);

  PhysParams params_;
  GridSpec grid_;
  bool nonlinear_;
  std::shared_ptr<const Lattice> lat_;
  std::vector<cplx> spec_, mult_;
  std::vector<double> sponge_;
  std::vector<unsigned char> high_;
  double dt_cached_ = -1.0;
  double tail_ = 0.0, grad_sq_ = 0.0;
};

/// One Strang step. Throws NonFinite on overflow.
Field step(const Field& u, double dt, bool nonlinear = true);

/// Spectral mass fraction above 2/3 of the maximal wavenumber (infinity norm).
double tail_fraction(const Field& u);

RunOutcome evolve(const Field& u0, const IntegratorConfig& cfg, const GroundState& Q,
                  const SampleSink& sink = {});

/// Negative-time evolution via u(-t) = conj(v(t)) with v the forward
/// solution from conj(u0). Records carry negative times and reversed momentum.
RunOutcome evolve_backward(const Field& u0, const IntegratorConfig& cfg, const GroundState& Q,
                           const SampleSink& sink = {});

}  // namespace nls
