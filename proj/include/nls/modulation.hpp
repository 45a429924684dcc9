#pragma once

#include <map>
#include <optional>
#include <vector>

#include "nls/field.hpp"
#include "nls/functionals.hpp"
#include "nls/ground_state.hpp"

namespace nls {

/// Decomposition u = e^{iθ}(Q + g)(· - x) with Im∫gQ = 0 and Re∫g∇Q = 0;
/// ρ = Re∫gQ^p / ||Q||_{p+1}^{p+1} and h = g - ρQ.
struct ModulationFit {
  std::vector<double> x;
  double theta = 0.0;  ///< in (-π, π]
  Field g;
  double rho = 0.0;
  Field h;
  double r1 = 0.0;          ///< Im ∫ g Q
  std::vector<double> r2;   ///< Re ∫ g ∂_a Q
  double mu = 0.0;
  bool converged = false;
  int iterations = 0;
  double g_h1 = 0.0;        ///< ||g||_{H^1}
  double h_h1 = 0.0;
  double re_Qh = 0.0;       ///< Re ∫ Q h

  double max_residual() const;
};

struct ModulationGuess {
  std::vector<double> x;
  double theta = 0.0;
};

struct ModulationOptions {
  int max_iter = 50;
  double fd_step = 1e-6;       ///< finite-difference step, times the parameter scale
  double tol = 1e-13;          ///< stop when max residual < tol * ||Q||^2
  double accept = 1e-11;       ///< converged iff max residual < accept * ||Q||^2
  bool enforce_window = true;  ///< require |μ(u)| < μ0
  double mu0 = -1.0;           ///< negative selects default_mu0
};

/// μ0 = 0.2 ||∇Q||^2.
double default_mu0(const GroundState& Q);

/// x0 from the circular centroid of |u|^2, θ0 = arg ∫ u Q(· - x0).
/// Throws ZeroMass for u = 0.
ModulationGuess auto_guess(const Field& u, const GroundState& Q);

/// Newton solve of the orthogonality conditions. Throws PreconditionError
/// outside the μ window and NonConvergence when Newton fails or leaves
/// |x| < L/2.
ModulationFit fit(const Field& u, const GroundState& Q, const std::optional<ModulationGuess>& guess = std::nullopt,
                  const ModulationOptions& opts = {});

/// e^{iθ}(Q + g)(· - x).
Field reconstruct(const ModulationFit& f, const GroundState& Q);

enum class TrackSource { ModulationX, DensityCentroid };
const char* to_string(TrackSource s);

struct TrackState {
  double t = 0.0;
  std::vector<double> X;  ///< unwrapped across the periodic boundary
  TrackSource source = TrackSource::DensityCentroid;
  bool mu_window = false;  ///< |μ| < μ0 and a converged fit was available
  std::map<double, double> radius;  ///< ε -> R(ε)
};

/// Incremental form of track(): one sample at a time, unwrapping X against
/// the previous sample.
class Tracker {
 public:
  explicit Tracker(double mu0, std::vector<double> eps = {1e-2, 1e-4}) : mu0_(mu0), eps_(std::move(eps)) {}
  TrackState push(const Field& u, const FunctionalRecord& rec, const ModulationFit* fit);

 private:
  double mu0_;
  std::vector<double> eps_;
  std::vector<double> prev_;
};

/// X(t) from the fit inside the μ window and from the density centroid
/// outside, plus the compactness radius R(ε): the smallest distance R from X
/// (among node distances) with ∫_{|x-X|>R} |∇u|^2 + |u|^2 <= ε.
std::vector<TrackState> track(const std::vector<Field>& states, const std::vector<FunctionalRecord>& records,
                              const std::vector<std::optional<ModulationFit>>& fits, double mu0,
                              const std::vector<double>& eps = {1e-2, 1e-4});

double compactness_radius(const Field& u, std::span<const double> center, double eps);

struct ComparabilityRow {
  double t = 0.0;
  double mu = 0.0;
  double rho_ratio = 0.0;   ///< |ρ| / |μ|
  double h_ratio = 0.0;     ///< ||h||_{H^1} / |μ|
  double g_ratio = 0.0;     ///< ||g||_{H^1} / |μ|
  double qh_ratio = 0.0;    ///< |Re∫Qh| / |μ|
  bool degenerate = false;  ///< μ and g vanish; ratios undefined
};

std::vector<ComparabilityRow> comparability_monitor(const std::vector<ModulationFit>& fits, const std::vector<double>& times = {});

/// True when every non-degenerate ratio lies in [1/c_star, c_star].
bool within_band(const std::vector<ComparabilityRow>& rows, double c_star);

struct ConvergenceRow {
  double t = 0.0;
  double delta = 0.0;     ///< ||g||_{H^1}, the H^1 distance to the modulated orbit
  double variance = 0.0;  ///< ∫ |x - X(t)|^2 |u|^2, minimum-image distances
  double K = 0.0;
  double mu = 0.0;
  double k_over_mu = 0.0; ///< K / μ; the threshold relation predicts (d(p-1)-4)/4
};

struct RateFit {
  double slope = 0.0;  ///< d log δ / dt
  double intercept = 0.0;
  double r2 = 0.0;
  int points = 0;
};

std::vector<ConvergenceRow> convergence_monitor(const std::vector<Field>& states,
                                                const std::vector<FunctionalRecord>& records,
                                                const std::vector<std::optional<ModulationFit>>& fits,
                                                const std::vector<TrackState>& track);

/// Least-squares fit of log δ against t over samples with t in [t_lo, t_hi]
/// and δ > floor.
RateFit fit_log_rate(const std::vector<ConvergenceRow>& rows, double t_lo, double t_hi, double floor = 1e-300);

/// ∫ |x - c|^2 |u|^2 with minimum-image displacements.
double centered_variance(const Field& u, std::span<const double> center);

struct DriftBoundReport {
  double C = 0.0;      ///< max |X(t2) - X(t1)| / ∫|μ| over pairs with t2 >= t1 + gap
  int pairs = 0;
  int zero_integral_moves = 0;  ///< pairs with ∫|μ| = 0 but X moved (bound cannot hold)
  double max_displacement = 0.0;
};

/// Trapezoidal ∫|μ| between samples; pairs with t2 >= t1 + gap.
DriftBoundReport drift_bound_monitor(const std::vector<TrackState>& track, const std::vector<FunctionalRecord>& records,
                              double gap = 1.0);

}  // namespace nls
