#pragma once

#include <string>
#include <vector>

#include "nls/field.hpp"

namespace nls {

enum class GroundStateMethod { ClosedForm, Petviashvili, Shooting };
std::string to_string(GroundStateMethod m);

/// A posteriori checks performed before a GroundState is handed out.
struct Certificate {
  double residual = 0.0;          ///< ||-ΔQ + Q - Q^p||_2 / ||Q||_2
  double pohozaev_grad = 0.0;     ///< rel. error of Lp1 = 2(p+1)/(d(p-1)) ||∇Q||^2
  double pohozaev_mass = 0.0;     ///< rel. error of Lp1 = 2(p+1)/(2(p+1)-d(p-1)) ||Q||^2
  double virial = 0.0;            ///< |K(Q)| / ||∇Q||^2
  double energy_formula = 0.0;    ///< rel. error of E(Q) = (d(p-1)-4)/(2d(p-1)) ||∇Q||^2
  double symmetry = 0.0;          ///< max deviation under axis reflections/permutations
  double boundary = 0.0;          ///< max |Q| on the boundary faces
  double min_interior = 0.0;      ///< min Q over |x|_inf <= L/2
  int iterations = 0;
  double last_gamma = 1.0;
};

/// Thresholds enforced by certify(). Defaults follow the module contract;
/// `boundary` is grid dependent (see default_boundary_tolerance).
struct CertificationTolerances {
  double residual = 1e-7;
  double pohozaev = 1e-6;
  double virial = 1e-6;
  double symmetry = 1e-8;
  double boundary = 1e-10;
};

/// Positive radial solution of -ΔQ + Q - Q^p = 0 with its certified norms.
struct GroundState {
  Field profile;            ///< real-valued, centered at the origin
  double mass = 0.0;        ///< ||Q||_2^2
  double grad_sq = 0.0;     ///< ||∇Q||_2^2
  double lp1 = 0.0;         ///< ||Q||_{p+1}^{p+1}
  double variance = 0.0;    ///< || |x| Q ||_2^2
  GroundStateMethod method = GroundStateMethod::ClosedForm;
  Certificate certificate;

  const PhysParams& params() const { return profile.params; }
  const GridSpec& grid() const { return profile.grid; }
  double energy() const;

  /// b^{d/2}-free samples Q(b x) on `grid` (same dimension). Exact for the
  /// closed form, band-limited interpolation otherwise.
  Field sample_scaled(const GridSpec& grid, double b) const;
};

/// Recommended grid per dimension: boundary decay and Pohozaev accuracy both
/// hold at these sizes.
GridSpec default_ground_state_grid(int d);
CertificationTolerances default_tolerances(int d, const GridSpec& grid);

/// Closed-form 1-D soliton ((p+1)/2)^{1/(p-1)} sech^{2/(p-1)}((p-1)x/2).
double closed_form_profile(double p, double x);

GroundState solve_1d_closed_form(const PhysParams& params, const GridSpec& grid);
GroundState solve_1d_closed_form(const PhysParams& params, const GridSpec& grid,
                                 const CertificationTolerances& tol);

struct PetviashviliOptions {
  double tol = 1e-12;
  int max_iter = 500;
  double seed_amplitude = 2.0;  ///< rescaled before the first iteration
  double seed_width = 1.0;
  const Field* seed = nullptr;  ///< overrides the Gaussian seed when set
};

GroundState solve_petviashvili(const PhysParams& params, const GridSpec& grid,
                               const PetviashviliOptions& opts = {});
GroundState solve_petviashvili(const PhysParams& params, const GridSpec& grid,
                               const PetviashviliOptions& opts, const CertificationTolerances& tol);

/// Computes the certificate and throws if any tolerance is exceeded.
Certificate certify(GroundState& gs, const CertificationTolerances& tol);
/// Certificate without enforcement.
Certificate evaluate_certificate(const GroundState& gs);

/// Radial profile from the shooting oracle.
struct RadialProfile {
  int d = 1;
  double p = 3.0;
  double q0 = 0.0;              ///< Q(0)
  double dr = 0.0;
  std::vector<double> r, q, dq; ///< samples; q is zero past `r_cut`
  double r_cut = 0.0;           ///< radius where the trajectory was truncated
  double mass = 0.0, grad_sq = 0.0, lp1 = 0.0, variance = 0.0;
};

/// Bisection on Q(0) in [1, 10] for Q'' + (d-1)/r Q' - Q + Q^p = 0, Q'(0) = 0,
/// with RK4 integration out to r_max. Norms use surface-measure weights.
RadialProfile shooting_oracle(const PhysParams& params, double r_max, double dr = 1e-3);

}  // namespace nls
