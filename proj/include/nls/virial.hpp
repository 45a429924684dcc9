#pragma once

#include <array>
#include <limits>
#include <vector>

#include "nls/field.hpp"
#include "nls/functionals.hpp"

namespace nls {

/// Radial cutoff φ with φ(r) = r² on [0,1], φ = 0 on [3,∞), φ ≥ 0, φ'' ≤ 2.
///
/// φ'' is piecewise quintic in s = (r-1)/2 on [1,3]: a smoothstep drop from 2
/// to -A on [0,a], a rise from -A to B on [a,c], a plateau B on [c,e] and a
/// smoothstep decay to 0 on [e,1]. A and B are fixed by φ'(3) = φ(3) = 0.
/// Every join has matching φ'' and its first two derivatives, so φ is C⁴.
class CutoffProfile {
 public:
  struct Shape {
    double a = 0.2;
    double c = 0.4;
    double e = 0.9;
  };

  /// Derivative of order 0..4 at radius r >= 0, evaluated analytically.
  double eval(double r, int order) const;
  std::array<double, 5> eval_all(double r) const;
  /// One-sided limits of φ..φ'''' at r (from above when `above`).
  std::array<double, 5> limit(double r, bool above) const;
  /// Knots in r: 1, the interior joins, 3.
  std::vector<double> knots() const;

  const Shape& shape() const { return shape_; }
  double dip() const { return A_; }      ///< -min φ''
  double plateau() const { return B_; }  ///< φ'' on the plateau

  /// Tabulated mesh on [0, 3 + margin] and samples of φ..φ''''.
  const std::vector<double>& mesh() const { return mesh_; }
  const std::vector<double>& samples(int order) const { return tab_[order]; }

 private:
  friend CutoffProfile build_cutoff(int, double, const CutoffProfile::Shape&);

  struct Segment {
    double s0 = 0.0, w = 0.0;
    /// φ'' in powers of t = s - s0, or of τ = s0 + w - s when from_right.
    std::array<double, 6> psi{};
    bool from_right = false;  ///< integrate from s = 1 instead of s = 0
    double I1 = 0.0, I2 = 0.0;  ///< anchored antiderivatives at the segment's anchor end
  };

  Shape shape_;
  double A_ = 0.0, B_ = 0.0;
  std::vector<Segment> segs_;
  std::vector<double> mesh_;
  std::array<std::vector<double>, 5> tab_;
};

/// Outcome of the invariant checks on a cutoff.
struct CutoffReport {
  double max_inner_error = 0.0;   ///< max |φ - r²| and derivative errors on [0,1]
  double max_outer_value = 0.0;   ///< max |φ^(k)| on [3, 3 + margin]
  double min_phi = 0.0;
  double max_phi2 = 0.0;          ///< sup φ''
  std::array<double, 5> jump_at_1{};  ///< one-sided limit differences of φ^(k) at r = 1
  std::array<double, 5> jump_at_3{};
  double max_internal_jump = 0.0;     ///< same, over the interior knots of (1, 3)
  std::array<double, 5> refined_jump_at_1{};  ///< |φ^(k)(1+δ) - φ^(k)(1-δ)| at the finest δ
  std::array<double, 5> refined_jump_at_3{};
  double self_consistency = 0.0;  ///< |φ(3)| from Gauss quadrature of (3 - r)φ''
  bool ok = false;
};

/// Builds and validates the cutoff. Throws ConstructionFailed on violation.
CutoffProfile build_cutoff(int mesh_points = 8001, double margin = 0.5,
                           const CutoffProfile::Shape& shape = {});
CutoffReport check_cutoff(const CutoffProfile& phi, double margin = 0.5);

/// φ_R(x) = R² φ(|x|/R) and its derived radial fields sampled on a grid.
class VirialProbe {
 public:
  /// Requires 3R <= L so the support does not wrap around the periodic box.
  VirialProbe(double R, int d, const GridSpec& grid, const CutoffProfile& cutoff);

  double R() const { return R_; }
  int d() const { return d_; }
  const GridSpec& grid() const { return grid_; }

  std::span<const double> phi() const { return phi_; }
  /// φ_R'(|x|) / |x|: the isotropic Hessian part, equal to 2 inside R.
  std::span<const double> dr_over_r() const { return dr_over_r_; }
  /// ∂_r² φ_R.
  std::span<const double> dr2() const { return dr2_; }
  std::span<const double> laplacian() const { return lap_; }
  std::span<const double> bilaplacian() const { return bilap_; }
  /// 1 where |x| >= R.
  std::span<const unsigned char> outside() const { return outside_; }

 private:
  double R_;
  int d_;
  GridSpec grid_;
  std::vector<double> phi_, dr_over_r_, dr2_, lap_, bilap_;
  std::vector<unsigned char> outside_;
};

/// ∫ φ_R |u|².
double J(const Field& u, const VirialProbe& probe);
/// 2 Im ∫ ∇φ_R · ∇u ū.
double Jprime(const Field& u, const VirialProbe& probe);

/// Tail error J_R'' - 8K from the full Hessian of φ_R:
/// ∫ 4(∂_r²φ_R - φ_R'/r)|∂_r u|² + 4(φ_R'/r - 2)|∇u|²
///   + 2(p-1)/(p+1) ∫ (2d - Δφ_R)|u|^{p+1} - ∫ Δ²φ_R |u|², all over |x| >= R.
/// For d = 1 the first integral reduces to ∫ (4∂_r²φ_R - 8)|∇u|².
double A(const Field& u, const VirialProbe& probe);

/// The three-term expression as commonly printed: ∫|∇u|²(4∂_r²φ_R - 8)
/// + 2(p-1)/(p+1)∫|u|^{p+1}(2d - Δφ_R) + ∫|u|²Δ²φ_R over |x| >= R.
double A_as_printed(const Field& u, const VirialProbe& probe);

/// Default probe radii {L/8, L/4, 5L/16}; all satisfy 3R < L.
std::vector<double> default_probe_radii(const GridSpec& grid);

struct TailRatioRow {
  double t = 0.0;
  double R = 0.0;
  double R_minus_X = 0.0;  ///< R - |X(t)|
  double absA = 0.0;
  double absMu = 0.0;
  double ratio = 0.0;      ///< |A| / |μ|, +inf when μ vanishes
  bool degenerate = false; ///< μ vanished; excluded from fits
  bool violation = false;  ///< ratio larger than at the next smaller R of the same sample
};

inline constexpr double kDegenerateRatio = std::numeric_limits<double>::infinity();

/// Rows of one sample from precomputed A values; radii must be ascending.
std::vector<TailRatioRow> tail_ratio_rows(double t, double mu, double grad_sq, double x_norm,
                                     std::span<const double> radii, std::span<const double> a_values,
                                     double rel_tol = 1e-9);

/// Ratio table |A_R| / |μ| over samples and radii. `centers` holds X(t) per
/// sample (may be empty, meaning the origin).
std::vector<TailRatioRow> tail_ratio_monitor(const std::vector<Field>& states,
                                        const std::vector<FunctionalRecord>& records,
                                        const std::vector<std::vector<double>>& centers,
                                        const std::vector<VirialProbe>& probes,
                                        double rel_tol = 1e-9);

}  // namespace nls
