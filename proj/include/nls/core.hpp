#pragma once

// Spectral calculus, quadrature and norms on the periodic grid.

#include <array>
#include <span>
#include <vector>

#include "nls/field.hpp"

namespace nls {

/// Norms of a field; all integrals are rectangle-rule sums times h^d.
struct Norms {
  double L2sq = 0.0;              ///< ||f||_2^2
  double gradL2sq = 0.0;          ///< ||∇f||_2^2, evaluated spectrally
  double Lp1 = 0.0;               ///< ||f||_{p+1}^{p+1}
  double H1sq = 0.0;              ///< L2sq + gradL2sq
  double weighted_variance = 0.0; ///< ∫|x|^2 |f|^2, x measured from the grid origin
};

/// Forward transform of the field values.
std::vector<cplx> to_spectral(const Field& f);
/// Field with the given spectral coefficients (inverse transform).
Field from_spectral(const Field& like, std::span<const cplx> coeffs);

/// Spectral partial derivatives, one Field per axis.
std::vector<Field> gradient(const Field& f);
/// Spectral Laplacian.
Field laplacian(const Field& f);

/// h^d times the pairwise sum of the samples.
double integrate(std::span<const double> values, int d, const GridSpec& grid);

Norms norms(const Field& f);

/// ||∇f||^2 from spectral coefficients of f.
double grad_norm_sq_spectral(const Lattice& lat, std::span<const cplx> coeffs);
/// ||f||^2 from spectral coefficients (Parseval).
double l2_norm_sq_spectral(const Lattice& lat, std::span<const cplx> coeffs);

/// ∫ conj(a) b dx.
cplx inner(const Field& a, const Field& b);
/// ||a - b||_{H^1}.
double h1_distance(const Field& a, const Field& b);
double h1_norm(const Field& a);

/// Translate by an arbitrary vector: result(x) = f(x - shift). Exact for
/// band-limited periodic fields.
Field translate(const Field& f, std::span<const double> shift);
/// Circular shift by whole grid cells along each axis: result(x) = f(x - m h).
Field roll(const Field& f, std::span<const int> cells);

/// Multiply the field by exp(i alpha).
Field rotate_phase(const Field& f, double alpha);
Field conjugate(const Field& f);

/// Minimum-image displacement x - c on the periodic domain, one axis.
double periodic_delta(double x, double c, double L);

/// Centroid of |f|^2 per axis via the phase of the first Fourier mode of the
/// marginal density. Throws ZeroMass when the field vanishes.
std::vector<double> circular_centroid(const Field& f);

}  // namespace nls
