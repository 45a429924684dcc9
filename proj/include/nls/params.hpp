#pragma once

#include <cstddef>

namespace nls {

/// Dimension and power of the focusing equation i u_t + Δu + |u|^{p-1} u = 0.
///
/// Construct through make(): the power must lie strictly inside the
/// mass-supercritical, energy-subcritical window 1 + 4/d < p < (d+2)/(d-2).
struct PhysParams {
  int d = 1;
  double p = 3.0;

  static PhysParams make(int d, double p);

  /// Critical Sobolev exponent d/2 - 2/(p-1).
  double sc() const { return 0.5 * d - 2.0 / (p - 1.0); }

  /// d(p-1)/2, the scaling exponent of the potential energy.
  double alpha() const { return 0.5 * d * (p - 1.0); }

  bool operator==(const PhysParams&) const = default;
};

/// Isotropic periodic grid on [-L, L)^d with n points per axis.
struct GridSpec {
  double L = 16.0;
  int n = 256;

  static GridSpec make(double L, int n);

  double spacing() const { return 2.0 * L / n; }
  /// Fundamental wavenumber pi / L.
  double dk() const;

  bool operator==(const GridSpec&) const = default;
};

std::size_t grid_size(int d, int n);

}  // namespace nls
