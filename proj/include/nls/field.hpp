#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "nls/params.hpp"

namespace nls {

using cplx = std::complex<double>;

/// Precomputed geometry shared by all fields on one (d, L, n) grid:
/// physical coordinates, periodic wavenumbers and the flattened |x|^2, |k|^2
/// tables. Storage is row-major with the last axis fastest.
class Lattice {
 public:
  Lattice(int d, const GridSpec& grid);

  int d() const { return d_; }
  int n() const { return grid_.n; }
  double L() const { return grid_.L; }
  double h() const { return grid_.spacing(); }
  const GridSpec& grid() const { return grid_; }
  std::size_t size() const { return size_; }
  /// h^d, the quadrature weight of every node.
  double cell_volume() const { return cell_; }

  /// Node coordinates -L + j h, j = 0..n-1.
  const std::vector<double>& x() const { return x_; }
  /// Full periodic wavenumbers (Nyquist kept, negative sign).
  const std::vector<double>& k() const { return k_; }
  /// Wavenumbers for odd derivatives: Nyquist mode zeroed.
  const std::vector<double>& k_odd() const { return k_odd_; }
  std::span<const double> k2() const { return k2_; }
  std::span<const double> r2() const { return r2_; }

  /// Multi-index of the flat offset `idx`, axis 0 first.
  void unravel(std::size_t idx, int* out) const;
  std::size_t stride(int axis) const { return strides_[axis]; }

  /// Shared instance for (d, grid); cached process-wide.
  static std::shared_ptr<const Lattice> get(int d, const GridSpec& grid);

 private:
  int d_;
  GridSpec grid_;
  std::size_t size_;
  double cell_;
  std::size_t strides_[3] = {1, 1, 1};
  std::vector<double> x_, k_, k_odd_, k2_, r2_;
};

/// State u(t, .) sampled on a periodic grid. Values are row-major complex
/// doubles (real/imag interleaved), size n^d.
struct Field {
  PhysParams params;
  GridSpec grid;
  std::vector<cplx> values;
  double t = 0.0;

  Field() = default;
  Field(const PhysParams& params, const GridSpec& grid, double t = 0.0);

  int d() const { return params.d; }
  std::size_t size() const { return values.size(); }
  std::shared_ptr<const Lattice> lattice() const { return Lattice::get(params.d, grid); }

  bool same_grid(const Field& other) const {
    return params == other.params && grid == other.grid;
  }
  bool all_finite() const;
};

/// Throws GridMismatch unless a and b share params and grid.
void require_same_grid(const Field& a, const Field& b, const char* where);

}  // namespace nls
