#include <algorithm>
#include <cmath>
#include <numbers>

#include "nls/core.hpp"
#include "nls/error.hpp"
#include "nls/fft.hpp"
#include "nls/kernels.hpp"

namespace nls {

namespace kp = kernels::parallel;

std::vector<cplx> to_spectral(const Field& f) {
  std::vector<cplx> out(f.size());
  Fft::get(f.d(), f.grid.n).forward(f.values, out);
  return out;
}

Field from_spectral(const Field& like, std::span<const cplx> coeffs) {
  Field out(like.params, like.grid, like.t);
  Fft::get(like.d(), like.grid.n).inverse(coeffs, out.values);
  return out;
}

std::vector<Field> gradient(const Field& f) {
  const auto lat = f.lattice();
  const auto fh = to_spectral(f);
  std::vector<Field> out;
  std::vector<cplx> work(fh.size());
  int idx[3];
  for (int a = 0; a < f.d(); ++a) {
    const auto& k = lat->k_odd();
    for (std::size_t i = 0; i < fh.size(); ++i) {
      lat->unravel(i, idx);
      work[i] = cplx(0.0, k[idx[a]]) * fh[i];
    }
    out.push_back(from_spectral(f, work));
  }
  return out;
}

Field laplacian(const Field& f) {
  const auto lat = f.lattice();
  auto fh = to_spectral(f);
  const auto k2 = lat->k2();
  for (std::size_t i = 0; i < fh.size(); ++i) fh[i] *= -k2[i];
  return from_spectral(f, fh);
}

double integrate(std::span<const double> values, int d, const GridSpec& grid) {
  return std::pow(grid.spacing(), d) *
         kernels::reduce(values.size(), [&](std::size_t i) { return values[i]; });
}

double grad_norm_sq_spectral(const Lattice& lat, std::span<const cplx> coeffs) {
  // Odd-derivative wavenumbers so this equals ∫|∇f|^2 of gradient() exactly.
  const int d = lat.d();
  const auto& k = lat.k_odd();
  const double s = lat.cell_volume() / static_cast<double>(lat.size());
  return s * kernels::reduce(coeffs.size(), [&](std::size_t i) {
           int idx[3];
           lat.unravel(i, idx);
           double kk = 0.0;
           for (int a = 0; a < d; ++a) kk += k[idx[a]] * k[idx[a]];
           return kk * std::norm(coeffs[i]);
         });
}

double l2_norm_sq_spectral(const Lattice& lat, std::span<const cplx> coeffs) {
  return lat.cell_volume() / static_cast<double>(lat.size()) * kp::sum_abs2(coeffs);
}

Norms norms(const Field& f) {
  const auto lat = f.lattice();
  Norms out;
  const double w = lat->cell_volume();
  out.L2sq = w * kp::sum_abs2(f.values);
  out.gradL2sq = grad_norm_sq_spectral(*lat, to_spectral(f));
  out.Lp1 = w * kp::sum_abs_pow(f.values, f.params.p + 1.0);
  out.H1sq = out.L2sq + out.gradL2sq;
  out.weighted_variance = w * kp::sum_weighted_abs2(f.values, lat->r2());
  return out;
}

cplx inner(const Field& a, const Field& b) {
  require_same_grid(a, b, "inner");
  const double w = a.lattice()->cell_volume();
  const double re = kernels::reduce(a.size(), [&](std::size_t i) {
    return a.values[i].real() * b.values[i].real() + a.values[i].imag() * b.values[i].imag();
  });
  const double im = kernels::reduce(a.size(), [&](std::size_t i) {
    return a.values[i].real() * b.values[i].imag() - a.values[i].imag() * b.values[i].real();
  });
  return w * cplx(re, im);
}

double h1_norm(const Field& a) {
  const auto lat = a.lattice();
  const auto ah = to_spectral(a);
  return std::sqrt(l2_norm_sq_spectral(*lat, ah) + grad_norm_sq_spectral(*lat, ah));
}

double h1_distance(const Field& a, const Field& b) {
  require_same_grid(a, b, "h1_distance");
  Field diff = a;
  for (std::size_t i = 0; i < diff.size(); ++i) diff.values[i] -= b.values[i];
  return h1_norm(diff);
}

Field translate(const Field& f, std::span<const double> shift) {
  const auto lat = f.lattice();
  const int d = f.d();
  const int n = f.grid.n;
  // Per-axis multipliers exp(-i k a); the Nyquist mode gets cos(k a) so real
  // fields stay real and grid-aligned shifts are exact.
  std::vector<std::vector<cplx>> axis(d, std::vector<cplx>(n));
  for (int a = 0; a < d; ++a) {
    for (int j = 0; j < n; ++j) {
      const double arg = lat->k()[j] * shift[a];
      axis[a][j] = (j == n / 2) ? cplx(std::cos(arg), 0.0) : cplx(std::cos(arg), -std::sin(arg));
    }
  }
  auto fh = to_spectral(f);
  int idx[3];
  for (std::size_t i = 0; i < fh.size(); ++i) {
    lat->unravel(i, idx);
    cplx m = axis[0][idx[0]];
    for (int a = 1; a < d; ++a) m *= axis[a][idx[a]];
    fh[i] *= m;
  }
  return from_spectral(f, fh);
}

Field roll(const Field& f, std::span<const int> cells) {
  const auto lat = f.lattice();
  const int n = f.grid.n;
  Field out(f.params, f.grid, f.t);
  int idx[3];
  for (std::size_t i = 0; i < f.size(); ++i) {
    lat->unravel(i, idx);
    std::size_t j = 0;
    for (int a = 0; a < f.d(); ++a) {
      const int m = ((idx[a] + cells[a]) % n + n) % n;
      j += static_cast<std::size_t>(m) * lat->stride(a);
    }
    out.values[j] = f.values[i];
  }
  return out;
}

Field rotate_phase(const Field& f, double alpha) {
  Field out = f;
  const cplx e(std::cos(alpha), std::sin(alpha));
  for (auto& z : out.values) z *= e;
  return out;
}

Field conjugate(const Field& f) {
  Field out = f;
  for (auto& z : out.values) z = std::conj(z);
  return out;
}

double periodic_delta(double x, double c, double L) {
  const double period = 2.0 * L;
  double dx = std::fmod(x - c, period);
  if (dx >= L) dx -= period;
  if (dx < -L) dx += period;
  return dx;
}

std::vector<double> circular_centroid(const Field& f) {
  const auto lat = f.lattice();
  const int d = f.d();
  const double mass = kp::sum_abs2(f.values);
  if (!(mass > 0.0)) throw ZeroMass("centroid of a vanishing field");
  const double kappa = std::numbers::pi / f.grid.L;
  std::vector<double> out(d);
  for (int a = 0; a < d; ++a) {
    const double c = kernels::reduce(f.size(), [&](std::size_t i) {
      int idx[3];
      lat->unravel(i, idx);
      return std::norm(f.values[i]) * std::cos(kappa * lat->x()[idx[a]]);
    });
    const double s = kernels::reduce(f.size(), [&](std::size_t i) {
      int idx[3];
      lat->unravel(i, idx);
      return std::norm(f.values[i]) * std::sin(kappa * lat->x()[idx[a]]);
    });
    if (std::hypot(c, s) <= 1e-14 * mass) throw ZeroMass("density has no preferred position on axis " + std::to_string(a));
    out[a] = std::atan2(s, c) / kappa;
  }
  return out;
}

}  // namespace nls
