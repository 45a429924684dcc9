#include "nls/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace nls::kernels {

double pairwise_sum(std::span<const double> v) {
  const std::size_t n = v.size();
  if (n <= 16) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

namespace {

inline cplx phase_factor(const cplx& z, double coeff, double power) {
  const double a = std::abs(z);
  const double theta = coeff * (power == 2.0 ? a * a : std::pow(a, power));
  return cplx(std::cos(theta), std::sin(theta));
}

inline double abs_pow(const cplx& z, double q) {
  const double a2 = std::norm(z);
  return std::pow(a2, 0.5 * q);
}

}  // namespace

namespace serial {

void nonlinear_phase(std::span<cplx> u, double coeff, double power) {
  for (auto& z : u) z *= phase_factor(z, coeff, power);
}

void multiply(std::span<cplx> u, std::span<const cplx> m) {
  for (std::size_t i = 0; i < u.size(); ++i) u[i] *= m[i];
}

void scale(std::span<cplx> u, double s) {
  for (auto& z : u) z *= s;
}

void free_propagator(std::span<cplx> m, std::span<const double> k2, double dt) {
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = cplx(std::cos(dt * k2[i]), -std::sin(dt * k2[i]));
}

double sum_abs2(std::span<const cplx> u) {
  return detail::blocked_reduce(u.size(), [&](std::size_t i) { return std::norm(u[i]); }, false);
}

double sum_abs_pow(std::span<const cplx> u, double q) {
  return detail::blocked_reduce(u.size(), [&](std::size_t i) { return abs_pow(u[i], q); }, false);
}

double sum_weighted_abs2(std::span<const cplx> u, std::span<const double> w) {
  return detail::blocked_reduce(u.size(), [&](std::size_t i) { return w[i] * std::norm(u[i]); }, false);
}

double max_abs(std::span<const cplx> u) {
  double m = 0.0;
  for (const auto& z : u) m = std::max(m, std::abs(z));
  return m;
}

}  // namespace serial

namespace parallel {

void nonlinear_phase(std::span<cplx> u, double coeff, double power) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(u.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) u[i] *= phase_factor(u[i], coeff, power);
}

void multiply(std::span<cplx> u, std::span<const cplx> m) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(u.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) u[i] *= m[i];
}

void scale(std::span<cplx> u, double s) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(u.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) u[i] *= s;
}

void free_propagator(std::span<cplx> m, std::span<const double> k2, double dt) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(m.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) m[i] = cplx(std::cos(dt * k2[i]), -std::sin(dt * k2[i]));
}

double sum_abs2(std::span<const cplx> u) {
  return reduce(u.size(), [&](std::size_t i) { return std::norm(u[i]); });
}

double sum_abs_pow(std::span<const cplx> u, double q) {
  return reduce(u.size(), [&](std::size_t i) { return abs_pow(u[i], q); });
}

double sum_weighted_abs2(std::span<const cplx> u, std::span<const double> w) {
  return reduce(u.size(), [&](std::size_t i) { return w[i] * std::norm(u[i]); });
}

double max_abs(std::span<const cplx> u) {
  double m = 0.0;
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(u.size());
#pragma omp parallel for reduction(max : m) schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) m = std::max(m, std::abs(u[i]));
  return m;
}

}  // namespace parallel

}  // namespace nls::kernels
