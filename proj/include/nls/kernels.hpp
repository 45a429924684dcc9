#pragma once

// Pointwise and reduction kernels used by the time stepper and the
// diagnostics. Each kernel has a serial reference in `serial::` and an
// OpenMP version in `parallel::`. Reductions share one fixed blocking
// (kBlock elements, pairwise inside and across blocks) so both versions
// return bit-identical sums for any thread count.

#include <complex>
#include <cstddef>
#include <span>

namespace nls::kernels {

using cplx = std::complex<double>;

inline constexpr std::size_t kBlock = 1024;

/// Pairwise (cascade) sum of a contiguous run.
double pairwise_sum(std::span<const double> v);

namespace serial {

/// u <- u * exp(i * coeff * |u|^{power}).
void nonlinear_phase(std::span<cplx> u, double coeff, double power);
/// u <- u * m pointwise.
void multiply(std::span<cplx> u, std::span<const cplx> m);
/// u <- u * s.
void scale(std::span<cplx> u, double s);
/// m_j = exp(-i * dt * k2_j).
void free_propagator(std::span<cplx> m, std::span<const double> k2, double dt);

double sum_abs2(std::span<const cplx> u);
double sum_abs_pow(std::span<const cplx> u, double q);
double sum_weighted_abs2(std::span<const cplx> u, std::span<const double> w);
double max_abs(std::span<const cplx> u);

}  // namespace serial

namespace parallel {

void nonlinear_phase(std::span<cplx> u, double coeff, double power);
void multiply(std::span<cplx> u, std::span<const cplx> m);
void scale(std::span<cplx> u, double s);
void free_propagator(std::span<cplx> m, std::span<const double> k2, double dt);

double sum_abs2(std::span<const cplx> u);
double sum_abs_pow(std::span<const cplx> u, double q);
double sum_weighted_abs2(std::span<const cplx> u, std::span<const double> w);
double max_abs(std::span<const cplx> u);

}  // namespace parallel

/// Generic blocked reduction: sum of f(i) for i in [0, n), same blocking as
/// the named kernels. f must be callable concurrently.
template <class F>
double reduce(std::size_t n, F&& f);

}  // namespace nls::kernels

#include "nls/kernels_impl.hpp"
