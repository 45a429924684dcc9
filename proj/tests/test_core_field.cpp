#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "nls/core.hpp"
#include "nls/error.hpp"
#include "nls/kernels.hpp"

using namespace nls;

namespace {

const PhysParams kP1 = PhysParams::make(1, 7.0);

Field sample_1d(const GridSpec& g, auto&& fn) {
  Field f(kP1, g);
  const auto lat = f.lattice();
  for (int j = 0; j < g.n; ++j) f.values[j] = fn(lat->x()[j]);
  return f;
}

double max_err(const Field& a, auto&& fn) {
  const auto lat = a.lattice();
  double e = 0.0;
  for (int j = 0; j < a.grid.n; ++j) e = std::max(e, std::abs(a.values[j] - cplx(fn(lat->x()[j]))));
  return e;
}

}  // namespace

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(PhysParams::make(1, 5.0), InvalidParams);  // mass critical
  CHECK_THROWS_AS(PhysParams::make(3, 5.0), InvalidParams);  // energy critical
  CHECK_THROWS_AS(PhysParams::make(4, 3.0), InvalidParams);
  CHECK_NOTHROW(PhysParams::make(2, 5.0));
  CHECK_THROWS_AS(GridSpec::make(16.0, 100), InvalidParams);
  CHECK_THROWS_AS(GridSpec::make(-1.0, 128), InvalidParams);
  CHECK(PhysParams::make(3, 3.0).sc() == doctest::Approx(0.5));
}

TEST_CASE("gradient of a constant vanishes") {
  const auto g = GridSpec::make(16.0, 128);
  const Field f = sample_1d(g, [](double) { return 2.5; });
  CHECK(max_err(gradient(f)[0], [](double) { return 0.0; }) < 1e-14);
}

TEST_CASE("Fourier mode is an eigenfunction of the derivative") {
  const auto g = GridSpec::make(16.0, 256);
  const double k0 = 7 * g.dk();
  const Field f = sample_1d(g, [&](double x) { return std::exp(cplx(0, k0 * x)); });
  const Field df = gradient(f)[0];
  const auto lat = f.lattice();
  double e = 0.0;
  for (int j = 0; j < g.n; ++j) e = std::max(e, std::abs(df.values[j] - cplx(0, k0) * f.values[j]));
  CHECK(e < 1e-12);
}

TEST_CASE("Gaussian derivative") {
  const auto g = GridSpec::make(16.0, 256);
  const Field f = sample_1d(g, [](double x) { return std::exp(-x * x); });
  CHECK(max_err(gradient(f)[0], [](double x) { return -2 * x * std::exp(-x * x); }) < 1e-10);
  CHECK(max_err(laplacian(f), [](double x) { return (4 * x * x - 2) * std::exp(-x * x); }) < 1e-10);
}

TEST_CASE("2-D gradient acts per axis") {
  const auto P2 = PhysParams::make(2, 5.0);
  const auto g = GridSpec::make(12.0, 128);
  Field f(P2, g);
  const auto lat = f.lattice();
  int idx[3];
  for (std::size_t i = 0; i < f.size(); ++i) {
    lat->unravel(i, idx);
    const double x = lat->x()[idx[0]], y = lat->x()[idx[1]];
    f.values[i] = std::exp(-x * x - 2 * y * y);
  }
  const auto gr = gradient(f);
  double e = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    lat->unravel(i, idx);
    const double x = lat->x()[idx[0]], y = lat->x()[idx[1]];
    e = std::max(e, std::abs(gr[0].values[i] - cplx(-2 * x * std::exp(-x * x - 2 * y * y))));
    e = std::max(e, std::abs(gr[1].values[i] - cplx(-4 * y * std::exp(-x * x - 2 * y * y))));
  }
  CHECK(e < 1e-10);
}

TEST_CASE("integrate") {
  const auto g = GridSpec::make(16.0, 256);
  const auto lat = Lattice::get(1, g);
  std::vector<double> v(g.n, 0.0);
  CHECK(integrate(v, 1, g) == 0.0);
  for (int j = 0; j < g.n; ++j) v[j] = std::exp(-lat->x()[j] * lat->x()[j]);
  CHECK(std::abs(integrate(v, 1, g) - std::sqrt(std::numbers::pi)) < 1e-12);

  // Smooth plateau on [-3, 3] with tanh edges, against adaptive quadrature.
  auto bump = [](double x) { return 0.5 * (std::tanh((x + 3.0) / 0.4) - std::tanh((x - 3.0) / 0.4)); };
  for (int j = 0; j < g.n; ++j) v[j] = bump(lat->x()[j]);
  const double oracle = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(bump, -16.0, 16.0, 15, 1e-14);
  CHECK(std::abs(integrate(v, 1, g) - oracle) < 1e-8);
}

TEST_CASE("norms") {
  const auto g = GridSpec::make(16.0, 256);
  const Norms z = norms(Field(kP1, g));
  CHECK(z.L2sq == 0.0);
  CHECK(z.gradL2sq == 0.0);
  CHECK(z.Lp1 == 0.0);
  CHECK(z.weighted_variance == 0.0);

  const Field f = sample_1d(g, [](double x) { return std::exp(-x * x / 2); });
  const Norms n = norms(f);
  const double sp = std::sqrt(std::numbers::pi);
  CHECK(std::abs(n.L2sq - sp) < 1e-10);
  CHECK(std::abs(n.weighted_variance - sp / 2) < 1e-10);
  CHECK(std::abs(n.gradL2sq - sp / 2) < 1e-10);
  CHECK(n.H1sq == doctest::Approx(n.L2sq + n.gradL2sq));
}

TEST_CASE("Pohozaev ratios of the 1-D soliton") {
  const auto g = GridSpec::make(32.0, 1024);
  const double p = 7.0;
  const double amp = std::pow(0.5 * (p + 1), 1 / (p - 1));
  const Field Q = sample_1d(g, [&](double x) { return amp * std::pow(1 / std::cosh(0.5 * (p - 1) * x), 2 / (p - 1)); });
  const Norms n = norms(Q);
  const double d = 1;
  CHECK(std::abs(n.Lp1 / (2 * (p + 1) / (d * (p - 1)) * n.gradL2sq) - 1) < 1e-8);
  CHECK(std::abs(n.Lp1 / (2 * (p + 1) / (2 * (p + 1) - d * (p - 1)) * n.L2sq) - 1) < 1e-8);
}

TEST_CASE("translation, roll and phase") {
  const auto g = GridSpec::make(16.0, 256);
  const Field f = sample_1d(g, [](double x) { return std::exp(-x * x); });
  const double s = 1.37;
  CHECK(max_err(translate(f, std::vector{s}), [&](double x) { return std::exp(-(x - s) * (x - s)); }) < 1e-10);
  const double h = g.spacing();
  CHECK(max_err(roll(f, std::vector{3}), [&](double x) { return std::exp(-(x - 3 * h) * (x - 3 * h)); }) < 1e-14);
  const Field r = rotate_phase(f, 0.7);
  CHECK(std::arg(r.values[g.n / 2]) == doctest::Approx(0.7));
  CHECK(std::abs(inner(f, r) - std::polar(norms(f).L2sq, 0.7)) < 1e-12);
  CHECK(h1_distance(conjugate(r), rotate_phase(f, -0.7)) < 1e-13);
}

TEST_CASE("circular centroid and periodic delta") {
  const auto g = GridSpec::make(16.0, 256);
  const Field f = sample_1d(g, [](double x) { return std::exp(-(x - 2.0) * (x - 2.0)); });
  CHECK(circular_centroid(f)[0] == doctest::Approx(2.0).epsilon(1e-6));
  CHECK_THROWS_AS(circular_centroid(Field(kP1, g)), ZeroMass);
  CHECK(periodic_delta(15.0, -15.0, 16.0) == doctest::Approx(-2.0));
  CHECK(periodic_delta(1.0, 0.5, 16.0) == doctest::Approx(0.5));
}

TEST_CASE("grid mismatch is rejected") {
  const Field a(kP1, GridSpec::make(16.0, 128));
  const Field b(kP1, GridSpec::make(16.0, 256));
  CHECK_THROWS_AS(inner(a, b), GridMismatch);
  CHECK_THROWS_AS(h1_distance(a, b), GridMismatch);
}

TEST_CASE("serial and parallel kernels agree bitwise") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  std::vector<cplx> u(50'000);
  for (auto& z : u) z = {nd(rng), nd(rng)};
  std::vector<double> w(u.size());
  for (auto& x : w) x = std::abs(nd(rng));
  namespace ks = kernels::serial;
  namespace kp = kernels::parallel;
  CHECK(ks::sum_abs2(u) == kp::sum_abs2(u));
  CHECK(ks::sum_abs_pow(u, 8.0) == kp::sum_abs_pow(u, 8.0));
  CHECK(ks::sum_weighted_abs2(u, w) == kp::sum_weighted_abs2(u, w));
  CHECK(ks::max_abs(u) == kp::max_abs(u));
  auto a = u, b = u;
  ks::nonlinear_phase(a, 0.01, 6.0);
  kp::nonlinear_phase(b, 0.01, 6.0);
  CHECK(a == b);
  std::vector<cplx> ma(u.size()), mb(u.size());
  ks::free_propagator(ma, w, 1e-3);
  kp::free_propagator(mb, w, 1e-3);
  CHECK(ma == mb);
}
