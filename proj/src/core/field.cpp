#include "nls/field.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <tuple>

#include "nls/error.hpp"

namespace nls {

PhysParams PhysParams::make(int d, double p) {
  if (d < 1 || d > 3) throw InvalidParams("dimension must be 1, 2 or 3, got " + std::to_string(d));
  if (!std::isfinite(p) || !(p > 1.0 + 4.0 / d)) {
    std::ostringstream os;
    os << "power p=" << p << " is not mass-supercritical (need p > " << 1.0 + 4.0 / d << ")";
    throw InvalidParams(os.str());
  }
  if (d == 3 && !(p < 5.0)) throw InvalidParams("power must be energy-subcritical (p < 5) in d=3");
  PhysParams out{d, p};
  const double s = out.sc();
  if (!(s > 0.0 && s < 1.0)) throw InvalidParams("critical exponent outside (0, 1)");
  return out;
}

GridSpec GridSpec::make(double L, int n) {
  if (!(L > 0.0) || !std::isfinite(L)) throw InvalidParams("grid half-width must be positive");
  if (n < 16 || (n & (n - 1)) != 0) throw InvalidParams("points per axis must be a power of two >= 16");
  return GridSpec{L, n};
}

double GridSpec::dk() const { return std::numbers::pi / L; }

std::size_t grid_size(int d, int n) {
  std::size_t s = 1;
  for (int a = 0; a < d; ++a) s *= static_cast<std::size_t>(n);
  return s;
}

Lattice::Lattice(int d, const GridSpec& grid)
    : d_(d), grid_(grid), size_(grid_size(d, grid.n)), cell_(std::pow(grid.spacing(), d)) {
  const int n = grid.n;
  const double h = grid.spacing();
  const double dk = grid.dk();
  x_.resize(n);
  k_.resize(n);
  k_odd_.resize(n);
  for (int j = 0; j < n; ++j) {
    x_[j] = -grid.L + j * h;
    const int m = j < n / 2 ? j : j - n;
    k_[j] = m * dk;
    k_odd_[j] = (j == n / 2) ? 0.0 : k_[j];
  }
  for (int a = d - 2; a >= 0; --a) strides_[a] = strides_[a + 1] * n;
  k2_.assign(size_, 0.0);
  r2_.assign(size_, 0.0);
  int idx[3] = {0, 0, 0};
  for (std::size_t i = 0; i < size_; ++i) {
    unravel(i, idx);
    double kk = 0.0, rr = 0.0;
    for (int a = 0; a < d; ++a) {
      kk += k_[idx[a]] * k_[idx[a]];
      rr += x_[idx[a]] * x_[idx[a]];
    }
    k2_[i] = kk;
    r2_[i] = rr;
  }
}

void Lattice::unravel(std::size_t idx, int* out) const {
  for (int a = 0; a < d_; ++a) {
    out[a] = static_cast<int>(idx / strides_[a]);
    idx %= strides_[a];
  }
}

std::shared_ptr<const Lattice> Lattice::get(int d, const GridSpec& grid) {
  static std::mutex mu;
  static std::map<std::tuple<int, double, int>, std::shared_ptr<const Lattice>> cache;
  std::lock_guard lock(mu);
  auto key = std::make_tuple(d, grid.L, grid.n);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto lat = std::make_shared<const Lattice>(d, grid);
  cache.emplace(key, lat);
  return lat;
}

Field::Field(const PhysParams& params_, const GridSpec& grid_, double t_)
    : params(params_), grid(grid_), values(grid_size(params_.d, grid_.n)), t(t_) {}

bool Field::all_finite() const {
  for (const auto& v : values)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

void require_same_grid(const Field& a, const Field& b, const char* where) {
  if (!a.same_grid(b)) throw GridMismatch(std::string(where) + ": fields live on different grids or params");
}

}  // namespace nls
