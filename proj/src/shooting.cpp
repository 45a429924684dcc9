#include <array>
#include <cmath>
#include <numbers>

#include "nls/error.hpp"
#include "nls/ground_state.hpp"

namespace nls {

namespace {

struct Ode {
  int d;
  double p;
  std::array<double, 2> rhs(double r, const std::array<double, 2>& y) const {
    const double q = y[0], dq = y[1];
    const double damping = d > 1 ? (d - 1) / r * dq : 0.0;
    return {dq, -damping + q - std::pow(std::abs(q), p - 1.0) * q};
  }
  std::array<double, 2> rk4(double r, const std::array<double, 2>& y, double h) const {
    auto add = [](const std::array<double, 2>& a, const std::array<double, 2>& b, double s) {
      return std::array<double, 2>{a[0] + s * b[0], a[1] + s * b[1]};
    };
    const auto k1 = rhs(r, y);
    const auto k2 = rhs(r + 0.5 * h, add(y, k1, 0.5 * h));
    const auto k3 = rhs(r + 0.5 * h, add(y, k2, 0.5 * h));
    const auto k4 = rhs(r + h, add(y, k3, h));
    return {y[0] + h / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
            y[1] + h / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])};
  }
  // Taylor start at r = h: Q = q0 + c r^2 / 2 with c = (q0 - q0^p)/d.
  std::array<double, 2> start(double q0, double h) const {
    const double c = (q0 - std::pow(q0, p)) / d;
    return {q0 + 0.5 * c * h * h, c * h};
  }
};

// +1: trajectory crosses zero (Q(0) too large); -1: turns back up or never
// decays (too small). Stops at the first event; `samples` gets the path.
int classify(const Ode& ode, double q0, double r_max, double h, std::vector<std::array<double, 2>>* samples) {
  const int steps = static_cast<int>(std::ceil(r_max / h));
  if (samples) {
    samples->clear();
    samples->push_back({q0, 0.0});
  }
  auto y = ode.start(q0, h);
  for (int i = 1; i <= steps; ++i) {
    if (samples) samples->push_back(y);
    if (y[0] < 0.0) return +1;
    if (y[1] > 0.0) return -1;
    y = ode.rk4(i * h, y, h);
  }
  return -1;
}

double simpson(const std::vector<double>& f, double h) {
  std::size_t m = f.size() - 1;
  if (m % 2 == 1) --m;
  double s = f[0] + f[m];
  for (std::size_t i = 1; i < m; ++i) s += (i % 2 ? 4.0 : 2.0) * f[i];
  return s * h / 3.0;
}

}  // namespace

RadialProfile shooting_oracle(const PhysParams& params, double r_max, double dr) {
  const Ode ode{params.d, params.p};
  double lo = 1.0, hi = 10.0;
  if (classify(ode, lo, r_max, dr, nullptr) != -1 || classify(ode, hi, r_max, dr, nullptr) != +1)
    throw BracketError("no sign change of the shooting target for Q(0) in [1, 10]");
  while (hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (classify(ode, mid, r_max, dr, nullptr) > 0 ? hi : lo) = mid;
  }

  RadialProfile out;
  out.d = params.d;
  out.p = params.p;
  out.q0 = 0.5 * (lo + hi);
  out.dr = dr;
  std::vector<std::array<double, 2>> path;
  classify(ode, out.q0, r_max, dr, &path);
  // The last sample already carries the event (sign change or upturn); drop it.
  const std::size_t keep = path.size() > 1 ? path.size() - 1 : path.size();
  const int steps = static_cast<int>(std::ceil(r_max / dr));
  out.r.resize(steps + 1);
  out.q.assign(steps + 1, 0.0);
  out.dq.assign(steps + 1, 0.0);
  for (int i = 0; i <= steps; ++i) out.r[i] = i * dr;
  for (std::size_t i = 0; i < keep && i <= static_cast<std::size_t>(steps); ++i) {
    out.q[i] = path[i][0];
    out.dq[i] = path[i][1];
  }
  out.r_cut = (keep - 1) * dr;

  const int d = params.d;
  const double surface = d == 1 ? 2.0 : (d == 2 ? 2.0 * std::numbers::pi : 4.0 * std::numbers::pi);
  std::vector<double> fm(steps + 1), fg(steps + 1), fp(steps + 1), fv(steps + 1);
  for (int i = 0; i <= steps; ++i) {
    const double r = out.r[i];
    const double jac = d == 1 ? 1.0 : std::pow(r, d - 1);
    const double q = out.q[i];
    fm[i] = q * q * jac;
    fg[i] = out.dq[i] * out.dq[i] * jac;
    fp[i] = std::pow(std::abs(q), params.p + 1.0) * jac;
    fv[i] = r * r * q * q * jac;
  }
  out.mass = surface * simpson(fm, dr);
  out.grad_sq = surface * simpson(fg, dr);
  out.lp1 = surface * simpson(fp, dr);
  out.variance = surface * simpson(fv, dr);
  return out;
}

}  // namespace nls
