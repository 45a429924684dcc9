#include "nls/lab/threshold.hpp"

#include <cmath>
#include <sstream>

#include "nls/error.hpp"

namespace nls::lab {

double threshold_gamma_sq(const GroundState& Q, double b) {
  const PhysParams& pp = Q.params();
  const double alpha = pp.alpha();
  const double f = 0.5 * b * b - std::pow(b, alpha) / alpha;
  return (Q.energy() - f * Q.grad_sq) * b * b / (2.0 * Q.variance);
}

namespace {

Field scaled_with_phase(const GroundState& Q, double b, double gamma) {
  const int d = Q.params().d;
  Field u = Q.sample_scaled(Q.grid(), b);
  const double amp = std::pow(b, 0.5 * d);
  const auto lat = u.lattice();
  const auto r2 = lat->r2();
  for (std::size_t i = 0; i < u.size(); ++i) u.values[i] = amp * u.values[i].real() * std::polar(1.0, gamma * r2[i]);
  return u;
}

void verify(const Field& u, const GroundState& Q, double tau, int want_k_sign, const char* what) {
  const FunctionalRecord rec = evaluate(u, Q, tau);
  const double dM = std::abs(rec.M - Q.mass) / Q.mass;
  const double dE = std::abs(rec.E - Q.energy()) / (std::abs(Q.energy()) + 1.0);
  const bool k_ok = want_k_sign == 0 || (want_k_sign < 0 ? rec.K < 0.0 : rec.K > 0.0);
  if (dM < tau && dE < tau && k_ok && u.all_finite()) return;
  std::ostringstream msg;
  msg.precision(6);
  msg << what << ": dM/M = " << dM << ", dE = " << dE << ", K = " << rec.K << " (grid too coarse?)";
  throw ConstructionFailed(msg.str());
}

}  // namespace

Field make_threshold_datum(const GroundState& Q, double b, int phase_sign, double tau) {
  if (!(b >= 1.0) || !std::isfinite(b)) throw PreconditionError("threshold datum needs b >= 1");
  if (phase_sign != 1 && phase_sign != -1) throw PreconditionError("phase_sign must be +1 or -1");
  const double g2 = b == 1.0 ? 0.0 : threshold_gamma_sq(Q, b);
  if (g2 < 0.0) throw ConstructionFailed("threshold datum: negative gamma^2");
  Field u = scaled_with_phase(Q, b, phase_sign * std::sqrt(g2));
  verify(u, Q, tau, b > 1.0 ? -1 : 0, "threshold datum");
  return u;
}

Field make_threshold_kpos_datum(const GroundState& Q, double b, double tau) {
  if (!(b > 0.0 && b < 1.0)) throw PreconditionError("wide-branch datum needs 0 < b < 1");
  const double g2 = threshold_gamma_sq(Q, b);
  if (g2 < 0.0) throw ConstructionFailed("wide-branch datum: negative gamma^2");
  Field u = scaled_with_phase(Q, b, std::sqrt(g2));
  verify(u, Q, tau, +1, "wide-branch datum");
  return u;
}

Field make_scaled_datum(const GroundState& Q, double amplitude, double boost) {
  Field u = Q.profile;
  const auto lat = u.lattice();
  int idx[3];
  for (std::size_t i = 0; i < u.size(); ++i) {
    lat->unravel(i, idx);
    u.values[i] = amplitude * u.values[i].real() * std::polar(1.0, boost * lat->x()[idx[0]]);
  }
  return u;
}

}  // namespace nls::lab
