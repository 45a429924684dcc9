#include "nls/modulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "nls/core.hpp"
#include "nls/error.hpp"
#include "nls/kernels.hpp"

namespace nls {

namespace {

double wrap_angle(double a) {
  const double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  if (a > std::numbers::pi) a -= two_pi;
  return a;
}

// Pairings of u(· + x) with Q and ∂_a Q evaluated from the cross spectrum
// û conj(Q̂), so moving x costs no transform.
class Pairing {
 public:
  Pairing(const Field& u, const GroundState& Q) : lat_(u.lattice()), d_(u.d()), n_(u.grid.n) {
    const auto uh = to_spectral(u);
    const auto qh = to_spectral(Q.profile);
    cross_.resize(uh.size());
    for (std::size_t i = 0; i < uh.size(); ++i) cross_[i] = uh[i] * std::conj(qh[i]);
    scale_ = lat_->cell_volume() / static_cast<double>(uh.size());
  }

  // S = ∫u(y+x)Q(y) dy and T_a = ∫u(y+x)∂_aQ(y) dy.
  void eval(std::span<const double> x, cplx& S, std::vector<cplx>& T) const {
    std::vector<std::vector<cplx>> axis(d_, std::vector<cplx>(n_));
    for (int a = 0; a < d_; ++a)
      for (int j = 0; j < n_; ++j) {
        const double arg = lat_->k()[j] * x[a];
        axis[a][j] = (j == n_ / 2) ? cplx(std::cos(arg), 0.0) : cplx(std::cos(arg), std::sin(arg));
      }
    const auto& kodd = lat_->k_odd();
    const std::size_t N = cross_.size();
    auto term = [&](std::size_t i, int idx[3]) {
      lat_->unravel(i, idx);
      cplx m = axis[0][idx[0]];
      for (int a = 1; a < d_; ++a) m *= axis[a][idx[a]];
      return cross_[i] * m;
    };
    const double sr = kernels::reduce(N, [&](std::size_t i) { int idx[3]; return term(i, idx).real(); });
    const double si = kernels::reduce(N, [&](std::size_t i) { int idx[3]; return term(i, idx).imag(); });
    S = scale_ * cplx(sr, si);
    T.assign(d_, 0.0);
    for (int a = 0; a < d_; ++a) {
      // conj(i k Q̂) = -i k conj(Q̂)
      auto ta = [&](std::size_t i) {
        int idx[3];
        const cplx v = term(i, idx);
        return cplx(0.0, -kodd[idx[a]]) * v;
      };
      const double tr = kernels::reduce(N, [&](std::size_t i) { return ta(i).real(); });
      const double ti = kernels::reduce(N, [&](std::size_t i) { return ta(i).imag(); });
      T[a] = scale_ * cplx(tr, ti);
    }
  }

  // (r1, r2...) at parameters (x, θ).
  std::vector<double> residual(std::span<const double> x, double theta) const {
    cplx S;
    std::vector<cplx> T;
    eval(x, S, T);
    const cplx rot = std::polar(1.0, -theta);
    std::vector<double> r(d_ + 1);
    r[0] = (rot * S).imag();
    for (int a = 0; a < d_; ++a) r[a + 1] = (rot * T[a]).real();
    return r;
  }

  cplx overlap(std::span<const double> x) const {
    cplx S;
    std::vector<cplx> T;
    eval(x, S, T);
    return S;
  }

 private:
  std::shared_ptr<const Lattice> lat_;
  int d_, n_;
  std::vector<cplx> cross_;
  double scale_ = 1.0;
};

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Gaussian elimination with partial pivoting; false when singular.
bool solve_small(std::vector<std::vector<double>> A, std::vector<double>& b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
    if (!(std::abs(A[piv][c]) > 1e-300)) return false;
    std::swap(A[c], A[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = A[r][c] / A[c][c];
      for (std::size_t k = c; k < n; ++k) A[r][k] -= f * A[c][k];
      b[r] -= f * b[c];
    }
  }
  for (std::size_t c = n; c-- > 0;) {
    for (std::size_t k = c + 1; k < n; ++k) b[c] -= A[c][k] * b[k];
    b[c] /= A[c][c];
  }
  return true;
}

}  // namespace

double ModulationFit::max_residual() const {
  double m = std::abs(r1);
  for (double v : r2) m = std::max(m, std::abs(v));
  return m;
}

double default_mu0(const GroundState& Q) { return 0.2 * Q.grad_sq; }

ModulationGuess auto_guess(const Field& u, const GroundState& Q) {
  require_same_grid(u, Q.profile, "auto_guess");
  ModulationGuess g;
  g.x = circular_centroid(u);
  const Pairing pair(u, Q);
  const cplx S = pair.overlap(g.x);
  if (!(std::abs(S) > 0.0)) throw ZeroMass("auto_guess: field has no overlap with the ground state");
  g.theta = std::arg(S);
  return g;
}

ModulationFit fit(const Field& u, const GroundState& Q, const std::optional<ModulationGuess>& guess,
                  const ModulationOptions& opts) {
  require_same_grid(u, Q.profile, "fit");
  const int d = u.d();
  const double L = u.grid.L;
  const Norms nu = norms(u);
  const double mu = Q.grad_sq - nu.gradL2sq;
  const double mu0 = opts.mu0 > 0.0 ? opts.mu0 : default_mu0(Q);
  if (opts.enforce_window && !(std::abs(mu) < mu0))
    throw PreconditionError("fit: |mu| = " + std::to_string(std::abs(mu)) + " outside the window mu0 = " +
                            std::to_string(mu0));

  ModulationGuess start = guess ? *guess : auto_guess(u, Q);
  if (static_cast<int>(start.x.size()) != d) throw PreconditionError("fit: guess dimension differs from the field");

  const Pairing pair(u, Q);
  std::vector<double> x = start.x;
  double theta = wrap_angle(start.theta);
  const double scale = std::max(1.0, Q.mass);
  std::vector<double> r = pair.residual(x, theta);
  int it = 0;
  for (; it < opts.max_iter && max_abs(r) >= opts.tol * scale; ++it) {
    // Central-difference Jacobian in (θ, x_1..x_d).
    std::vector<std::vector<double>> Jm(d + 1, std::vector<double>(d + 1));
    for (int c = 0; c <= d; ++c) {
      const double hstep = opts.fd_step * (c == 0 ? 1.0 : std::max(1.0, std::abs(x[c - 1])));
      std::vector<double> xp = x, xm = x;
      double tp = theta, tm = theta;
      if (c == 0) {
        tp += hstep;
        tm -= hstep;
      } else {
        xp[c - 1] += hstep;
        xm[c - 1] -= hstep;
      }
      const auto rp = pair.residual(xp, tp), rm = pair.residual(xm, tm);
      for (int row = 0; row <= d; ++row) Jm[row][c] = (rp[row] - rm[row]) / (2.0 * hstep);
    }
    std::vector<double> delta(r.begin(), r.end());
    if (!solve_small(Jm, delta)) throw NonConvergence("fit: singular Jacobian of the orthogonality conditions");
    theta = wrap_angle(theta - delta[0]);
    double step = std::abs(delta[0]);
    for (int a = 0; a < d; ++a) {
      x[a] -= delta[a + 1];
      step = std::max(step, std::abs(delta[a + 1]));
      if (!(std::abs(x[a]) < 0.5 * L)) throw NonConvergence("fit: translation left |x| < L/2");
    }
    r = pair.residual(x, theta);
    if (step < 1e-15 * (1.0 + max_abs(x))) {
      ++it;
      break;
    }
  }
  if (!(max_abs(r) < opts.accept * scale))
    throw NonConvergence("fit: residual " + std::to_string(max_abs(r)) + " after " + std::to_string(it) +
                         " iterations");

  ModulationFit out;
  out.x = x;
  out.theta = theta;
  out.mu = mu;
  out.iterations = it;
  out.converged = true;

  std::vector<double> back(x);
  for (auto& v : back) v = -v;
  out.g = rotate_phase(translate(u, back), -theta);
  for (std::size_t i = 0; i < out.g.size(); ++i) out.g.values[i] -= Q.profile.values[i];

  // Residuals and ρ from the final g in physical space.
  const auto lat = u.lattice();
  const double w = lat->cell_volume();
  const auto& qv = Q.profile.values;
  out.r1 = w * kernels::reduce(u.size(), [&](std::size_t i) { return out.g.values[i].imag() * qv[i].real(); });
  const auto dQ = gradient(Q.profile);
  out.r2.resize(d);
  for (int a = 0; a < d; ++a)
    out.r2[a] = w * kernels::reduce(u.size(), [&](std::size_t i) {
                  return out.g.values[i].real() * dQ[a].values[i].real();
                });
  const double p = u.params.p;
  const double gqp = w * kernels::reduce(u.size(), [&](std::size_t i) {
                       return out.g.values[i].real() * std::pow(qv[i].real(), p);
                     });
  out.rho = gqp / Q.lp1;
  out.h = out.g;
  for (std::size_t i = 0; i < out.h.size(); ++i) out.h.values[i] -= out.rho * qv[i];
  out.re_Qh = w * kernels::reduce(u.size(), [&](std::size_t i) { return out.h.values[i].real() * qv[i].real(); });
  out.g_h1 = h1_norm(out.g);
  out.h_h1 = h1_norm(out.h);
  return out;
}

Field reconstruct(const ModulationFit& f, const GroundState& Q) {
  Field v = f.g;
  for (std::size_t i = 0; i < v.size(); ++i) v.values[i] += Q.profile.values[i];
  return translate(rotate_phase(v, f.theta), f.x);
}

const char* to_string(TrackSource s) {
  return s == TrackSource::ModulationX ? "modulation" : "centroid";
}

double compactness_radius(const Field& u, std::span<const double> center, double eps) {
  const auto lat = u.lattice();
  const int d = u.d();
  const auto grad = gradient(u);
  const double w = lat->cell_volume();
  const std::size_t N = u.size();
  std::vector<std::pair<double, double>> pts(N);  // (distance, density * w)
  int idx[3];
  for (std::size_t i = 0; i < N; ++i) {
    lat->unravel(i, idx);
    double r2 = 0.0, dens = std::norm(u.values[i]);
    for (int a = 0; a < d; ++a) {
      const double dx = periodic_delta(lat->x()[idx[a]], center[a], u.grid.L);
      r2 += dx * dx;
      dens += std::norm(grad[a].values[i]);
    }
    pts[i] = {std::sqrt(r2), dens * w};
  }
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  // Walk inwards; the tail beyond R is the sum over strictly larger distances.
  double tail = 0.0;
  std::size_t i = 0;
  while (i < N) {
    const double r = pts[i].first;
    double group = 0.0;
    std::size_t j = i;
    while (j < N && pts[j].first == r) group += pts[j++].second;
    if (tail + group > eps) return r;
    tail += group;
    i = j;
  }
  return 0.0;
}

TrackState Tracker::push(const Field& u, const FunctionalRecord& rec, const ModulationFit* fit) {
  TrackState ts;
  ts.t = rec.t;
  ts.mu_window = fit && fit->converged && std::abs(rec.mu) < mu0_;
  std::vector<double> raw;
  if (ts.mu_window) {
    ts.source = TrackSource::ModulationX;
    raw = fit->x;
  } else {
    ts.source = TrackSource::DensityCentroid;
    raw = circular_centroid(u);
  }
  if (!prev_.empty())
    for (std::size_t a = 0; a < raw.size(); ++a) raw[a] = prev_[a] + periodic_delta(raw[a], prev_[a], u.grid.L);
  ts.X = raw;
  prev_ = raw;
  for (double e : eps_) ts.radius[e] = compactness_radius(u, ts.X, e);
  return ts;
}

std::vector<TrackState> track(const std::vector<Field>& states, const std::vector<FunctionalRecord>& records,
                              const std::vector<std::optional<ModulationFit>>& fits, double mu0,
                              const std::vector<double>& eps) {
  if (states.size() != records.size() || (!fits.empty() && fits.size() != states.size()))
    throw PreconditionError("track: states, records and fits must align");
  Tracker tracker(mu0, eps);
  std::vector<TrackState> out;
  out.reserve(states.size());
  for (std::size_t s = 0; s < states.size(); ++s) {
    const ModulationFit* f = (!fits.empty() && fits[s]) ? &*fits[s] : nullptr;
    out.push_back(tracker.push(states[s], records[s], f));
  }
  return out;
}

std::vector<ComparabilityRow> comparability_monitor(const std::vector<ModulationFit>& fits, const std::vector<double>& times) {
  std::vector<ComparabilityRow> rows;
  for (std::size_t i = 0; i < fits.size(); ++i) {
    const auto& f = fits[i];
    ComparabilityRow row;
    row.t = i < times.size() ? times[i] : f.g.t;
    row.mu = f.mu;
    const double m = std::abs(f.mu);
    if (!(m > 0.0) || f.g_h1 == 0.0) {
      row.degenerate = true;
    } else {
      row.rho_ratio = std::abs(f.rho) / m;
      row.h_ratio = f.h_h1 / m;
      row.g_ratio = f.g_h1 / m;
      row.qh_ratio = std::abs(f.re_Qh) / m;
    }
    rows.push_back(row);
  }
  return rows;
}

bool within_band(const std::vector<ComparabilityRow>& rows, double c_star) {
  const double lo = 1.0 / c_star, hi = c_star;
  for (const auto& r : rows) {
    if (r.degenerate) continue;
    for (double v : {r.rho_ratio, r.h_ratio, r.g_ratio, r.qh_ratio})
      if (!(v >= lo && v <= hi)) return false;
  }
  return true;
}

double centered_variance(const Field& u, std::span<const double> center) {
  const auto lat = u.lattice();
  const int d = u.d();
  return lat->cell_volume() * kernels::reduce(u.size(), [&](std::size_t i) {
           int idx[3];
           lat->unravel(i, idx);
           double r2 = 0.0;
           for (int a = 0; a < d; ++a) {
             const double dx = periodic_delta(lat->x()[idx[a]], center[a], u.grid.L);
             r2 += dx * dx;
           }
           return r2 * std::norm(u.values[i]);
         });
}

std::vector<ConvergenceRow> convergence_monitor(const std::vector<Field>& states,
                                                const std::vector<FunctionalRecord>& records,
                                                const std::vector<std::optional<ModulationFit>>& fits,
                                                const std::vector<TrackState>& tr) {
  if (states.size() != records.size() || fits.size() != states.size() || tr.size() != states.size())
    throw PreconditionError("convergence_monitor: inputs must align");
  std::vector<ConvergenceRow> rows;
  for (std::size_t s = 0; s < states.size(); ++s) {
    ConvergenceRow row;
    row.t = records[s].t;
    row.delta = fits[s] ? fits[s]->g_h1 : std::numeric_limits<double>::quiet_NaN();
    row.variance = centered_variance(states[s], tr[s].X);
    row.K = records[s].K;
    row.mu = records[s].mu;
    row.k_over_mu = records[s].mu != 0.0 ? records[s].K / records[s].mu : std::numeric_limits<double>::quiet_NaN();
    rows.push_back(row);
  }
  return rows;
}

RateFit fit_log_rate(const std::vector<ConvergenceRow>& rows, double t_lo, double t_hi, double floor) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  int n = 0;
  for (const auto& r : rows) {
    if (r.t < t_lo || r.t > t_hi || !(r.delta > floor)) continue;
    const double y = std::log(r.delta);
    sx += r.t;
    sy += y;
    sxx += r.t * r.t;
    sxy += r.t * y;
    syy += y * y;
    ++n;
  }
  RateFit f;
  f.points = n;
  if (n < 2) return f;
  const double vx = sxx - sx * sx / n, vy = syy - sy * sy / n, cxy = sxy - sx * sy / n;
  if (!(vx > 0.0)) return f;
  f.slope = cxy / vx;
  f.intercept = (sy - f.slope * sx) / n;
  f.r2 = vy > 0.0 ? cxy * cxy / (vx * vy) : 1.0;
  return f;
}

DriftBoundReport drift_bound_monitor(const std::vector<TrackState>& tr, const std::vector<FunctionalRecord>& records,
                              double gap) {
  if (tr.size() != records.size()) throw PreconditionError("drift_bound_monitor: track and records must align");
  const std::size_t n = tr.size();
  std::vector<double> cum(n, 0.0);
  for (std::size_t i = 1; i < n; ++i)
    cum[i] = cum[i - 1] + 0.5 * (std::abs(records[i].mu) + std::abs(records[i - 1].mu)) * (records[i].t - records[i - 1].t);
  DriftBoundReport rep;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      if (records[j].t < records[i].t + gap - 1e-12) continue;
      double disp = 0.0;
      for (std::size_t a = 0; a < tr[i].X.size(); ++a) disp += std::pow(tr[j].X[a] - tr[i].X[a], 2);
      disp = std::sqrt(disp);
      const double I = cum[j] - cum[i];
      ++rep.pairs;
      rep.max_displacement = std::max(rep.max_displacement, disp);
      if (I > 0.0) rep.C = std::max(rep.C, disp / I);
      else if (disp > 0.0) ++rep.zero_integral_moves;
    }
  return rep;
}

}  // namespace nls
