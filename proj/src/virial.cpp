#include "nls/virial.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nls/core.hpp"
#include "nls/error.hpp"
#include "nls/kernels.hpp"

namespace nls {

namespace {

using Poly = std::array<double, 6>;

// lo + (hi - lo) * S5(t / w), S5(y) = 10y^3 - 15y^4 + 6y^5.
Poly smoothstep(double lo, double hi, double w) {
  const double d = hi - lo;
  return {lo, 0.0, 0.0, 10.0 * d / std::pow(w, 3), -15.0 * d / std::pow(w, 4), 6.0 * d / std::pow(w, 5)};
}

double horner(const Poly& c, double t) {
  double v = 0.0;
  for (int j = 5; j >= 0; --j) v = v * t + c[j];
  return v;
}
double dpoly(const Poly& c, double t) {
  double v = 0.0;
  for (int j = 5; j >= 1; --j) v = v * t + j * c[j];
  return v;
}
double ddpoly(const Poly& c, double t) {
  double v = 0.0;
  for (int j = 5; j >= 2; --j) v = v * t + j * (j - 1) * c[j];
  return v;
}
// First and second antiderivatives vanishing at t = 0.
double prim1(const Poly& c, double t) {
  double v = 0.0;
  for (int j = 5; j >= 0; --j) v = v * t + c[j] / (j + 1);
  return v * t;
}
double prim2(const Poly& c, double t) {
  double v = 0.0;
  for (int j = 5; j >= 0; --j) v = v * t + c[j] / ((j + 1) * (j + 2));
  return v * t * t;
}

// Coefficients of q(τ) = c(w - τ).
Poly reflect(const Poly& c, double w) {
  Poly q{};
  for (int j = 0; j < 6; ++j) {
    double binom = 1.0;
    for (int m = 0; m <= j; ++m) {
      q[m] += c[j] * binom * std::pow(w, j - m) * ((m % 2) ? -1.0 : 1.0);
      binom = binom * (j - m) / (m + 1);
    }
  }
  return q;
}

struct Pieces {
  double knots[5];
  Poly psi[4];
};

Pieces make_pieces(const CutoffProfile::Shape& sh, double A, double B) {
  Pieces p{{0.0, sh.a, sh.c, sh.e, 1.0}, {}};
  p.psi[0] = smoothstep(2.0, -A, sh.a);
  p.psi[1] = smoothstep(-A, B, sh.c - sh.a);
  p.psi[2] = Poly{B, 0, 0, 0, 0, 0};
  p.psi[3] = smoothstep(B, 0.0, 1.0 - sh.e);
  return p;
}

// (∫ψ ds, ∫(1-s)ψ ds) over [0,1].
std::array<double, 2> moments(const Pieces& p) {
  double m0 = 0.0, m1 = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double s0 = p.knots[i], w = p.knots[i + 1] - s0;
    const double i0 = prim1(p.psi[i], w);
    double i1 = 0.0;
    for (int j = 0; j < 6; ++j) i1 += p.psi[i][j] * std::pow(w, j + 2) / (j + 2);
    m0 += i0;
    m1 += (1.0 - s0) * i0 - i1;
  }
  return {m0, m1};
}

}  // namespace

CutoffProfile build_cutoff(int mesh_points, double margin, const CutoffProfile::Shape& shape) {
  if (mesh_points < 16 || !(margin >= 0.0)) throw ConfigError("cutoff mesh needs >= 16 points and margin >= 0");
  if (!(0.0 < shape.a && shape.a < shape.c && shape.c <= shape.e && shape.e < 1.0))
    throw ConfigError("cutoff shape knots must satisfy 0 < a < c <= e < 1");

  // ψ is affine in (A, B); the two moment conditions give φ'(3) = 0, φ(3) = 0.
  const auto base = moments(make_pieces(shape, 0.0, 0.0));
  const auto ma = moments(make_pieces(shape, 1.0, 0.0));
  const auto mb = moments(make_pieces(shape, 0.0, 1.0));
  const double a11 = ma[0] - base[0], a12 = mb[0] - base[0];
  const double a21 = ma[1] - base[1], a22 = mb[1] - base[1];
  const double r1 = -1.0 - base[0], r2 = -1.25 - base[1];
  const double det = a11 * a22 - a12 * a21;
  if (!(std::abs(det) > 1e-14)) throw ConstructionFailed("cutoff moment system is singular");

  CutoffProfile out;
  out.shape_ = shape;
  out.A_ = (r1 * a22 - a12 * r2) / det;
  out.B_ = (a11 * r2 - a21 * r1) / det;
  const Pieces pc = make_pieces(shape, out.A_, out.B_);

  // Segments 0,1 integrate forward from s = 0; 2,3 backward from s = 1 so
  // that φ near r = 3 is a sum of non-negative terms.
  out.segs_.resize(4);
  double I1 = 0.0, I2 = 0.0;
  for (int i = 0; i < 2; ++i) {
    auto& sg = out.segs_[i];
    sg.s0 = pc.knots[i];
    sg.w = pc.knots[i + 1] - sg.s0;
    sg.psi = pc.psi[i];
    sg.I1 = I1;
    sg.I2 = I2;
    I2 += I1 * sg.w + prim2(sg.psi, sg.w);
    I1 += prim1(sg.psi, sg.w);
  }
  double J1 = 0.0, J2 = 0.0;
  for (int i = 3; i >= 2; --i) {
    auto& sg = out.segs_[i];
    sg.s0 = pc.knots[i];
    sg.w = pc.knots[i + 1] - sg.s0;
    sg.psi = reflect(pc.psi[i], sg.w);
    sg.from_right = true;
    sg.I1 = J1;
    sg.I2 = J2;
    J2 += J1 * sg.w + prim2(sg.psi, sg.w);
    J1 += prim1(sg.psi, sg.w);
  }

  const double rmax = 3.0 + margin;
  out.mesh_.resize(mesh_points);
  for (auto& t : out.tab_) t.resize(mesh_points);
  for (int i = 0; i < mesh_points; ++i) {
    const double r = rmax * i / (mesh_points - 1);
    out.mesh_[i] = r;
    const auto v = out.eval_all(r);
    for (int k = 0; k < 5; ++k) out.tab_[k][i] = v[k];
  }

  const CutoffReport rep = check_cutoff(out, margin);
  if (!rep.ok) {
    std::ostringstream msg;
    msg << "cutoff invariants violated: min phi " << rep.min_phi << ", sup phi'' " << rep.max_phi2
        << ", inner error " << rep.max_inner_error << ", outer value " << rep.max_outer_value
        << ", phi(3) by quadrature " << rep.self_consistency;
    throw ConstructionFailed(msg.str());
  }
  return out;
}

std::array<double, 5> CutoffProfile::limit(double r, bool above) const {
  if (r < 1.0 || (r == 1.0 && !above)) return {r * r, 2.0 * r, 2.0, 0.0, 0.0};
  if (r > 3.0 || (r == 3.0 && above)) return {0.0, 0.0, 0.0, 0.0, 0.0};
  const double s = 0.5 * (r - 1.0);
  std::size_t i = 0;
  while (i + 1 < segs_.size() &&
         (s > segs_[i].s0 + segs_[i].w || (s == segs_[i].s0 + segs_[i].w && above)))
    ++i;
  const Segment& sg = segs_[i];
  std::array<double, 5> v{};
  if (!sg.from_right) {
    const double t = s - sg.s0;
    const double F1 = sg.I1 + prim1(sg.psi, t);
    const double F2 = sg.I2 + sg.I1 * t + prim2(sg.psi, t);
    v[0] = 1.0 + 4.0 * s + 4.0 * F2;
    v[1] = 2.0 + 2.0 * F1;
    v[2] = horner(sg.psi, t);
    v[3] = 0.5 * dpoly(sg.psi, t);
    v[4] = 0.25 * ddpoly(sg.psi, t);
  } else {
    // τ measured leftwards from the segment end.
    const double tau = sg.s0 + sg.w - s;
    const double R1 = sg.I1 + prim1(sg.psi, tau);
    const double R2 = sg.I2 + sg.I1 * tau + prim2(sg.psi, tau);
    v[0] = 4.0 * R2;
    v[1] = -2.0 * R1;
    v[2] = horner(sg.psi, tau);
    v[3] = -0.5 * dpoly(sg.psi, tau);
    v[4] = 0.25 * ddpoly(sg.psi, tau);
  }
  return v;
}

std::array<double, 5> CutoffProfile::eval_all(double r) const { return limit(r, true); }

double CutoffProfile::eval(double r, int order) const {
  if (order < 0 || order > 4) throw PreconditionError("cutoff derivative order must be 0..4");
  return eval_all(r)[order];
}

std::vector<double> CutoffProfile::knots() const {
  std::vector<double> k;
  for (const auto& sg : segs_) k.push_back(1.0 + 2.0 * sg.s0);
  k.push_back(3.0);
  return k;
}

CutoffReport check_cutoff(const CutoffProfile& phi, double margin) {
  CutoffReport rep;
  const auto& mesh = phi.mesh();
  rep.min_phi = std::numeric_limits<double>::infinity();
  rep.max_phi2 = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    const double r = mesh[i];
    const double v0 = phi.samples(0)[i], v1 = phi.samples(1)[i], v2 = phi.samples(2)[i];
    rep.min_phi = std::min(rep.min_phi, v0);
    rep.max_phi2 = std::max(rep.max_phi2, v2);
    if (r <= 1.0) {
      const double e = std::max({std::abs(v0 - r * r), std::abs(v1 - 2.0 * r), std::abs(v2 - 2.0),
                                 std::abs(phi.samples(3)[i]), std::abs(phi.samples(4)[i])});
      rep.max_inner_error = std::max(rep.max_inner_error, e);
    }
    if (r >= 3.0)
      for (int k = 0; k < 5; ++k) rep.max_outer_value = std::max(rep.max_outer_value, std::abs(phi.samples(k)[i]));
  }

  const auto knots = phi.knots();
  for (std::size_t j = 0; j < knots.size(); ++j) {
    const auto lo = phi.limit(knots[j], false), hi = phi.limit(knots[j], true);
    for (int k = 0; k < 5; ++k) {
      const double jump = std::abs(hi[k] - lo[k]);
      if (j == 0) rep.jump_at_1[k] = jump;
      else if (j + 1 == knots.size()) rep.jump_at_3[k] = jump;
      else rep.max_internal_jump = std::max(rep.max_internal_jump, jump);
    }
  }
  const double delta = 1e-9;
  for (int k = 0; k < 5; ++k) {
    rep.refined_jump_at_1[k] = std::abs(phi.eval(1.0 + delta, k) - phi.eval(1.0 - delta, k));
    rep.refined_jump_at_3[k] = std::abs(phi.eval(3.0 + delta, k) - phi.eval(3.0 - delta, k));
  }

  // φ(3) = ∫_0^3 (3 - r) φ''(r) dr since φ(0) = φ'(0) = 0; 8-point
  // Gauss-Legendre on 16 panels between consecutive knots.
  static const double gx[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
                               0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
  static const double gw[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
                               0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};
  std::vector<double> bounds{0.0};
  bounds.insert(bounds.end(), knots.begin(), knots.end());
  double acc = 0.0;
  for (std::size_t j = 0; j + 1 < bounds.size(); ++j) {
    const int panels = 16;
    const double h = (bounds[j + 1] - bounds[j]) / panels;
    for (int q = 0; q < panels; ++q) {
      const double mid = bounds[j] + (q + 0.5) * h;
      for (int g = 0; g < 8; ++g) {
        const double r = mid + 0.5 * h * gx[g];
        acc += 0.5 * h * gw[g] * (3.0 - r) * phi.eval(r, 2);
      }
    }
  }
  rep.self_consistency = std::abs(acc);

  double max_jump = 0.0;
  for (int k = 0; k < 5; ++k) max_jump = std::max({max_jump, rep.jump_at_1[k], rep.jump_at_3[k]});
  max_jump = std::max(max_jump, rep.max_internal_jump);
  rep.ok = rep.min_phi >= 0.0 && rep.max_phi2 <= 2.0 + 1e-10 && rep.max_inner_error <= 1e-12 &&
           rep.max_outer_value == 0.0 && max_jump < 1e-8 && rep.self_consistency < 1e-10;
  (void)margin;
  return rep;
}

VirialProbe::VirialProbe(double R, int d, const GridSpec& grid, const CutoffProfile& cutoff)
    : R_(R), d_(d), grid_(grid) {
  if (!(R > 0.0)) throw ConfigError("probe radius must be positive");
  if (3.0 * R > grid.L) throw ConfigError("probe support 3R exceeds the half-width L");
  const auto lat = Lattice::get(d, grid);
  const std::size_t N = lat->size();
  phi_.resize(N);
  dr_over_r_.resize(N);
  dr2_.resize(N);
  lap_.resize(N);
  bilap_.resize(N);
  outside_.resize(N);
  const auto r2 = lat->r2();
  const double dm1 = d - 1.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double r = std::sqrt(r2[i]);
    const double rho = r / R;
    outside_[i] = r >= R;
    if (rho <= 1.0) {
      phi_[i] = r2[i];
      dr_over_r_[i] = 2.0;
      dr2_[i] = 2.0;
      lap_[i] = 2.0 * d;
      bilap_[i] = 0.0;
      continue;
    }
    if (rho >= 3.0) continue;
    const auto f = cutoff.eval_all(rho);
    phi_[i] = R * R * f[0];
    dr_over_r_[i] = f[1] / rho;
    dr2_[i] = f[2];
    lap_[i] = f[2] + dm1 * f[1] / rho;
    const double g1 = f[3] + dm1 * (f[2] / rho - f[1] / (rho * rho));
    const double g2 = f[4] + dm1 * (f[3] / rho - 2.0 * f[2] / (rho * rho) + 2.0 * f[1] / (rho * rho * rho));
    bilap_[i] = (g2 + dm1 * g1 / rho) / (R * R);
  }
}

namespace {

void require_probe(const Field& u, const VirialProbe& probe, const char* where) {
  if (u.d() != probe.d() || !(u.grid == probe.grid()))
    throw GridMismatch(std::string(where) + ": probe grid differs from the field grid");
}

struct TailTerms {
  double grad_radial = 0.0;  // ∫ 4(φ'' - φ'/r)|∂_r u|²
  double grad_iso = 0.0;     // ∫ 4(φ'/r - 2)|∇u|²
  double grad_printed = 0.0; // ∫ (4φ'' - 8)|∇u|²
  double potential = 0.0;    // 2(p-1)/(p+1) ∫ (2d - Δφ)|u|^{p+1}
  double bilap = 0.0;        // ∫ Δ²φ |u|²
};

TailTerms tail_terms(const Field& u, const VirialProbe& probe) {
  const auto lat = u.lattice();
  const auto grad = gradient(u);
  const int d = u.d();
  const double p = u.params.p;
  const auto r2 = lat->r2();
  const auto out = probe.outside();
  const auto dr2 = probe.dr2(), dor = probe.dr_over_r(), lap = probe.laplacian(), bl = probe.bilaplacian();
  const std::size_t N = u.size();
  auto sum = [&](auto&& f) {
    return lat->cell_volume() * kernels::reduce(N, [&](std::size_t i) { return out[i] ? f(i) : 0.0; });
  };
  auto grad2 = [&](std::size_t i) {
    double g = 0.0;
    for (int a = 0; a < d; ++a) g += std::norm(grad[a].values[i]);
    return g;
  };
  auto radial2 = [&](std::size_t i) {
    int idx[3];
    lat->unravel(i, idx);
    cplx dr = 0.0;
    for (int a = 0; a < d; ++a) dr += lat->x()[idx[a]] * grad[a].values[i];
    return std::norm(dr) / r2[i];
  };
  TailTerms t;
  t.grad_radial = sum([&](std::size_t i) { return 4.0 * (dr2[i] - dor[i]) * radial2(i); });
  t.grad_iso = sum([&](std::size_t i) { return 4.0 * (dor[i] - 2.0) * grad2(i); });
  t.grad_printed = sum([&](std::size_t i) { return (4.0 * dr2[i] - 8.0) * grad2(i); });
  t.potential = 2.0 * (p - 1.0) / (p + 1.0) *
                sum([&](std::size_t i) { return (2.0 * d - lap[i]) * std::pow(std::abs(u.values[i]), p + 1.0); });
  t.bilap = sum([&](std::size_t i) { return bl[i] * std::norm(u.values[i]); });
  return t;
}

}  // namespace

double J(const Field& u, const VirialProbe& probe) {
  require_probe(u, probe, "J");
  return u.lattice()->cell_volume() * kernels::parallel::sum_weighted_abs2(u.values, probe.phi());
}

double Jprime(const Field& u, const VirialProbe& probe) {
  require_probe(u, probe, "Jprime");
  const auto lat = u.lattice();
  const auto grad = gradient(u);
  const auto dor = probe.dr_over_r();
  // ∇φ_R = (φ_R'/r) x.
  const double s = kernels::reduce(u.size(), [&](std::size_t i) {
    int idx[3];
    lat->unravel(i, idx);
    cplx acc = 0.0;
    for (int a = 0; a < u.d(); ++a) acc += lat->x()[idx[a]] * grad[a].values[i];
    return dor[i] * (std::conj(u.values[i]) * acc).imag();
  });
  return 2.0 * lat->cell_volume() * s;
}

double A(const Field& u, const VirialProbe& probe) {
  require_probe(u, probe, "A");
  const TailTerms t = tail_terms(u, probe);
  return t.grad_radial + t.grad_iso + t.potential - t.bilap;
}

double A_as_printed(const Field& u, const VirialProbe& probe) {
  require_probe(u, probe, "A_as_printed");
  const TailTerms t = tail_terms(u, probe);
  return t.grad_printed + t.potential + t.bilap;
}

std::vector<double> default_probe_radii(const GridSpec& grid) {
  return {grid.L / 8.0, grid.L / 4.0, 5.0 * grid.L / 16.0};
}

std::vector<TailRatioRow> tail_ratio_rows(double t, double mu, double grad_sq, double x_norm,
                                     std::span<const double> radii, std::span<const double> a_values,
                                     double rel_tol) {
  if (radii.size() != a_values.size()) throw PreconditionError("tail_ratio_rows: radii and A values differ in length");
  const double absmu = std::abs(mu);
  const bool degenerate = !(absmu > 1e-14 * std::max(absmu + grad_sq, 1e-300));
  std::vector<TailRatioRow> rows;
  double prev = -1.0;
  for (std::size_t j = 0; j < radii.size(); ++j) {
    TailRatioRow row;
    row.t = t;
    row.R = radii[j];
    row.R_minus_X = row.R - x_norm;
    row.absA = std::abs(a_values[j]);
    row.absMu = absmu;
    row.degenerate = degenerate && row.absA != 0.0;
    if (row.absA == 0.0) row.ratio = 0.0;
    else row.ratio = degenerate ? kDegenerateRatio : row.absA / absmu;
    if (!row.degenerate && prev >= 0.0 && row.ratio > prev * (1.0 + rel_tol)) row.violation = true;
    if (!row.degenerate) prev = row.ratio;
    rows.push_back(row);
  }
  return rows;
}

std::vector<TailRatioRow> tail_ratio_monitor(const std::vector<Field>& states,
                                        const std::vector<FunctionalRecord>& records,
                                        const std::vector<std::vector<double>>& centers,
                                        const std::vector<VirialProbe>& probes, double rel_tol) {
  if (states.size() != records.size()) throw PreconditionError("tail_ratio_monitor: states and records differ in length");
  if (!centers.empty() && centers.size() != states.size())
    throw PreconditionError("tail_ratio_monitor: centers must be empty or one per sample");
  std::vector<std::size_t> order(probes.size());
  for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return probes[a].R() < probes[b].R(); });

  std::vector<TailRatioRow> rows;
  for (std::size_t s = 0; s < states.size(); ++s) {
    double xnorm = 0.0;
    if (!centers.empty())
      for (double c : centers[s]) xnorm += c * c;
    std::vector<double> radii, avals;
    for (std::size_t j : order) {
      radii.push_back(probes[j].R());
      avals.push_back(A(states[s], probes[j]));
    }
    auto part = tail_ratio_rows(records[s].t, records[s].mu, records[s].gradL2sq, std::sqrt(xnorm), radii, avals, rel_tol);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  return rows;
}

}  // namespace nls
