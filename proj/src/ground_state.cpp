#include "nls/ground_state.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "nls/core.hpp"
#include "nls/error.hpp"
#include "nls/fft.hpp"
#include "nls/kernels.hpp"

namespace nls {

std::string to_string(GroundStateMethod m) {
  switch (m) {
    case GroundStateMethod::ClosedForm: return "closed-form";
    case GroundStateMethod::Petviashvili: return "petviashvili";
    case GroundStateMethod::Shooting: return "shooting";
  }
  return "unknown";
}

double GroundState::energy() const { return 0.5 * grad_sq - lp1 / (params().p + 1.0); }

GridSpec default_ground_state_grid(int d) {
  switch (d) {
    case 1: return GridSpec::make(32.0, 1024);
    case 2: return GridSpec::make(26.0, 1024);
    case 3: return GridSpec::make(10.0, 128);
  }
  throw InvalidParams("dimension must be 1, 2 or 3");
}

CertificationTolerances default_tolerances(int d, const GridSpec& grid) {
  CertificationTolerances tol;
  // Q decays like e^{-|x|}; with 128^3 points the half-width that keeps the
  // Pohozaev identities at 1e-6 leaves |Q| ~ 1e-5 on the faces.
  if (d == 3 && grid.n <= 128) tol.boundary = 1e-4;
  return tol;
}

double closed_form_profile(double p, double x) {
  const double amp = std::pow(0.5 * (p + 1.0), 1.0 / (p - 1.0));
  return amp * std::pow(1.0 / std::cosh(0.5 * (p - 1.0) * x), 2.0 / (p - 1.0));
}

namespace {

void fill_norms(GroundState& gs) {
  const Norms nm = norms(gs.profile);
  gs.mass = nm.L2sq;
  gs.grad_sq = nm.gradL2sq;
  gs.lp1 = nm.Lp1;
  gs.variance = nm.weighted_variance;
}

// Reflection j -> (n - j) mod n maps x to -x on the periodic grid.
double symmetry_defect(const Field& q) {
  const auto lat = q.lattice();
  const int d = q.d(), n = q.grid.n;
  double worst = 0.0;
  int idx[3], img[3];
  auto flat = [&](const int* m) {
    std::size_t j = 0;
    for (int a = 0; a < d; ++a) j += static_cast<std::size_t>(m[a]) * lat->stride(a);
    return j;
  };
  for (std::size_t i = 0; i < q.size(); ++i) {
    lat->unravel(i, idx);
    for (int a = 0; a < d; ++a) {
      std::copy(idx, idx + d, img);
      img[a] = (n - idx[a]) % n;
      worst = std::max(worst, std::abs(q.values[i] - q.values[flat(img)]));
    }
    for (int a = 0; a + 1 < d; ++a) {
      std::copy(idx, idx + d, img);
      std::swap(img[a], img[a + 1]);
      worst = std::max(worst, std::abs(q.values[i] - q.values[flat(img)]));
    }
  }
  return worst;
}

}  // namespace

Certificate evaluate_certificate(const GroundState& gs) {
  const Field& q = gs.profile;
  const auto lat = q.lattice();
  const double p = q.params.p;
  const int d = q.d();
  Certificate c = gs.certificate;

  // Residual -ΔQ + Q - |Q|^{p-1} Q, evaluated spectrally.
  Field lap = laplacian(q);
  std::vector<double> res2(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    const cplx v = q.values[i];
    const cplx r = -lap.values[i] + v - std::pow(std::abs(v), p - 1.0) * v;
    res2[i] = std::norm(r);
  }
  c.residual = std::sqrt(integrate(res2, d, q.grid) / gs.mass);

  const double dp = d * (p - 1.0);
  c.pohozaev_grad = std::abs(gs.lp1 - 2.0 * (p + 1.0) / dp * gs.grad_sq) / gs.lp1;
  c.pohozaev_mass = std::abs(gs.lp1 - 2.0 * (p + 1.0) / (2.0 * (p + 1.0) - dp) * gs.mass) / gs.lp1;
  const double K = gs.grad_sq - dp / (2.0 * (p + 1.0)) * gs.lp1;
  c.virial = std::abs(K) / gs.grad_sq;
  const double e_formula = (dp - 4.0) / (2.0 * dp) * gs.grad_sq;
  c.energy_formula = std::abs(gs.energy() - e_formula) / std::abs(gs.energy());
  c.symmetry = symmetry_defect(q);

  c.boundary = 0.0;
  c.min_interior = std::numeric_limits<double>::infinity();
  int idx[3];
  for (std::size_t i = 0; i < q.size(); ++i) {
    lat->unravel(i, idx);
    bool on_face = false, interior = true;
    for (int a = 0; a < d; ++a) {
      if (idx[a] == 0) on_face = true;
      if (std::abs(lat->x()[idx[a]]) > 0.5 * q.grid.L) interior = false;
    }
    if (on_face) c.boundary = std::max(c.boundary, std::abs(q.values[i]));
    if (interior) c.min_interior = std::min(c.min_interior, q.values[i].real());
  }
  return c;
}

Certificate certify(GroundState& gs, const CertificationTolerances& tol) {
  gs.certificate = evaluate_certificate(gs);
  const Certificate& c = gs.certificate;
  std::ostringstream fail;
  if (!(c.residual < tol.residual)) fail << " residual=" << c.residual;
  if (!(c.pohozaev_grad < tol.pohozaev)) fail << " pohozaev_grad=" << c.pohozaev_grad;
  if (!(c.pohozaev_mass < tol.pohozaev)) fail << " pohozaev_mass=" << c.pohozaev_mass;
  if (!(c.virial < tol.virial)) fail << " K/|∇Q|^2=" << c.virial;
  if (!(c.energy_formula < tol.pohozaev)) fail << " energy_formula=" << c.energy_formula;
  if (!(c.symmetry < tol.symmetry)) fail << " symmetry=" << c.symmetry;
  if (!(c.min_interior > 0.0)) fail << " min_interior=" << c.min_interior;
  if (!fail.str().empty()) throw NonConvergence("ground state failed certification:" + fail.str());
  if (!(c.boundary < tol.boundary)) {
    std::ostringstream os;
    os << "|Q| on the boundary is " << c.boundary << " (limit " << tol.boundary << "); enlarge L";
    throw ResolutionError(os.str());
  }
  return c;
}

GroundState solve_1d_closed_form(const PhysParams& params, const GridSpec& grid) {
  return solve_1d_closed_form(params, grid, default_tolerances(1, grid));
}

GroundState solve_1d_closed_form(const PhysParams& params, const GridSpec& grid,
                                 const CertificationTolerances& tol) {
  if (params.d != 1) throw PreconditionError("closed-form ground state exists only for d = 1");
  GroundState gs;
  gs.method = GroundStateMethod::ClosedForm;
  gs.profile = Field(params, grid);
  const auto lat = gs.profile.lattice();
  for (int j = 0; j < grid.n; ++j) gs.profile.values[j] = closed_form_profile(params.p, lat->x()[j]);
  fill_norms(gs);
  certify(gs, tol);
  return gs;
}

GroundState solve_petviashvili(const PhysParams& params, const GridSpec& grid,
                               const PetviashviliOptions& opts) {
  return solve_petviashvili(params, grid, opts, default_tolerances(params.d, grid));
}

GroundState solve_petviashvili(const PhysParams& params, const GridSpec& grid,
                               const PetviashviliOptions& opts, const CertificationTolerances& tol) {
  if (!(opts.tol > 0.0)) throw PreconditionError("Petviashvili tolerance must be positive");
  const double p = params.p;
  const double sigma = p / (p - 1.0);
  const auto lat = Lattice::get(params.d, grid);
  const auto& fft = Fft::get(params.d, grid.n);
  const std::size_t N = lat->size();
  const auto k2 = lat->k2();
  const double spec_w = lat->cell_volume() / static_cast<double>(N);

  Field w(params, grid);
  if (opts.seed) {
    require_same_grid(w, *opts.seed, "solve_petviashvili seed");
    for (std::size_t i = 0; i < N; ++i) w.values[i] = opts.seed->values[i].real();
  } else {
    const auto r2 = lat->r2();
    const double s2 = opts.seed_width * opts.seed_width;
    for (std::size_t i = 0; i < N; ++i) w.values[i] = opts.seed_amplitude * std::exp(-r2[i] / s2);
  }

  std::vector<cplx> wh(N), nl(N), nh(N), next(N);
  auto stabilizer = [&] {
    for (std::size_t i = 0; i < N; ++i) {
      const double v = w.values[i].real();
      nl[i] = std::pow(std::abs(v), p - 1.0) * v;
    }
    fft.forward(w.values, wh);
    fft.forward(nl, nh);
    const double num = kernels::reduce(N, [&](std::size_t i) { return (1.0 + k2[i]) * std::norm(wh[i]); });
    const double den = kernels::reduce(N, [&](std::size_t i) { return (std::conj(wh[i]) * nh[i]).real(); });
    return num / den;
  };

  // The factor scales like c^{1-p} under w -> c w; rescale the Gaussian seed
  // so the first iteration starts at factor 1.
  if (!opts.seed) {
    const double g0 = stabilizer();
    if (!(g0 > 0.0) || !std::isfinite(g0)) throw NonConvergence("Petviashvili seed has no positive nonlinear pairing");
    const double c = std::pow(g0, 1.0 / (p - 1.0));
    for (auto& z : w.values) z *= c;
  }

  GroundState gs;
  gs.method = GroundStateMethod::Petviashvili;
  int it = 0;
  double gamma = 1.0;
  for (;;) {
    if (it >= opts.max_iter) throw NonConvergence("Petviashvili did not converge in " + std::to_string(opts.max_iter) + " iterations");
    ++it;
    gamma = stabilizer();
    if (!(gamma > 0.1 && gamma < 10.0)) {
      std::ostringstream os;
      os << "stabilizing factor left (0.1, 10): " << gamma << " at iteration " << it;
      throw NonConvergence(os.str());
    }
    const double g = std::pow(gamma, sigma);
    for (std::size_t i = 0; i < N; ++i) next[i] = g * nh[i] / (1.0 + k2[i]);
    const double dist = std::sqrt(spec_w * kernels::reduce(N, [&](std::size_t i) {
      return (1.0 + k2[i]) * std::norm(next[i] - wh[i]);
    }));
    fft.inverse(next, nl);
    for (std::size_t i = 0; i < N; ++i) w.values[i] = nl[i].real();
    if (!std::isfinite(dist)) throw NonConvergence("Petviashvili iterate became non-finite");
    if (dist < opts.tol) break;
  }
  gs.profile = std::move(w);
  gs.certificate.iterations = it;
  gs.certificate.last_gamma = gamma;
  fill_norms(gs);
  certify(gs, tol);
  return gs;
}

namespace {

// Band-limited interpolation weight between a target point and a source node
// separated by delta: the symmetric Dirichlet kernel with a cosine Nyquist term.
double dirichlet_weight(double delta, const GridSpec& src) {
  const int n = src.n;
  const double theta = std::numbers::pi / src.L * delta;
  const double s = std::sin(0.5 * theta);
  double sum;
  if (std::abs(s) < 1e-14) {
    sum = static_cast<double>(n - 1) + std::cos(0.5 * n * theta);
  } else {
    sum = std::sin(0.5 * (n - 1) * theta) / s + std::cos(0.5 * n * theta);
  }
  return sum / n;
}

}  // namespace

Field GroundState::sample_scaled(const GridSpec& target, double b) const {
  const PhysParams& pp = params();
  Field out(pp, target);
  const auto tl = Lattice::get(pp.d, target);
  if (method == GroundStateMethod::ClosedForm) {
    for (int j = 0; j < target.n; ++j) out.values[j] = closed_form_profile(pp.p, b * tl->x()[j]);
    return out;
  }
  // Separable interpolation: one dense 1-D matrix applied along every axis.
  const GridSpec& src = grid();
  const auto sl = profile.lattice();
  const int ns = src.n, nt = target.n, d = pp.d;
  std::vector<double> mat(static_cast<std::size_t>(nt) * ns, 0.0);
  for (int i = 0; i < nt; ++i) {
    const double s = b * tl->x()[i];
    if (s < -src.L || s >= src.L) continue;
    for (int j = 0; j < ns; ++j) mat[static_cast<std::size_t>(i) * ns + j] = dirichlet_weight(s - sl->x()[j], src);
  }
  // Real profile: interpolate the real part only.
  std::vector<double> cur(profile.size());
  for (std::size_t i = 0; i < cur.size(); ++i) cur[i] = profile.values[i].real();
  std::vector<int> shape(d, ns);
  for (int a = 0; a < d; ++a) {
    std::size_t outer = 1, inner = 1;
    for (int c = 0; c < a; ++c) outer *= shape[c];
    for (int c = a + 1; c < d; ++c) inner *= shape[c];
    std::vector<double> nxt(outer * nt * inner, 0.0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t o = 0; o < static_cast<std::ptrdiff_t>(outer); ++o) {
      for (int i = 0; i < nt; ++i) {
        const double* row = &mat[static_cast<std::size_t>(i) * ns];
        double* dst = &nxt[(o * nt + i) * inner];
        for (int j = 0; j < ns; ++j) {
          const double wgt = row[j];
          if (wgt == 0.0) continue;
          const double* srcp = &cur[(o * ns + j) * inner];
          for (std::size_t q = 0; q < inner; ++q) dst[q] += wgt * srcp[q];
        }
      }
    }
    cur.swap(nxt);
    shape[a] = nt;
  }
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] = cur[i];
  return out;
}

}  // namespace nls
