#pragma once

#include <string>
#include <vector>

#include "nls/field.hpp"
#include "nls/ground_state.hpp"

namespace nls {

/// Relative tolerance for deciding M = M(Q) and E = E(Q).
inline constexpr double kTauMen = 1e-6;

enum class MenClass { Subthreshold, ThresholdKneg, ThresholdKzero, ThresholdKpos, Above };
std::string to_string(MenClass c);
bool is_threshold(MenClass c);

struct FunctionalRecord {
  double t = 0.0;
  double M = 0.0;
  double E = 0.0;
  std::vector<double> P;  ///< momentum Im ∫ conj(u) ∇u, one entry per axis
  double K = 0.0;
  double mu = 0.0;        ///< ||∇Q||^2 - ||∇u||^2
  double gradL2sq = 0.0;
  double Lp1 = 0.0;
  MenClass men_class = MenClass::Subthreshold;
};

/// Every functional of f relative to the ground state Q.
FunctionalRecord evaluate(const Field& f, const GroundState& Q, double tau_men = kTauMen);

/// K = ||∇u||^2 - d(p-1)/(2(p+1)) ||u||_{p+1}^{p+1}.
double virial_functional(const PhysParams& params, double grad_sq, double lp1);
double energy_functional(const PhysParams& params, double grad_sq, double lp1);

/// Classification from (M, E, K) against Q.
MenClass classify(const PhysParams& params, double M, double E, double K, const GroundState& Q,
                  double tau_men = kTauMen);

double sc(const PhysParams& params);

struct ThresholdProducts {
  double me_ratio = 0.0;    ///< M^{(1-sc)/sc} E relative to Q's; carries E's sign
  double grad_ratio = 0.0;  ///< ||u||^{1-sc} ||∇u||^{sc} relative to Q's
};

ThresholdProducts threshold_products(const Field& f, const GroundState& Q);
ThresholdProducts threshold_products(const PhysParams& params, double M, double E, double grad_sq,
                                     const GroundState& Q);

/// |K - (d(p-1)-4)/4 mu| / (|K| + |mu| + eps). Requires a threshold class.
double k_mu_relation_check(const FunctionalRecord& rec, const PhysParams& params);

}  // namespace nls
