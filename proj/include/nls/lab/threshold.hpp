#pragma once

#include "nls/field.hpp"
#include "nls/functionals.hpp"
#include "nls/ground_state.hpp"

namespace nls::lab {

/// Parameters of the scaled-profile family b^{d/2} Q(bx) exp(iγ|x|²).
struct ThresholdFamily {
  double b = 1.0;
  double gamma = 0.0;
  double gamma_sq = 0.0;
};

/// γ² = (E(Q) - f(b)||∇Q||²) b² / (2 ||xQ||²), f(b) = b²/2 - b^α/α,
/// α = d(p-1)/2; this places the datum on the energy level of Q.
double threshold_gamma_sq(const GroundState& Q, double b);

/// b >= 1. phase_sign = -1 gives an inward (focusing) phase. Throws
/// ConstructionFailed unless M and E match Q within tau and, for b > 1, K < 0.
Field make_threshold_datum(const GroundState& Q, double b, int phase_sign, double tau = kTauMen);

/// 0 < b < 1 with an outgoing phase; requires K > 0 on the threshold level.
Field make_threshold_kpos_datum(const GroundState& Q, double b, double tau = kTauMen);

/// a Q, optionally boosted by exp(i v·x) along the first axis.
Field make_scaled_datum(const GroundState& Q, double amplitude, double boost = 0.0);

}  // namespace nls::lab
