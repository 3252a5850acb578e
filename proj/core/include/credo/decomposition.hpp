#pragma once

#include "credo/envelope.hpp"
#include "credo/posterior.hpp"

namespace credo {

// Additive width breakdown of a final interval: |C(x)| = aleatoric +
// epistemic + slack. Epistemic may be negative under aggressive trimming;
// it is reported as-is with the flag set, never clamped, so the identity
// stays exact.
struct Decomposition {
    double aleatoric = 0.0;  // posterior mean draw length, >= 0
    double epistemic = 0.0;  // envelope width minus aleatoric
    double slack = 0.0;      // 2 * tau_hat
    double total = 0.0;
    bool epistemic_negative = false;
};

// (1/B) sum_b (q_upper[b] - q_lower[b]).
double aleatoric_width(const EndpointDraws& draws);

// Requires a finite tau_hat; an infinite conformal correction has no
// defined width breakdown.
Decomposition decompose(const Envelope& env, const EndpointDraws& draws, double tau_hat);

// Reporting normalization: epistemic / (aleatoric + epistemic). The slack is
// excluded — the ratio is relative to the non-conformalized envelope width.
double epistemic_fraction(const Decomposition& d);

}  // namespace credo
