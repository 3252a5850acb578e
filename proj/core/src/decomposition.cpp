#include "credo/decomposition.hpp"

#include <cmath>

#include "credo/errors.hpp"

namespace credo {

double aleatoric_width(const EndpointDraws& draws) {
    const auto b_count = draws.q_lower.size();
    if (b_count < 1) throw Error("aleatoric_width: empty draws");
    return (draws.q_upper - draws.q_lower).mean();
}

Decomposition decompose(const Envelope& env, const EndpointDraws& draws, double tau_hat) {
    if (!std::isfinite(tau_hat)) {
        throw Error("decompose: undefined for infinite tau_hat");
    }
    Decomposition d;
    d.aleatoric = aleatoric_width(draws);
    d.epistemic = (env.upper - env.lower) - d.aleatoric;
    d.slack = 2.0 * tau_hat;
    d.total = d.aleatoric + d.epistemic + d.slack;
    d.epistemic_negative = d.epistemic < 0.0;
    return d;
}

double epistemic_fraction(const Decomposition& d) {
    const double envelope_width = d.aleatoric + d.epistemic;
    if (envelope_width == 0.0) return 0.0;
    return d.epistemic / envelope_width;
}

}  // namespace credo
