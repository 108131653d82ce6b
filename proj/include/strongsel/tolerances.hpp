// =============================================================================
// tolerances.hpp — Centralized numeric tolerances.
//
// One record so that library invariants and the acceptance suite reference
// the same constants.
// =============================================================================
#pragma once

namespace strongsel {

struct Tolerances {
    double simplex = 1e-12;         // simplex / row-stochasticity residual
    double cross_check = 1e-9;      // dual-route coefficient agreement (relative)
    double lemma_identity = 1e-10;  // Lemma-type table identities (relative)
    double consistency = 1e-8;      // sum_i q(n+e_i) = q(n), interior states
    double rate_identity = 1e-9;    // ASG total-rate closed form (relative)
    double generator_residual = 1e-10;     // duality generator identity, analytic
    double generator_residual_fd = 1e-6;   // same, by finite differences
};

inline constexpr Tolerances tol{};

}  // namespace strongsel
