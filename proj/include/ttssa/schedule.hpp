#pragma once

#include <cstdint>

#include "ttssa/noise.hpp"

namespace ttssa {

/// Step size coeff * (t + t_offset)^{-exponent}.
struct PowerLawSchedule {
    double coeff = 1.0;
    double exponent = 1.0;
    std::int64_t t_offset = 1;

    /// coeff > 0, exponent in [0, 1.5], t_offset >= 1. Throws std::invalid_argument.
    void validate() const;
    double value(std::int64_t t) const;

    friend bool operator==(const PowerLawSchedule&, const PowerLawSchedule&) = default;
};

/// Summability verdicts for power-law schedules, decided from exponents alone
/// (sum_t t^{-p} < infinity iff p > 1).
struct ConditionReport {
    bool sq_summable_alpha = false;    // sum alpha_t^2
    bool sq_summable_beta = false;     // sum beta_t^2
    bool bias_summable_slow = false;   // sum alpha_t B_{t,S}
    bool bias_summable_fast = false;   // sum beta_t B_{t,F}
    bool var_summable_slow = false;    // sum alpha_t^2 M_{t,S}^2
    bool var_summable_fast = false;    // sum beta_t^2 M_{t,F}^2
    bool alpha_divergent = false;      // sum alpha_t = infinity
    bool beta_divergent = false;       // sum beta_t = infinity
    bool timescale_separated = false;  // alpha_t / beta_t -> 0

    /// Boundedness hypotheses (all six summability verdicts).
    bool boundedness_conditions() const;
    /// Boundedness plus alpha divergence and time-scale separation.
    bool convergence_conditions() const;
};

ConditionReport validate(const PowerLawSchedule& alpha, const PowerLawSchedule& beta,
                         const NoiseBoundSchedule& noise);

/// Supremum of the guaranteed decay exponent, min(gamma_S, gamma_F, 1 - 2 max(nu_S, nu_F)),
/// capped at 1. A zero bias coefficient counts as gamma = 1, a zero variance coefficient as nu = 0.
double rate_guarantee(const NoiseBoundSchedule& noise);

}  // namespace ttssa
