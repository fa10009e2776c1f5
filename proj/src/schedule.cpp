#include "ttssa/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ttssa {

void PowerLawSchedule::validate() const {
    if (!(std::isfinite(coeff) && coeff > 0.0)) throw std::invalid_argument("schedule coeff must be > 0");
    if (!(exponent >= 0.0 && exponent <= 1.5))
        throw std::invalid_argument("schedule exponent must lie in [0, 1.5]");
    if (t_offset < 1) throw std::invalid_argument("schedule t_offset must be >= 1");
}

double PowerLawSchedule::value(std::int64_t t) const {
    return coeff * std::pow(static_cast<double>(t + t_offset), -exponent);
}

bool ConditionReport::boundedness_conditions() const {
    return sq_summable_alpha && sq_summable_beta && bias_summable_slow && bias_summable_fast &&
           var_summable_slow && var_summable_fast;
}

bool ConditionReport::convergence_conditions() const {
    return boundedness_conditions() && alpha_divergent && timescale_separated;
}

ConditionReport validate(const PowerLawSchedule& alpha, const PowerLawSchedule& beta,
                         const NoiseBoundSchedule& noise) {
    const double pa = alpha.exponent, pb = beta.exponent;
    ConditionReport r;
    r.sq_summable_alpha = 2.0 * pa > 1.0;
    r.sq_summable_beta = 2.0 * pb > 1.0;
    r.bias_summable_slow = noise.b0_slow == 0.0 || pa + noise.gamma_slow > 1.0;
    r.bias_summable_fast = noise.b0_fast == 0.0 || pb + noise.gamma_fast > 1.0;
    r.var_summable_slow = noise.m0_slow == 0.0 || 2.0 * pa - 2.0 * noise.nu_slow > 1.0;
    r.var_summable_fast = noise.m0_fast == 0.0 || 2.0 * pb - 2.0 * noise.nu_fast > 1.0;
    r.alpha_divergent = pa <= 1.0;
    r.beta_divergent = pb <= 1.0;
    r.timescale_separated = pa > pb;
    return r;
}

double rate_guarantee(const NoiseBoundSchedule& noise) {
    const double gs = noise.b0_slow == 0.0 ? 1.0 : noise.gamma_slow;
    const double gf = noise.b0_fast == 0.0 ? 1.0 : noise.gamma_fast;
    const double ns = noise.m0_slow == 0.0 ? 0.0 : noise.nu_slow;
    const double nf = noise.m0_fast == 0.0 ? 0.0 : noise.nu_fast;
    return std::min({gs, gf, 1.0 - 2.0 * std::max(ns, nf), 1.0});
}

}  // namespace ttssa
