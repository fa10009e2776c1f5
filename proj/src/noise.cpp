#include "ttssa/noise.hpp"

#include <cmath>
#include <stdexcept>

namespace ttssa {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double envelope(double coeff, double exponent, std::int64_t t, std::int64_t offset) {
    if (coeff == 0.0) return 0.0;
    return coeff * std::pow(static_cast<double>(t + offset), exponent);
}

}  // namespace

void NoiseBoundSchedule::validate() const {
    for (double c : {b0_slow, b0_fast, gamma_slow, gamma_fast, m0_slow, m0_fast, nu_slow, nu_fast})
        if (!std::isfinite(c) || c < 0.0)
            throw std::invalid_argument("noise coefficients and exponents must be finite and >= 0");
    if (nu_slow >= 0.5 || nu_fast >= 0.5)
        throw std::invalid_argument("variance growth exponents must be < 0.5");
    if (t_offset < 1) throw std::invalid_argument("noise t_offset must be >= 1");
}

double NoiseBoundSchedule::bias_bound(std::int64_t t, Side side) const {
    return side == Side::Slow ? envelope(b0_slow, -gamma_slow, t, t_offset)
                              : envelope(b0_fast, -gamma_fast, t, t_offset);
}

double NoiseBoundSchedule::variance_bound(std::int64_t t, Side side) const {
    return side == Side::Slow ? envelope(m0_slow, nu_slow, t, t_offset)
                              : envelope(m0_fast, nu_fast, t, t_offset);
}

RngState::RngState(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

// Marsaglia polar method on 53-bit uniforms: the output depends only on mt19937_64,
// which the standard pins down bit for bit.
double RngState::standard_normal() {
    ++position_;
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * (static_cast<double>(engine_() >> 11) * 0x1.0p-53) - 1.0;
        v = 2.0 * (static_cast<double>(engine_() >> 11) * 0x1.0p-53) - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double scale = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * scale;
    has_spare_ = true;
    return u * scale;
}

RngState split_rng(const RngState& rng, std::uint64_t run_index) {
    return RngState(splitmix64(rng.seed() ^ splitmix64(run_index + 0x632be59bd9b4e019ULL)));
}

void perturb_measurement(std::int64_t t, std::span<double> drift, double u_norm, Side side,
                         const NoiseBoundSchedule& sched, RngState& rng) {
    if (drift.empty()) return;
    const double bias = sched.bias_bound(t, side) * (1.0 + u_norm);
    drift[0] += bias;
    const double m = sched.variance_bound(t, side);
    if (m == 0.0) return;
    const double scale =
        m * std::sqrt(1.0 + u_norm * u_norm) / std::sqrt(static_cast<double>(drift.size()));
    for (double& x : drift) x += scale * rng.standard_normal();
}

Measurement sample_measurement(std::int64_t t, std::span<const double> drift, double u_norm, Side side,
                               const NoiseBoundSchedule& sched, RngState& rng) {
    const std::size_t n = drift.size();
    Measurement out;
    out.noise.bias.assign(n, 0.0);
    out.noise.fluctuation.assign(n, 0.0);
    if (n > 0) out.noise.bias[0] = sched.bias_bound(t, side) * (1.0 + u_norm);
    const double m = sched.variance_bound(t, side);
    if (m != 0.0) {
        const double scale = m * std::sqrt(1.0 + u_norm * u_norm) / std::sqrt(static_cast<double>(n));
        for (double& x : out.noise.fluctuation) x = scale * rng.standard_normal();
    }
    out.value.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        out.value[i] = drift[i] + out.noise.bias[i] + out.noise.fluctuation[i];
    return out;
}

}  // namespace ttssa
