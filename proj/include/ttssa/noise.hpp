#pragma once

#include <cstdint>
#include <random>
#include <span>

#include "ttssa/linalg.hpp"

namespace ttssa {

enum class Side { Slow, Fast };

/// Bias and conditional-variance envelopes
///   B_t = b0 (t + t_offset)^{-gamma},   M_t = m0 (t + t_offset)^{nu}
/// for the slow (S) and fast (F) measurements.
struct NoiseBoundSchedule {
    double b0_slow = 0.0, b0_fast = 0.0;
    double gamma_slow = 0.0, gamma_fast = 0.0;
    double m0_slow = 0.0, m0_fast = 0.0;
    double nu_slow = 0.0, nu_fast = 0.0;
    std::int64_t t_offset = 1;

    /// Throws std::invalid_argument (negative coefficients, nu >= 0.5, t_offset < 1).
    void validate() const;

    double bias_bound(std::int64_t t, Side side) const;
    double variance_bound(std::int64_t t, Side side) const;

    friend bool operator==(const NoiseBoundSchedule&, const NoiseBoundSchedule&) = default;
};

/// Seeded Gaussian stream. Owned by exactly one run at a time.
class RngState {
public:
    explicit RngState(std::uint64_t seed);

    std::uint64_t seed() const { return seed_; }
    /// Number of standard normal draws taken so far.
    std::uint64_t position() const { return position_; }

    double standard_normal();

private:
    std::uint64_t seed_;
    std::uint64_t position_ = 0;
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Independent stream for ensemble member run_index, derived from the parent seed only.
RngState split_rng(const RngState& rng, std::uint64_t run_index);

struct NoiseSample {
    Vector bias;
    Vector fluctuation;
};

struct Measurement {
    Vector value;
    NoiseSample noise;
};

/// drift + B_t (1 + u_norm) e_1 + M_t sqrt(1 + u_norm^2) w / sqrt(n),  w ~ N(0, I_n).
Measurement sample_measurement(std::int64_t t, std::span<const double> drift, double u_norm, Side side,
                               const NoiseBoundSchedule& sched, RngState& rng);

/// In-place variant of sample_measurement; draws the same numbers from rng.
void perturb_measurement(std::int64_t t, std::span<double> drift, double u_norm, Side side,
                         const NoiseBoundSchedule& sched, RngState& rng);

}  // namespace ttssa
