#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ttssa/linalg.hpp"
#include "ttssa/lyapunov.hpp"
#include "ttssa/noise.hpp"
#include "ttssa/problem.hpp"
#include "ttssa/schedule.hpp"

namespace ttssa {

struct StepTooLarge : std::invalid_argument {
    StepTooLarge() : std::invalid_argument("ODE step h exceeds 0.1 * eps") {}
};

/// Maximum h / eps accepted by integrate_ode.
inline constexpr double kMaxStepRatio = 0.1;
/// Records for t below this are always kept when dense_prefix is on.
inline constexpr std::int64_t kDensePrefix = 100;

struct IterateState {
    std::int64_t t = 0;
    Vector theta;
    Vector phi;
};

struct TrajectoryRecord {
    std::int64_t t = 0;
    double theta_norm_sq = 0;
    double mismatch_norm_sq = 0;
    double v_slow = 0;
    double v_fast = 0;
    double v_combined = 0;
    double alpha = 0;
    double beta = 0;

    friend bool operator==(const TrajectoryRecord&, const TrajectoryRecord&) = default;
};

enum class RunStatus { Completed, Diverged };

const char* to_string(RunStatus status);

struct Trajectory {
    std::vector<TrajectoryRecord> records;
    RunStatus status = RunStatus::Completed;
    /// Number of iteration steps actually executed.
    std::int64_t steps_taken = 0;

    friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

struct LyapunovConfig {
    std::optional<Matrix> q_slow;  // identity when unset
    std::optional<Matrix> q_fast;
    double d_mix = 0.5;
};

struct RunConfig {
    ProblemDefinition problem = reference_coupling_unstable_problem();
    PowerLawSchedule alpha{.coeff = 1.0, .exponent = 1.0, .t_offset = 1};
    PowerLawSchedule beta{.coeff = 1.0, .exponent = 0.9, .t_offset = 1};
    NoiseBoundSchedule noise;
    LyapunovConfig lyapunov;
    std::optional<Vector> theta0;  // all-ones when unset
    std::optional<Vector> phi0;
    std::int64_t horizon = 1000;
    std::int64_t stride = 1;
    bool dense_prefix = true;
    double divergence_threshold = 1e9;
    std::uint64_t seed = 1;

    /// Throws std::invalid_argument.
    void validate() const;
};

/// A RunConfig with its problem, Lyapunov data and initial state resolved once,
/// shareable read-only between concurrent runs.
struct Experiment {
    RunConfig config;
    ProblemSpec spec;
    LyapunovData lyapunov;
    Vector theta0;
    Vector phi0;
};

Experiment prepare(const RunConfig& cfg);

/// One step of theta += alpha y, phi += beta z with y, z noisy measurements of f and g.
IterateState ttssa_step(IterateState state, double alpha, double beta, const ProblemSpec& spec,
                        const NoiseBoundSchedule& noise, RngState& rng);

TrajectoryRecord make_record(std::int64_t t, std::span<const double> theta, std::span<const double> phi,
                             double alpha, double beta, const ProblemSpec& spec, const LyapunovData& ld);

/// Iterates for config.horizon steps from (theta0, phi0), recording step 0, every stride-th step
/// (every step below 100 with dense_prefix) and the final step. Stops with status Diverged as soon
/// as V_d exceeds the divergence threshold or becomes non-finite.
Trajectory run(const Experiment& ex, RngState rng);
Trajectory run(const RunConfig& cfg);

struct OdeSample {
    double time = 0;
    Vector theta;
    Vector phi;
    double v_combined = 0;
};

/// Classical RK4 on theta' = f(theta, phi), eps phi' = g(theta, phi), sampled every step
/// (including time 0). Throws InvalidEpsilon for eps <= 0 and StepTooLarge when h > 0.1 eps.
std::vector<OdeSample> integrate_ode(const ProblemSpec& spec, const LyapunovData& ld, double eps,
                                     std::span<const double> theta0, std::span<const double> phi0,
                                     double h, double t_final);

}  // namespace ttssa
