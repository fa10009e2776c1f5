#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "ttssa/lyapunov.hpp"
#include "ttssa/noise.hpp"
#include "ttssa/solver.hpp"

namespace ttssa {

struct InsufficientData : std::invalid_argument {
    InsufficientData() : std::invalid_argument("rate fit needs >= 10 positive points with t >= 1 in window") {}
};
struct LengthMismatch : std::invalid_argument {
    LengthMismatch() : std::invalid_argument("sequences must have equal lengths") {}
};
struct GridMismatch : std::invalid_argument {
    GridMismatch() : std::invalid_argument("trajectories do not share a record grid") {}
};

struct SeriesPoint {
    double t = 0;
    double value = 0;
};

enum class Field { ThetaNormSq, MismatchNormSq, VSlow, VFast, VCombined };

std::vector<SeriesPoint> series(const Trajectory& traj, Field field);

struct FitWindow {
    double t_lo = 1e3;
    double t_hi = 1e5;
};

struct RateEstimate {
    double eta_hat = 0;  // +infinity when the window is identically zero
    double intercept = 0;
    FitWindow window;
    double r_squared = 0;
    std::size_t points = 0;
};

/// Least squares of log V on log t over the window; eta_hat = -slope.
/// Points with V <= 1e-300 are dropped; throws InsufficientData below 10 usable points.
RateEstimate fit_rate(std::span<const SeriesPoint> series, FitWindow window);

struct SupermartingaleCheck {
    bool holds = true;
    std::optional<std::size_t> first_violation;
};

/// Pathwise z_{t+1} <= (1 + f_t) z_t + g_t - h_t for every t with z_{t+1} defined,
/// tolerance 1e-12 (1 + z_t). Throws LengthMismatch, std::invalid_argument on negative entries.
SupermartingaleCheck check_rs_inequality(std::span<const double> z, std::span<const double> f,
                                         std::span<const double> g, std::span<const double> h);

struct RateConditionCheck {
    bool step_condition = false;         // alpha_t - eta / t >= 0 for T <= t < n, exact
    bool weighted_g_convergent = false;  // heuristic: last decade adds < 1% to sum (t+1)^eta g_t
    bool alpha_excess_divergent = false; // heuristic: last decade adds >= 1% to sum [alpha_t - eta/t]
    double weighted_g_sum = 0;
    double alpha_excess_sum = 0;

    bool holds() const { return step_condition && weighted_g_convergent && alpha_excess_divergent; }
};

/// Finite-horizon check of the rate conditions; sequences are indexed from t = 0.
RateConditionCheck check_rate_conditions(std::span<const double> alpha, std::span<const double> g,
                                               double eta, std::int64_t first_t);

struct ResidualBound {
    double slow = 0;
    double fast = 0;
    double combined = 0;
};

/// Slow (three-term) and fast (six-term) residuals at one record, with
/// |u_t|^2 = theta_norm_sq + mismatch_norm_sq.
ResidualBound residual_bounds(const TrajectoryRecord& rec, const NoiseBoundSchedule& noise,
                              const LyapunovData& ld);

struct DiagnosticsReport {
    double sup_vd = 0;
    double sup_vd_early = 0;  // t < 100
    double sup_vd_late = 0;   // t >= 100
    double partial_sum_alpha_vd = 0;
    double partial_sum_beta_mismatch = 0;
    double tail_fraction_alpha_vd = 0;
    double tail_fraction_beta_mismatch = 0;
    bool diverged = false;

    /// sup over t >= 100 does not exceed sup over t < 100.
    bool pathwise_bounded() const { return sup_vd_late <= sup_vd_early; }
};

/// Sums are left Riemann sums over the record grid: each record is weighted by the gap
/// to the next one, so a stride-1 trajectory gives the exact sum over executed steps.
/// "Tail" means records with t >= t_last / 10.
DiagnosticsReport diagnostics(const Trajectory& traj);

/// Pointwise mean of every recorded field. Throws GridMismatch or std::invalid_argument (empty).
Trajectory ensemble_mean(std::span<const Trajectory> runs);

}  // namespace ttssa
