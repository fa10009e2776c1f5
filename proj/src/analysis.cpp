#include "ttssa/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ttssa {

namespace {

constexpr double kZeroFloor = 1e-300;
constexpr std::size_t kMinFitPoints = 10;
constexpr double kHeuristicFraction = 0.01;

double field_value(const TrajectoryRecord& r, Field f) {
    switch (f) {
        case Field::ThetaNormSq: return r.theta_norm_sq;
        case Field::MismatchNormSq: return r.mismatch_norm_sq;
        case Field::VSlow: return r.v_slow;
        case Field::VFast: return r.v_fast;
        case Field::VCombined: return r.v_combined;
    }
    return 0.0;
}

// Share of a partial sum contributed by terms with index in (n/10, n].
double last_decade_share(std::span<const double> terms, std::size_t first) {
    double total = 0.0, tail = 0.0;
    const std::size_t n = terms.size();
    for (std::size_t t = first; t < n; ++t) {
        total += terms[t];
        if (t * 10 > n - 1) tail += terms[t];
    }
    return total == 0.0 ? 0.0 : tail / total;
}

}  // namespace

std::vector<SeriesPoint> series(const Trajectory& traj, Field field) {
    std::vector<SeriesPoint> out;
    out.reserve(traj.records.size());
    for (const auto& r : traj.records) out.push_back({static_cast<double>(r.t), field_value(r, field)});
    return out;
}

RateEstimate fit_rate(std::span<const SeriesPoint> points, FitWindow window) {
    std::size_t in_window = 0;
    std::vector<double> xs, ys;
    for (const auto& p : points) {
        if (p.t < 1.0 || p.t < window.t_lo || p.t > window.t_hi) continue;
        ++in_window;
        if (p.value > kZeroFloor) {
            xs.push_back(std::log(p.t));
            ys.push_back(std::log(p.value));
        }
    }
    RateEstimate est;
    est.window = window;
    if (in_window >= kMinFitPoints && xs.empty()) {
        est.eta_hat = std::numeric_limits<double>::infinity();
        est.intercept = -std::numeric_limits<double>::infinity();
        est.r_squared = 1.0;
        return est;
    }
    if (xs.size() < kMinFitPoints) throw InsufficientData();

    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx, dy = ys[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) throw InsufficientData();
    const double slope = sxy / sxx;
    const double ss_res = std::max(0.0, syy - slope * sxy);

    est.eta_hat = -slope;
    est.intercept = my - slope * mx;
    est.r_squared = syy <= 0.0 ? 1.0 : std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
    est.points = xs.size();
    return est;
}

SupermartingaleCheck check_rs_inequality(std::span<const double> z, std::span<const double> f,
                                         std::span<const double> g, std::span<const double> h) {
    if (f.size() != z.size() || g.size() != z.size() || h.size() != z.size()) throw LengthMismatch();
    for (auto s : {z, f, g, h})
        if (std::any_of(s.begin(), s.end(), [](double x) { return !(x >= 0.0); }))
            throw std::invalid_argument("Robbins-Siegmund sequences must be nonnegative");

    for (std::size_t t = 0; t + 1 < z.size(); ++t) {
        const double bound = (1.0 + f[t]) * z[t] + g[t] - h[t];
        if (z[t + 1] > bound + 1e-12 * (1.0 + z[t])) return {.holds = false, .first_violation = t};
    }
    return {};
}

RateConditionCheck check_rate_conditions(std::span<const double> alpha, std::span<const double> g,
                                               double eta, std::int64_t first_t) {
    if (alpha.size() != g.size()) throw LengthMismatch();
    RateConditionCheck out;
    const std::size_t n = alpha.size();
    const std::size_t start = static_cast<std::size_t>(std::max<std::int64_t>(first_t, 1));

    out.step_condition = true;
    for (std::size_t t = start; t < n; ++t)
        if (alpha[t] - eta / static_cast<double>(t) < 0.0) {
            out.step_condition = false;
            break;
        }

    std::vector<double> weighted(n, 0.0), excess(n, 0.0);
    for (std::size_t t = 1; t < n; ++t) {
        weighted[t] = std::pow(static_cast<double>(t + 1), eta) * g[t];
        excess[t] = alpha[t] - eta / static_cast<double>(t);
    }
    for (std::size_t t = 1; t < n; ++t) {
        out.weighted_g_sum += weighted[t];
        out.alpha_excess_sum += excess[t];
    }
    out.weighted_g_convergent = last_decade_share(weighted, 1) < kHeuristicFraction;
    out.alpha_excess_divergent =
        out.alpha_excess_sum > 0.0 && last_decade_share(excess, 1) >= kHeuristicFraction;
    return out;
}

ResidualBound residual_bounds(const TrajectoryRecord& rec, const NoiseBoundSchedule& noise,
                              const LyapunovData& ld) {
    const double u2 = rec.theta_norm_sq + rec.mismatch_norm_sq;
    const double a = rec.alpha, b = rec.beta;
    const double bs = noise.bias_bound(rec.t, Side::Slow), bf = noise.bias_bound(rec.t, Side::Fast);
    const double ms = noise.variance_bound(rec.t, Side::Slow), mf = noise.variance_bound(rec.t, Side::Fast);

    auto three_terms = [&](double step, double bias, double var, double lip) {
        return step * bias * lip * (1.0 + 2.0 * u2) + step * step * bias * bias * lip * (1.0 + u2) +
               step * step * var * var * (lip / 2.0) * (1.0 + u2);
    };
    ResidualBound r;
    r.slow = three_terms(a, bs, ms, ld.lip_slow);
    r.fast = three_terms(a, bs, ms, ld.lip_fast) + three_terms(b, bf, mf, ld.lip_fast);
    r.combined = (1.0 - ld.d_mix) * r.slow + ld.d_mix * r.fast;
    return r;
}

DiagnosticsReport diagnostics(const Trajectory& traj) {
    DiagnosticsReport rep;
    rep.diverged = traj.status == RunStatus::Diverged;
    const auto& recs = traj.records;
    if (recs.empty()) return rep;

    const double tail_start = static_cast<double>(recs.back().t) / 10.0;
    double tail_alpha = 0.0, tail_beta = 0.0;
    for (std::size_t k = 0; k < recs.size(); ++k) {
        const auto& r = recs[k];
        rep.sup_vd = std::max(rep.sup_vd, r.v_combined);
        double& split_sup = r.t < kDensePrefix ? rep.sup_vd_early : rep.sup_vd_late;
        split_sup = std::max(split_sup, r.v_combined);
        if (k + 1 == recs.size()) break;
        const double w = static_cast<double>(recs[k + 1].t - r.t);
        const double sa = w * r.alpha * r.v_combined;
        const double sb = w * r.beta * r.mismatch_norm_sq;
        rep.partial_sum_alpha_vd += sa;
        rep.partial_sum_beta_mismatch += sb;
        if (static_cast<double>(r.t) >= tail_start) {
            tail_alpha += sa;
            tail_beta += sb;
        }
    }
    rep.tail_fraction_alpha_vd = rep.partial_sum_alpha_vd == 0.0 ? 0.0 : tail_alpha / rep.partial_sum_alpha_vd;
    rep.tail_fraction_beta_mismatch =
        rep.partial_sum_beta_mismatch == 0.0 ? 0.0 : tail_beta / rep.partial_sum_beta_mismatch;
    return rep;
}

Trajectory ensemble_mean(std::span<const Trajectory> runs) {
    if (runs.empty()) throw std::invalid_argument("ensemble_mean needs at least one trajectory");
    const auto& grid = runs.front().records;
    for (const auto& tr : runs) {
        if (tr.records.size() != grid.size()) throw GridMismatch();
        for (std::size_t k = 0; k < grid.size(); ++k)
            if (tr.records[k].t != grid[k].t) throw GridMismatch();
    }
    if (runs.size() == 1) return runs.front();

    Trajectory mean;
    mean.steps_taken = runs.front().steps_taken;
    mean.records.resize(grid.size());
    const double n = static_cast<double>(runs.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        TrajectoryRecord acc{.t = grid[k].t};
        for (const auto& tr : runs) {
            const auto& r = tr.records[k];
            acc.theta_norm_sq += r.theta_norm_sq;
            acc.mismatch_norm_sq += r.mismatch_norm_sq;
            acc.v_slow += r.v_slow;
            acc.v_fast += r.v_fast;
            acc.v_combined += r.v_combined;
            acc.alpha += r.alpha;
            acc.beta += r.beta;
        }
        acc.theta_norm_sq /= n;
        acc.mismatch_norm_sq /= n;
        acc.v_slow /= n;
        acc.v_fast /= n;
        acc.v_combined /= n;
        acc.alpha /= n;
        acc.beta /= n;
        mean.records[k] = acc;
    }
    for (const auto& tr : runs)
        if (tr.status == RunStatus::Diverged) mean.status = RunStatus::Diverged;
    return mean;
}

}  // namespace ttssa
