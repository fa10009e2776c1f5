#include "ttssa/solver.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace ttssa {

namespace {

using Buffer = std::array<double, kMaxDim>;

bool should_record(std::int64_t t, std::int64_t stride, bool dense_prefix) {
    return t % stride == 0 || (dense_prefix && t < kDensePrefix);
}

Vector resolve_initial(const std::optional<Vector>& v, std::size_t n, const char* name) {
    if (!v) return Vector(n, 1.0);
    if (v->size() != n) throw std::invalid_argument(std::string(name) + " has the wrong dimension");
    if (!all_finite(*v)) throw std::invalid_argument(std::string(name) + " must be finite");
    return *v;
}

}  // namespace

const char* to_string(RunStatus status) {
    return status == RunStatus::Completed ? "completed" : "diverged";
}

void RunConfig::validate() const {
    alpha.validate();
    beta.validate();
    noise.validate();
    if (horizon < 0) throw std::invalid_argument("horizon must be >= 0");
    if (stride < 1) throw std::invalid_argument("stride must be >= 1");
    if (!(divergence_threshold > 0.0)) throw std::invalid_argument("divergence_threshold must be > 0");
    if (!(lyapunov.d_mix > 0.0 && lyapunov.d_mix < 1.0))
        throw std::invalid_argument("d_mix must lie in (0, 1)");
}

Experiment prepare(const RunConfig& cfg) {
    cfg.validate();
    ProblemSpec spec(cfg.problem);
    const Matrix qs = cfg.lyapunov.q_slow.value_or(Matrix::identity(spec.slow_dim()));
    const Matrix qf = cfg.lyapunov.q_fast.value_or(Matrix::identity(spec.fast_dim()));
    LyapunovData ld = build_lyapunov(spec, qs, qf, cfg.lyapunov.d_mix);
    Vector theta0 = resolve_initial(cfg.theta0, spec.slow_dim(), "theta0");
    Vector phi0 = resolve_initial(cfg.phi0, spec.fast_dim(), "phi0");
    return Experiment{cfg, std::move(spec), std::move(ld), std::move(theta0), std::move(phi0)};
}

IterateState ttssa_step(IterateState state, double alpha, double beta, const ProblemSpec& spec,
                        const NoiseBoundSchedule& noise, RngState& rng) {
    const std::size_t d = spec.slow_dim(), l = spec.fast_dim();
    Buffer lam{}, y{}, z{};
    const auto y_span = std::span(y).first(d);
    const auto z_span = std::span(z).first(l);

    spec.lambda_into(state.theta, std::span(lam).first(l));
    double mismatch_sq = 0.0;
    for (std::size_t i = 0; i < l; ++i) {
        const double e = state.phi[i] - lam[i];
        mismatch_sq += e * e;
    }
    const double u_norm = std::sqrt(norm_sq(state.theta) + mismatch_sq);

    spec.f_into(state.theta, state.phi, y_span);
    spec.g_into(state.theta, state.phi, z_span);
    perturb_measurement(state.t, y_span, u_norm, Side::Slow, noise, rng);
    perturb_measurement(state.t, z_span, u_norm, Side::Fast, noise, rng);

    for (std::size_t i = 0; i < d; ++i) state.theta[i] += alpha * y[i];
    for (std::size_t i = 0; i < l; ++i) state.phi[i] += beta * z[i];
    ++state.t;
    return state;
}

TrajectoryRecord make_record(std::int64_t t, std::span<const double> theta, std::span<const double> phi,
                             double alpha, double beta, const ProblemSpec& spec, const LyapunovData& ld) {
    Buffer mismatch{};
    const auto e = std::span(mismatch).first(spec.fast_dim());
    spec.lambda_into(theta, e);
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = phi[i] - e[i];
    const auto v = eval_V_from_mismatch(ld, theta, e);
    return {
        .t = t,
        .theta_norm_sq = norm_sq(theta),
        .mismatch_norm_sq = norm_sq(e),
        .v_slow = v.slow,
        .v_fast = v.fast,
        .v_combined = v.combined,
        .alpha = alpha,
        .beta = beta,
    };
}

Trajectory run(const Experiment& ex, RngState rng) {
    const RunConfig& cfg = ex.config;
    Trajectory traj;
    IterateState state{.t = 0, .theta = ex.theta0, .phi = ex.phi0};

    auto record_now = [&](std::int64_t t) {
        return make_record(t, state.theta, state.phi, cfg.alpha.value(t), cfg.beta.value(t), ex.spec,
                           ex.lyapunov);
    };

    TrajectoryRecord rec = record_now(0);
    traj.records.push_back(rec);
    while (state.t < cfg.horizon) {
        if (!(rec.v_combined <= cfg.divergence_threshold)) {
            traj.status = RunStatus::Diverged;
            break;
        }
        const std::int64_t t = state.t;
        state = ttssa_step(std::move(state), cfg.alpha.value(t), cfg.beta.value(t), ex.spec, cfg.noise, rng);
        ++traj.steps_taken;
        rec = record_now(state.t);
        const bool diverged = !(rec.v_combined <= cfg.divergence_threshold);
        if (diverged || state.t == cfg.horizon || should_record(state.t, cfg.stride, cfg.dense_prefix))
            traj.records.push_back(rec);
    }
    if (!(rec.v_combined <= cfg.divergence_threshold)) traj.status = RunStatus::Diverged;
    return traj;
}

Trajectory run(const RunConfig& cfg) {
    const Experiment ex = prepare(cfg);
    return run(ex, RngState(cfg.seed));
}

std::vector<OdeSample> integrate_ode(const ProblemSpec& spec, const LyapunovData& ld, double eps,
                                     std::span<const double> theta0, std::span<const double> phi0,
                                     double h, double t_final) {
    if (!(eps > 0.0)) throw InvalidEpsilon();
    if (!(h > 0.0)) throw std::invalid_argument("ODE step must be > 0");
    if (h > kMaxStepRatio * eps * (1.0 + 1e-12)) throw StepTooLarge();
    const std::size_t d = spec.slow_dim(), l = spec.fast_dim(), n = d + l;
    if (theta0.size() != d || phi0.size() != l) throw DimensionMismatch("ODE initial state dimensions");

    auto field = [&](const Vector& x) {
        const std::span<const double> th(x.data(), d), ph(x.data() + d, l);
        Vector dx(n);
        spec.f_into(th, ph, std::span(dx).first(d));
        spec.g_into(th, ph, std::span(dx).subspan(d, l));
        for (std::size_t i = d; i < n; ++i) dx[i] /= eps;
        return dx;
    };
    auto sample = [&](double time, const Vector& x) {
        OdeSample s;
        s.time = time;
        s.theta.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(d));
        s.phi.assign(x.begin() + static_cast<std::ptrdiff_t>(d), x.end());
        s.v_combined = eval_V(ld, spec, s.theta, s.phi).combined;
        return s;
    };

    Vector x(n);
    std::copy(theta0.begin(), theta0.end(), x.begin());
    std::copy(phi0.begin(), phi0.end(), x.begin() + static_cast<std::ptrdiff_t>(d));

    const auto steps = static_cast<std::int64_t>(std::llround(t_final / h));
    std::vector<OdeSample> out;
    out.reserve(static_cast<std::size_t>(steps) + 1);
    out.push_back(sample(0.0, x));

    Vector tmp(n);
    for (std::int64_t k = 0; k < steps; ++k) {
        const Vector k1 = field(x);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
        const Vector k2 = field(tmp);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
        const Vector k3 = field(tmp);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * k3[i];
        const Vector k4 = field(tmp);
        for (std::size_t i = 0; i < n; ++i) x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        out.push_back(sample(static_cast<double>(k + 1) * h, x));
    }
    return out;
}

}  // namespace ttssa
