#include "ttssa/lyapunov.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace ttssa {

namespace {

constexpr int kCertificationPoints = 100;
constexpr std::uint64_t kCertificationSeed = 0x5eedc0de;
constexpr double kCertificationTolerance = 1e-9;

double quad_form(const Matrix& p, std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.rows(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < p.cols(); ++j) row += p(i, j) * x[j];
        s += x[i] * row;
    }
    return s;
}

Vector random_point(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    Vector x(n);
    for (double& v : x) v = u(rng);
    return x;
}

void certify(const LyapunovData& ld, const ProblemSpec& spec) {
    std::mt19937_64 rng(kCertificationSeed);
    auto fail = [](const std::string& what) {
        throw CertificationFailed("Lyapunov certificate violated: " + what);
    };
    for (int k = 0; k < kCertificationPoints; ++k) {
        const Vector theta = random_point(rng, spec.slow_dim());
        const Vector phi = random_point(rng, spec.fast_dim());
        const Vector lam = spec.lambda(theta);
        const Vector e = subtract(phi, lam);
        const double th2 = norm_sq(theta), e2 = norm_sq(e);
        const auto v = eval_V(ld, spec, theta, phi);
        const double tol_s = kCertificationTolerance * (1.0 + ld.b_slow * th2);
        const double tol_f = kCertificationTolerance * (1.0 + ld.b_fast * e2);

        if (v.slow < ld.a_slow * th2 - tol_s || v.slow > ld.b_slow * th2 + tol_s)
            fail("slow sandwich bound");
        if (dot(grad_V_slow(ld, theta), spec.f(theta, lam)) > -ld.c_slow * th2 + tol_s)
            fail("slow decrease condition");
        if (v.fast < ld.a_fast * e2 - tol_f || v.fast > ld.b_fast * e2 + tol_f)
            fail("fast sandwich bound");
        if (dot(grad_phi_V_fast(ld, spec, theta, phi), spec.g(theta, phi)) > -ld.c_fast * e2 + tol_f)
            fail("fast decrease condition");
    }
}

}  // namespace

LyapunovData build_lyapunov(const ProblemSpec& spec, const Matrix& q_slow, const Matrix& q_fast,
                            double d_mix) {
    if (!(d_mix > 0.0 && d_mix < 1.0)) throw std::invalid_argument("d_mix must lie in (0, 1)");

    LyapunovData ld;
    ld.q_slow = q_slow;
    ld.q_fast = q_fast;
    ld.d_mix = d_mix;
    ld.p_slow = solve_lyapunov(spec.slow_matrix(), q_slow);
    ld.p_fast = solve_lyapunov(spec.fast_matrix(), q_fast);

    const auto ps = spd_eigen_extremes(ld.p_slow);
    const auto pf = spd_eigen_extremes(ld.p_fast);
    ld.a_slow = ps.min;
    ld.b_slow = ps.max;
    ld.c_slow = spd_eigen_extremes(q_slow).min;
    ld.a_fast = pf.min;
    ld.b_fast = pf.max;
    ld.c_fast = spd_eigen_extremes(q_fast).min;

    const double l_lambda = spec.lipschitz().lambda;
    ld.lip_slow = 2.0 * ld.b_slow;
    ld.lip_fast = 2.0 * ld.b_fast + 2.0 * ld.b_fast * l_lambda * (1.0 + l_lambda);

    certify(ld, spec);
    return ld;
}

CouplingConstants coupling_constants(const LyapunovData& ld, const LipschitzConstants& lip) {
    return {
        .d1 = ld.lip_fast * lip.f,
        .d2 = ld.lip_fast * lip.f * (1.0 + lip.lambda),
        .d3 = ld.lip_slow * lip.f * (1.0 + lip.lambda),
    };
}

LyapunovValues eval_V_from_mismatch(const LyapunovData& ld, std::span<const double> theta,
                                    std::span<const double> mismatch) {
    LyapunovValues v;
    v.slow = quad_form(ld.p_slow, theta);
    v.fast = quad_form(ld.p_fast, mismatch);
    v.combined = (1.0 - ld.d_mix) * v.slow + ld.d_mix * v.fast;
    return v;
}

LyapunovValues eval_V(const LyapunovData& ld, const ProblemSpec& spec, std::span<const double> theta,
                      std::span<const double> phi) {
    const Vector e = subtract(phi, spec.lambda(theta));
    return eval_V_from_mismatch(ld, theta, e);
}

Vector grad_V_slow(const LyapunovData& ld, std::span<const double> theta) {
    Vector g = ld.p_slow * theta;
    for (double& x : g) x *= 2.0;
    return g;
}

Vector grad_phi_V_fast(const LyapunovData& ld, const ProblemSpec& spec, std::span<const double> theta,
                       std::span<const double> phi) {
    Vector g = ld.p_fast * subtract(phi, spec.lambda(theta));
    for (double& x : g) x *= 2.0;
    return g;
}

Vector grad_theta_V_fast(const LyapunovData& ld, const ProblemSpec& spec, std::span<const double> theta,
                         std::span<const double> phi) {
    const Vector pe = ld.p_fast * subtract(phi, spec.lambda(theta));
    Vector g = spec.lambda_jacobian(theta).transpose() * pe;
    for (double& x : g) x *= -2.0;
    return g;
}

Matrix coupling_matrix(const CouplingConstants& cc, const LyapunovData& ld, double eps) {
    if (!(eps > 0.0)) throw InvalidEpsilon();
    const double d = ld.d_mix;
    return {{(1.0 - d) * ld.c_slow, -d * cc.d3},
            {-(1.0 - d) * cc.d2, d * ld.c_fast * cc.d1 / eps}};
}

Matrix symmetric_part(const Matrix& m) { return 0.5 * (m + m.transpose()); }

double epsilon_star(const CouplingConstants& cc, const LyapunovData& ld, double d) {
    if (!(d > 0.0 && d < 1.0)) throw std::invalid_argument("d must lie in (0, 1)");
    const double denom = (1.0 - d) * cc.d2 + d * cc.d3;
    if (denom == 0.0) return std::numeric_limits<double>::infinity();
    return 4.0 * d * (1.0 - d) * ld.c_slow * ld.c_fast * cc.d1 / (denom * denom);
}

MixingOptimum optimize_d(const CouplingConstants& cc, const LyapunovData& ld) {
    MixingOptimum best{.d = 0.5, .epsilon_star = epsilon_star(cc, ld, 0.5)};
    for (int k = 1; k <= 99; ++k) {
        const double d = k / 100.0;
        const double e = epsilon_star(cc, ld, d);
        // Strict improvement, or an exact tie that sits closer to 0.5.
        if (e > best.epsilon_star ||
            (e == best.epsilon_star && std::abs(d - 0.5) < std::abs(best.d - 0.5))) {
            best = {.d = d, .epsilon_star = e};
        }
    }
    return best;
}

}  // namespace ttssa
