#include <catch_amalgamated.hpp>

#include <cmath>

#include "support.hpp"
#include "ttssa/lyapunov.hpp"
#include "ttssa/solver.hpp"

using namespace ttssa;
using Catch::Approx;

namespace {

LyapunovData synthetic(double c_slow, double c_fast, double d) {
    LyapunovData ld;
    ld.c_slow = c_slow;
    ld.c_fast = c_fast;
    ld.d_mix = d;
    return ld;
}

double sym_det(const CouplingConstants& cc, const LyapunovData& ld, double eps) {
    const Matrix s = symmetric_part(coupling_matrix(cc, ld, eps));
    return s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0);
}

struct Case {
    ProblemSpec spec;
    LyapunovData ld;
};

std::vector<Case> cases() {
    std::vector<Case> out;
    auto add = [&](ProblemDefinition def) {
        ProblemSpec spec(std::move(def));
        const auto ld = build_lyapunov(spec, Matrix::identity(spec.slow_dim()), Matrix::identity(spec.fast_dim()));
        out.push_back({spec, ld});
    };
    add(reference_coupling_unstable_problem());
    add(LinearSPProblem{test::random_hurwitz(2), test::random_matrix(2, 2, 0.2), test::random_matrix(2, 2),
                        test::random_hurwitz(2)});
    add(NonlinearSPProblem{test::random_hurwitz(2), test::random_hurwitz(3), test::random_matrix(2, 3), 0.8, 1.1});
    add(NonlinearSPProblem{test::random_hurwitz(1), test::random_hurwitz(2), test::random_matrix(1, 2), 1.5, 0.5});
    return out;
}

}  // namespace

TEST_CASE("build_lyapunov examples") {
    const ProblemSpec slow(LinearSPProblem{Matrix{{-1}}, Matrix{{0}}, Matrix{{0}}, Matrix{{-1}}});
    const auto ld = build_lyapunov(slow, Matrix{{2}}, Matrix{{1}});
    CHECK(ld.p_slow(0, 0) == Approx(1.0));
    CHECK(ld.a_slow == Approx(1.0).margin(1e-8));
    CHECK(ld.b_slow == Approx(1.0).margin(1e-8));
    CHECK(ld.c_slow == Approx(2.0).margin(1e-8));

    const ProblemSpec fast(NonlinearSPProblem{Matrix{{-1}}, Matrix{{-1, 0}, {0, -2}}, Matrix(1, 2), 0.0, 1.0});
    const auto lf = build_lyapunov(fast, Matrix{{1}}, Matrix::identity(2));
    CHECK(lf.p_fast(0, 0) == Approx(0.5));
    CHECK(lf.p_fast(1, 1) == Approx(0.25));
    CHECK(lf.a_fast == Approx(0.25).margin(1e-8));
    CHECK(lf.b_fast == Approx(0.5).margin(1e-8));
    CHECK(lf.c_fast == Approx(1.0).margin(1e-8));

    const ProblemSpec ref(reference_coupling_unstable_problem());
    const auto lr = build_lyapunov(ref, Matrix{{1}}, Matrix{{1}});
    CHECK(lr.p_slow(0, 0) == Approx(0.5));
    CHECK(lr.p_fast(0, 0) == Approx(0.5));
    CHECK(lr.lip_slow == Approx(1.0).margin(1e-8));
    CHECK(lr.lip_fast == Approx(3.0).margin(1e-8));
    const auto cc = coupling_constants(lr, ref.lipschitz());
    CHECK(cc.d1 == Approx(3.0 * std::sqrt(13.0)).epsilon(1e-8));
    CHECK(cc.d2 == Approx(6.0 * std::sqrt(13.0)).epsilon(1e-8));
    CHECK(cc.d3 == Approx(2.0 * std::sqrt(13.0)).epsilon(1e-8));
}

TEST_CASE("build_lyapunov errors") {
    const ProblemSpec ref(reference_coupling_unstable_problem());
    CHECK_THROWS_AS(build_lyapunov(ref, Matrix{{1}}, Matrix{{1}}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(build_lyapunov(ref, Matrix{{1}}, Matrix{{1}}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(build_lyapunov(ref, Matrix{{-1}}, Matrix{{1}}), std::invalid_argument);
}

TEST_CASE("eval_V examples") {
    const ProblemSpec ref(reference_coupling_unstable_problem());
    auto ld = build_lyapunov(ref, Matrix{{1}}, Matrix{{1}});
    const auto v0 = eval_V(ld, ref, Vector{0}, ref.lambda(Vector{0}));
    CHECK(v0.slow == 0.0);
    CHECK(v0.fast == 0.0);
    CHECK(v0.combined == 0.0);

    LyapunovData unit;
    unit.p_slow = Matrix{{1}};
    unit.p_fast = Matrix{{1}};
    unit.d_mix = 0.5;
    const auto v1 = eval_V_from_mismatch(unit, Vector{1}, Vector{1});
    CHECK(v1.slow == 1.0);
    CHECK(v1.fast == 1.0);
    CHECK(v1.combined == 1.0);

    ld.d_mix = 0.3;
    const auto v2 = eval_V(ld, ref, Vector{2}, Vector{2});  // lambda(theta) = theta
    CHECK(v2.slow == Approx(2.0));
    CHECK(v2.fast == 0.0);
    CHECK(v2.combined == Approx(1.4));
}

TEST_CASE("coupling_matrix examples") {
    const CouplingConstants ones{1, 1, 1};
    const auto ld = synthetic(1, 1, 0.5);
    CHECK(coupling_matrix(ones, ld, 1.0) == Matrix{{0.5, -0.5}, {-0.5, 0.5}});
    CHECK(coupling_matrix(ones, ld, 0.5)(1, 1) == 1.0);
    CHECK_THROWS_AS(coupling_matrix(ones, ld, 0.0), InvalidEpsilon);
    CHECK_THROWS_AS(coupling_matrix(ones, ld, -1.0), InvalidEpsilon);

    const ProblemSpec ref(reference_coupling_unstable_problem());
    const auto lr = build_lyapunov(ref, Matrix{{1}}, Matrix{{1}});
    const auto cc = coupling_constants(lr, ref.lipschitz());
    const Matrix m = coupling_matrix(cc, lr, 0.1);
    CHECK(m(0, 0) == Approx(0.5 * lr.c_slow));
    CHECK(m(0, 1) == Approx(-0.5 * cc.d3));
    CHECK(m(1, 0) == Approx(-0.5 * cc.d2));
    CHECK(m(1, 1) == Approx(0.5 * lr.c_fast * cc.d1 / 0.1));
}

TEST_CASE("epsilon_star examples") {
    const CouplingConstants ones{1, 1, 1};
    CHECK(epsilon_star(ones, synthetic(1, 1, 0.5), 0.5) == Approx(1.0));
    CHECK(epsilon_star(ones, synthetic(1, 1, 0.5), 1e-9) < 1e-8);
    CHECK(epsilon_star(ones, synthetic(1, 1, 0.5), 1.0 - 1e-9) < 1e-8);
    CHECK(std::isinf(epsilon_star(CouplingConstants{1, 0, 0}, synthetic(1, 1, 0.5), 0.5)));
    CHECK_THROWS_AS(epsilon_star(ones, synthetic(1, 1, 0.5), 0.0), std::invalid_argument);
    CHECK_THROWS_AS(epsilon_star(ones, synthetic(1, 1, 0.5), 1.0), std::invalid_argument);
}

TEST_CASE("epsilon_star is the determinant root, checked by bisection") {
    for (int k = 0; k < 50; ++k) {
        const CouplingConstants cc{test::uniform(0.1, 10), test::uniform(0.1, 10), test::uniform(0.1, 10)};
        const double d = test::uniform(0.05, 0.95);
        const auto ld = synthetic(test::uniform(0.1, 5), test::uniform(0.1, 5), d);
        const double es = epsilon_star(cc, ld, d);

        const Matrix s = symmetric_part(coupling_matrix(cc, ld, es));
        const double scale = std::abs(s(0, 0) * s(1, 1)) + s(0, 1) * s(0, 1);
        CHECK(std::abs(sym_det(cc, ld, es)) <= 1e-10 * scale);

        // det is decreasing in eps; bisect for the sign change independently.
        double lo = es * 1e-3, hi = es * 1e3;
        REQUIRE(sym_det(cc, ld, lo) > 0);
        REQUIRE(sym_det(cc, ld, hi) < 0);
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (sym_det(cc, ld, mid) > 0 ? lo : hi) = mid;
        }
        CHECK(lo == Approx(es).epsilon(1e-10));

        CHECK(is_positive_definite(symmetric_part(coupling_matrix(cc, ld, 0.99 * es))));
        CHECK_FALSE(is_positive_definite(symmetric_part(coupling_matrix(cc, ld, 1.01 * es))));
    }
}

TEST_CASE("optimize_d examples") {
    const auto ones = optimize_d(CouplingConstants{1, 1, 1}, synthetic(1, 1, 0.5));
    CHECK(ones.d == 0.5);
    CHECK(ones.epsilon_star == Approx(1.0));
    CHECK(optimize_d(CouplingConstants{2, 3, 3}, synthetic(0.7, 1.3, 0.5)).d == 0.5);
    const auto skewed = optimize_d(CouplingConstants{1, 1, 10}, synthetic(1, 1, 0.5));
    CHECK(skewed.d < 0.5);
    for (int k = 1; k <= 99; ++k)
        CHECK(epsilon_star(CouplingConstants{1, 1, 10}, synthetic(1, 1, 0.5), k / 100.0) <= skewed.epsilon_star);
}

TEST_CASE("sandwich and decrease inequalities at random points") {
    for (const auto& [spec, ld] : cases()) {
        for (int k = 0; k < 100; ++k) {
            const Vector theta = test::random_vector(spec.slow_dim());
            const Vector phi = test::random_vector(spec.fast_dim());
            const Vector lam = spec.lambda(theta);
            const Vector e = subtract(phi, lam);
            const auto v = eval_V(ld, spec, theta, phi);
            const double t2 = norm_sq(theta), e2 = norm_sq(e);
            const double tol = 1e-9 * (1.0 + t2 + e2);
            CHECK(ld.a_slow * t2 <= v.slow + tol);
            CHECK(v.slow <= ld.b_slow * t2 + tol);
            CHECK(ld.a_fast * e2 <= v.fast + tol);
            CHECK(v.fast <= ld.b_fast * e2 + tol);
            CHECK(dot(grad_V_slow(ld, theta), spec.f(theta, lam)) <= -ld.c_slow * t2 + tol);
            CHECK(dot(grad_phi_V_fast(ld, spec, theta, phi), spec.g(theta, phi)) <= -ld.c_fast * e2 + tol);
            CHECK(v.combined == Approx((1 - ld.d_mix) * v.slow + ld.d_mix * v.fast).epsilon(1e-12));
        }
    }
}

TEST_CASE("cross-coupling bounds at random points") {
    for (const auto& [spec, ld] : cases()) {
        const auto cc = coupling_constants(ld, spec.lipschitz());
        for (int k = 0; k < 100; ++k) {
            const Vector theta = test::random_vector(spec.slow_dim());
            const Vector phi = test::random_vector(spec.fast_dim());
            const Vector lam = spec.lambda(theta);
            const double tn = norm(theta), en = norm(subtract(phi, lam));
            const double slow_cross = dot(grad_V_slow(ld, theta), subtract(spec.f(theta, phi), spec.f(theta, lam)));
            CHECK(slow_cross <= cc.d3 * tn * en + 1e-9);
            const double fast_cross = dot(grad_theta_V_fast(ld, spec, theta, phi), spec.f(theta, phi));
            CHECK(fast_cross <= cc.d1 * en * en + cc.d2 * tn * en + 1e-9);
        }
    }
}

TEST_CASE("analytic gradients match central differences") {
    constexpr double h = 1e-6;
    for (const auto& [spec, ld] : cases()) {
        for (int k = 0; k < 20; ++k) {
            const Vector theta = test::random_vector(spec.slow_dim());
            const Vector phi = test::random_vector(spec.fast_dim());
            const Vector gs = grad_V_slow(ld, theta);
            const Vector gt = grad_theta_V_fast(ld, spec, theta, phi);
            const Vector gp = grad_phi_V_fast(ld, spec, theta, phi);
            for (std::size_t j = 0; j < theta.size(); ++j) {
                Vector hi = theta, lo = theta;
                hi[j] += h;
                lo[j] -= h;
                const auto vh = eval_V(ld, spec, hi, phi), vl = eval_V(ld, spec, lo, phi);
                CHECK((vh.slow - vl.slow) / (2 * h) == Approx(gs[j]).epsilon(1e-6).margin(1e-6));
                CHECK((vh.fast - vl.fast) / (2 * h) == Approx(gt[j]).epsilon(1e-6).margin(1e-6));
            }
            for (std::size_t j = 0; j < phi.size(); ++j) {
                Vector hi = phi, lo = phi;
                hi[j] += h;
                lo[j] -= h;
                const auto vh = eval_V(ld, spec, theta, hi), vl = eval_V(ld, spec, theta, lo);
                CHECK((vh.fast - vl.fast) / (2 * h) == Approx(gp[j]).epsilon(1e-6).margin(1e-6));
            }
            // The theta-gradient of V_F vanishes on the fast equilibrium manifold.
            CHECK(max_abs(grad_theta_V_fast(ld, spec, theta, spec.lambda(theta))) == 0.0);
        }
    }
}

TEST_CASE("reference instance threshold and ODE verification") {
    const ProblemSpec ref(reference_coupling_unstable_problem());
    auto ld = build_lyapunov(ref, Matrix{{1}}, Matrix{{1}});
    const auto cc = coupling_constants(ld, ref.lipschitz());
    const auto best = optimize_d(cc, ld);
    CHECK(best.epsilon_star <= 0.5);
    ld.d_mix = best.d;
    CHECK(is_positive_definite(symmetric_part(coupling_matrix(cc, ld, 0.99 * best.epsilon_star))));
    CHECK_FALSE(is_positive_definite(symmetric_part(coupling_matrix(cc, ld, 1.01 * best.epsilon_star))));

    const double eps = best.epsilon_star / 3.0;
    const auto samples = integrate_ode(ref, ld, eps, Vector{1}, Vector{1}, 0.1 * eps, 50.0);
    bool reached = false;
    for (std::size_t k = 1; k < samples.size() && !reached; ++k) {
        if (samples[k - 1].v_combined < 1e-12) {
            reached = true;
            break;
        }
        REQUIRE(samples[k].v_combined < samples[k - 1].v_combined);
    }
    CHECK(reached);
}
