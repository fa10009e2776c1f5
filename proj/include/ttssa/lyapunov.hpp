#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>

#include "ttssa/linalg.hpp"
#include "ttssa/problem.hpp"

namespace ttssa {

struct InvalidEpsilon : std::invalid_argument {
    InvalidEpsilon() : std::invalid_argument("epsilon must be > 0") {}
};
struct CertificationFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Quadratic Lyapunov functions
///   V_S(theta)      = theta^T P_S theta
///   V_F(theta, phi) = (phi - lambda(theta))^T P_F (phi - lambda(theta))
/// with their sandwich/decrease constants and gradient Lipschitz bounds.
struct LyapunovData {
    Matrix p_slow, p_fast;
    Matrix q_slow, q_fast;
    double d_mix = 0.5;

    double a_slow = 0, b_slow = 0, c_slow = 0;  // lambda_min(P_S), lambda_max(P_S), lambda_min(Q_S)
    double a_fast = 0, b_fast = 0, c_fast = 0;
    double lip_slow = 0;  // L_S = 2 b_S
    double lip_fast = 0;  // L_F = 2 b_F + 2 b_F L_lambda (1 + L_lambda)
};

struct CouplingConstants {
    double d1 = 0, d2 = 0, d3 = 0;
};

/// Solves the two Lyapunov equations against the problem's slow and fast matrices and
/// certifies the sandwich and decrease inequalities at 100 pseudo-random points.
/// Throws NotPositiveDefinite / NoSolution for non-Hurwitz input, std::invalid_argument
/// for d_mix outside (0, 1) or non-SPD Q.
LyapunovData build_lyapunov(const ProblemSpec& spec, const Matrix& q_slow, const Matrix& q_fast,
                            double d_mix = 0.5);

/// D1 = L_F L_f, D2 = L_F L_f (1 + L_lambda), D3 = L_S L_f (1 + L_lambda).
CouplingConstants coupling_constants(const LyapunovData& ld, const LipschitzConstants& lip);

struct LyapunovValues {
    double slow = 0;
    double fast = 0;
    double combined = 0;
};

LyapunovValues eval_V(const LyapunovData& ld, const ProblemSpec& spec, std::span<const double> theta,
                      std::span<const double> phi);

/// Same as eval_V given a precomputed mismatch phi - lambda(theta).
LyapunovValues eval_V_from_mismatch(const LyapunovData& ld, std::span<const double> theta,
                                    std::span<const double> mismatch);

Vector grad_V_slow(const LyapunovData& ld, std::span<const double> theta);
/// -2 Dlambda(theta)^T P_F (phi - lambda(theta)).
Vector grad_theta_V_fast(const LyapunovData& ld, const ProblemSpec& spec, std::span<const double> theta,
                         std::span<const double> phi);
/// 2 P_F (phi - lambda(theta)).
Vector grad_phi_V_fast(const LyapunovData& ld, const ProblemSpec& spec, std::span<const double> theta,
                       std::span<const double> phi);

/// M(eps) = [[(1-d) c_S, -d D3], [-(1-d) D2, d c_F D1 / eps]], d = ld.d_mix.
Matrix coupling_matrix(const CouplingConstants& cc, const LyapunovData& ld, double eps);

/// (M + M^T) / 2.
Matrix symmetric_part(const Matrix& m);

/// 4 d (1-d) c_S c_F D1 / [(1-d) D2 + d D3]^2; +infinity when the denominator vanishes.
double epsilon_star(const CouplingConstants& cc, const LyapunovData& ld, double d);

struct MixingOptimum {
    double d = 0.5;
    double epsilon_star = 0;
};

/// Grid search over d in {0.01, ..., 0.99}; ties go to the d closest to 0.5.
MixingOptimum optimize_d(const CouplingConstants& cc, const LyapunovData& ld);

}  // namespace ttssa
