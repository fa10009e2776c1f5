#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <variant>

#include "ttssa/linalg.hpp"

namespace ttssa {

struct InvalidProblem : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Linear singularly perturbed family:
///   theta' = A11 theta + A12 phi,   eps phi' = A21 theta + A22 phi.
struct LinearSPProblem {
    Matrix a11;  // d x d
    Matrix a12;  // d x l
    Matrix a21;  // l x d
    Matrix a22;  // l x l

    std::size_t slow_dim() const { return a11.rows(); }
    std::size_t fast_dim() const { return a22.rows(); }
};

/// Nonlinear family with a sinusoidal fast equilibrium map:
///   lambda(theta)_i = amplitude * sin(frequency * theta_{i mod d})
///   g(theta, phi)   = A_fast (phi - lambda(theta))
///   f(theta, phi)   = A_slow theta + C (phi - lambda(theta))
struct NonlinearSPProblem {
    Matrix a_slow;    // d x d, Hurwitz
    Matrix a_fast;    // l x l, Hurwitz
    Matrix coupling;  // d x l
    double lambda_amplitude = 0.0;
    double lambda_frequency = 1.0;

    std::size_t slow_dim() const { return a_slow.rows(); }
    std::size_t fast_dim() const { return a_fast.rows(); }
};

using ProblemDefinition = std::variant<LinearSPProblem, NonlinearSPProblem>;

/// Dimension and stability checks (A22 and A_r Hurwitz, resp. A_slow and A_fast).
/// Throws InvalidProblem.
void validate(const LinearSPProblem& p);
void validate(const NonlinearSPProblem& p);

/// lambda(theta) = -A22^{-1} A21 theta.
Vector lambda_map_linear(const LinearSPProblem& p, std::span<const double> theta);

/// A_r = A11 - A12 A22^{-1} A21. Throws SingularMatrix when A22 is singular.
Matrix reduced_matrix(const LinearSPProblem& p);

struct LipschitzConstants {
    double f = 0.0;
    double g = 0.0;
    double lambda = 0.0;
};

LipschitzConstants lipschitz_constants(const LinearSPProblem& p);
LipschitzConstants lipschitz_constants(const NonlinearSPProblem& p);

/// Evaluators for f, g and lambda together with the constants the stability analysis needs.
/// Immutable after construction.
class ProblemSpec {
public:
    /// Validates the definition; throws InvalidProblem.
    explicit ProblemSpec(ProblemDefinition def);

    std::size_t slow_dim() const { return slow_dim_; }
    std::size_t fast_dim() const { return fast_dim_; }
    const LipschitzConstants& lipschitz() const { return lipschitz_; }
    const ProblemDefinition& definition() const { return def_; }
    bool is_linear() const { return std::holds_alternative<LinearSPProblem>(def_); }

    /// Matrix of the reduced slow dynamics: f(theta, lambda(theta)) = slow_matrix * theta.
    const Matrix& slow_matrix() const { return slow_matrix_; }
    /// g(theta, phi) = fast_matrix * (phi - lambda(theta)).
    const Matrix& fast_matrix() const { return fast_matrix_; }

    Vector f(std::span<const double> theta, std::span<const double> phi) const;
    Vector g(std::span<const double> theta, std::span<const double> phi) const;
    Vector lambda(std::span<const double> theta) const;
    /// Jacobian of lambda at theta (l x d).
    Matrix lambda_jacobian(std::span<const double> theta) const;

    // Allocation-free forms used by the iteration.
    void f_into(std::span<const double> theta, std::span<const double> phi, std::span<double> out) const;
    void g_into(std::span<const double> theta, std::span<const double> phi, std::span<double> out) const;
    void lambda_into(std::span<const double> theta, std::span<double> out) const;

private:
    ProblemDefinition def_;
    std::size_t slow_dim_ = 0;
    std::size_t fast_dim_ = 0;
    LipschitzConstants lipschitz_;
    Matrix slow_matrix_;
    Matrix fast_matrix_;
    Matrix lambda_gain_;  // -A22^{-1} A21 for the linear family
};

/// The scalar instance A11 = 2, A12 = -3, A21 = 1, A22 = -1: A22 and A_r = -1 are Hurwitz,
/// yet the joint matrix at eps = 1 has trace 1, so one time scale is not enough.
LinearSPProblem reference_coupling_unstable_problem();

}  // namespace ttssa
