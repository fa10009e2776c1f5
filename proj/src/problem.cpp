#include "ttssa/problem.hpp"

#include <array>
#include <cmath>
#include <string>

namespace ttssa {

namespace {

void check_dims(bool ok, const std::string& what) {
    if (!ok) throw InvalidProblem(what);
}

void check_size(std::size_t n, const char* name) {
    check_dims(n >= 1 && n <= kMaxDim, std::string(name) + " dimension must be in [1, 8]");
}

// -A22^{-1} A21, column by column.
Matrix linear_lambda_gain(const LinearSPProblem& p) {
    const std::size_t d = p.slow_dim(), l = p.fast_dim();
    Matrix gain(l, d);
    Vector col(l);
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t i = 0; i < l; ++i) col[i] = p.a21(i, j);
        const Vector x = solve_linear(p.a22, col);
        for (std::size_t i = 0; i < l; ++i) gain(i, j) = -x[i];
    }
    return gain;
}

// How many lambda components share one slow coordinate.
double lambda_multiplicity(std::size_t d, std::size_t l) {
    return std::sqrt(static_cast<double>((l + d - 1) / d));
}

}  // namespace

void validate(const LinearSPProblem& p) {
    const std::size_t d = p.slow_dim(), l = p.fast_dim();
    check_size(d, "slow");
    check_size(l, "fast");
    check_dims(p.a11.cols() == d, "A11 must be d x d");
    check_dims(p.a12.rows() == d && p.a12.cols() == l, "A12 must be d x l");
    check_dims(p.a21.rows() == l && p.a21.cols() == d, "A21 must be l x d");
    check_dims(p.a22.cols() == l, "A22 must be l x l");
    if (!is_hurwitz(p.a22)) throw InvalidProblem("A22 is not Hurwitz");
    if (!is_hurwitz(reduced_matrix(p))) throw InvalidProblem("reduced matrix A_r is not Hurwitz");
}

void validate(const NonlinearSPProblem& p) {
    const std::size_t d = p.slow_dim(), l = p.fast_dim();
    check_size(d, "slow");
    check_size(l, "fast");
    check_dims(p.a_slow.cols() == d, "A_slow must be d x d");
    check_dims(p.a_fast.cols() == l, "A_fast must be l x l");
    check_dims(p.coupling.rows() == d && p.coupling.cols() == l, "C must be d x l");
    check_dims(std::isfinite(p.lambda_amplitude) && p.lambda_amplitude >= 0.0,
               "lambda_amplitude must be >= 0");
    check_dims(std::isfinite(p.lambda_frequency) && p.lambda_frequency > 0.0,
               "lambda_frequency must be > 0");
    if (!is_hurwitz(p.a_slow)) throw InvalidProblem("A_slow is not Hurwitz");
    if (!is_hurwitz(p.a_fast)) throw InvalidProblem("A_fast is not Hurwitz");
}

Vector lambda_map_linear(const LinearSPProblem& p, std::span<const double> theta) {
    const Vector rhs = p.a21 * theta;
    Vector x = solve_linear(p.a22, rhs);
    for (double& v : x) v = -v;
    return x;
}

Matrix reduced_matrix(const LinearSPProblem& p) {
    return p.a11 + p.a12 * linear_lambda_gain(p);
}

LipschitzConstants lipschitz_constants(const LinearSPProblem& p) {
    const Matrix gain = linear_lambda_gain(p);
    return {
        .f = spectral_norm_bound(hstack(p.a11, p.a12)),
        .g = spectral_norm_bound(hstack(p.a21, p.a22)),
        .lambda = std::sqrt(psd_max_eigenvalue(gain.transpose() * gain)),
    };
}

LipschitzConstants lipschitz_constants(const NonlinearSPProblem& p) {
    const double l_lambda = p.lambda_amplitude * p.lambda_frequency *
                            lambda_multiplicity(p.slow_dim(), p.fast_dim());
    const double n_slow = spectral_norm_bound(p.a_slow);
    const double n_fast = spectral_norm_bound(p.a_fast);
    const double n_c = spectral_norm_bound(p.coupling);
    const double theta_part = n_slow + n_c * l_lambda;
    return {
        .f = std::sqrt(theta_part * theta_part + n_c * n_c),
        .g = n_fast * std::sqrt(1.0 + l_lambda * l_lambda),
        .lambda = l_lambda,
    };
}

ProblemSpec::ProblemSpec(ProblemDefinition def) : def_(std::move(def)) {
    std::visit([](const auto& p) { validate(p); }, def_);
    if (const auto* lin = std::get_if<LinearSPProblem>(&def_)) {
        slow_dim_ = lin->slow_dim();
        fast_dim_ = lin->fast_dim();
        lipschitz_ = lipschitz_constants(*lin);
        lambda_gain_ = linear_lambda_gain(*lin);
        slow_matrix_ = reduced_matrix(*lin);
        fast_matrix_ = lin->a22;
    } else {
        const auto& nl = std::get<NonlinearSPProblem>(def_);
        slow_dim_ = nl.slow_dim();
        fast_dim_ = nl.fast_dim();
        lipschitz_ = lipschitz_constants(nl);
        slow_matrix_ = nl.a_slow;
        fast_matrix_ = nl.a_fast;
    }
}

void ProblemSpec::lambda_into(std::span<const double> theta, std::span<double> out) const {
    if (std::holds_alternative<LinearSPProblem>(def_)) {
        multiply_into(lambda_gain_, theta, out);
        return;
    }
    const auto& nl = std::get<NonlinearSPProblem>(def_);
    for (std::size_t i = 0; i < fast_dim_; ++i)
        out[i] = nl.lambda_amplitude * std::sin(nl.lambda_frequency * theta[i % slow_dim_]);
}

void ProblemSpec::f_into(std::span<const double> theta, std::span<const double> phi,
                         std::span<double> out) const {
    if (const auto* lin = std::get_if<LinearSPProblem>(&def_)) {
        std::array<double, kMaxDim> tmp{};
        multiply_into(lin->a11, theta, out);
        multiply_into(lin->a12, phi, std::span(tmp).first(slow_dim_));
        for (std::size_t i = 0; i < slow_dim_; ++i) out[i] += tmp[i];
        return;
    }
    const auto& nl = std::get<NonlinearSPProblem>(def_);
    std::array<double, kMaxDim> mismatch{};
    std::array<double, kMaxDim> tmp{};
    lambda_into(theta, std::span(mismatch).first(fast_dim_));
    for (std::size_t i = 0; i < fast_dim_; ++i) mismatch[i] = phi[i] - mismatch[i];
    multiply_into(nl.a_slow, theta, out);
    multiply_into(nl.coupling, std::span<const double>(mismatch).first(fast_dim_),
                  std::span(tmp).first(slow_dim_));
    for (std::size_t i = 0; i < slow_dim_; ++i) out[i] += tmp[i];
}

void ProblemSpec::g_into(std::span<const double> theta, std::span<const double> phi,
                         std::span<double> out) const {
    if (const auto* lin = std::get_if<LinearSPProblem>(&def_)) {
        std::array<double, kMaxDim> tmp{};
        multiply_into(lin->a21, theta, out);
        multiply_into(lin->a22, phi, std::span(tmp).first(fast_dim_));
        for (std::size_t i = 0; i < fast_dim_; ++i) out[i] += tmp[i];
        return;
    }
    const auto& nl = std::get<NonlinearSPProblem>(def_);
    std::array<double, kMaxDim> mismatch{};
    lambda_into(theta, std::span(mismatch).first(fast_dim_));
    for (std::size_t i = 0; i < fast_dim_; ++i) mismatch[i] = phi[i] - mismatch[i];
    multiply_into(nl.a_fast, std::span<const double>(mismatch).first(fast_dim_), out);
}

Vector ProblemSpec::f(std::span<const double> theta, std::span<const double> phi) const {
    Vector out(slow_dim_);
    f_into(theta, phi, out);
    return out;
}

Vector ProblemSpec::g(std::span<const double> theta, std::span<const double> phi) const {
    Vector out(fast_dim_);
    g_into(theta, phi, out);
    return out;
}

Vector ProblemSpec::lambda(std::span<const double> theta) const {
    Vector out(fast_dim_);
    lambda_into(theta, out);
    return out;
}

Matrix ProblemSpec::lambda_jacobian(std::span<const double> theta) const {
    if (std::holds_alternative<LinearSPProblem>(def_)) return lambda_gain_;
    const auto& nl = std::get<NonlinearSPProblem>(def_);
    Matrix jac(fast_dim_, slow_dim_);
    for (std::size_t i = 0; i < fast_dim_; ++i) {
        const std::size_t j = i % slow_dim_;
        jac(i, j) = nl.lambda_amplitude * nl.lambda_frequency *
                    std::cos(nl.lambda_frequency * theta[j]);
    }
    return jac;
}

LinearSPProblem reference_coupling_unstable_problem() {
    return {.a11 = {{2.0}}, .a12 = {{-3.0}}, .a21 = {{1.0}}, .a22 = {{-1.0}}};
}

}  // namespace ttssa
