#pragma once

// Small dense linear algebra: enough for Lyapunov solves, positive-definiteness
// certificates and eigenvalue bounds on matrices of dimension <= 8.

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ttssa {

using Vector = std::vector<double>;

/// Largest state dimension supported by the Lyapunov machinery.
inline constexpr std::size_t kMaxDim = 8;

inline constexpr double kPivotTolerance = 1e-12;
inline constexpr double kSymmetryTolerance = 1e-10;
inline constexpr double kLyapunovResidualTolerance = 1e-8;

struct LinalgError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SingularMatrix : LinalgError {
    SingularMatrix() : LinalgError("singular matrix: pivot below 1e-12") {}
};
struct NotSymmetric : LinalgError {
    NotSymmetric() : LinalgError("matrix is not symmetric to tolerance") {}
};
struct NotPositiveDefinite : LinalgError {
    NotPositiveDefinite() : LinalgError("matrix is not positive definite") {}
};
struct NoSolution : LinalgError {
    NoSolution() : LinalgError("Lyapunov equation has no unique solution") {}
};
struct DimensionMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Row-major dense matrix with finite entries.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);
    static Matrix diagonal(std::span<const double> diag);
    /// Throws DimensionMismatch for ragged input and std::invalid_argument for non-finite entries.
    static Matrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool is_square() const { return rows_ == cols_; }
    bool empty() const { return entries_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }

    std::span<const double> entries() const { return entries_; }
    std::span<const double> row(std::size_t i) const {
        return std::span<const double>(entries_).subspan(i * cols_, cols_);
    }

    Matrix transpose() const;
    std::vector<std::vector<double>> to_rows() const;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> entries_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);
Vector operator*(const Matrix& a, std::span<const double> x);

/// y = A x without allocation. y must have a.rows() entries.
void multiply_into(const Matrix& a, std::span<const double> x, std::span<double> y);

double max_abs(const Matrix& a);
double max_abs(std::span<const double> v);
double dot(std::span<const double> a, std::span<const double> b);
double norm_sq(std::span<const double> v);
double norm(std::span<const double> v);
Vector subtract(std::span<const double> a, std::span<const double> b);
bool all_finite(std::span<const double> v);

/// Gaussian elimination with partial pivoting.
/// Throws SingularMatrix when a pivot magnitude falls below 1e-12.
Vector solve_linear(const Matrix& a, std::span<const double> b);

/// Lower-triangular L with L L^T = P, or std::nullopt when some pivot is <= 1e-12.
/// Throws NotSymmetric when |P_ij - P_ji| exceeds 1e-10 (1 + max|P|).
std::optional<Matrix> cholesky(const Matrix& p);

inline bool is_positive_definite(const Matrix& p) { return cholesky(p).has_value(); }

/// Symmetric P solving A^T P + P A = -Q through the n^2 x n^2 vectorised system.
/// Throws NoSolution when that system is singular or inaccurate, NotPositiveDefinite
/// when the solution is not PD (A is not Hurwitz).
Matrix solve_lyapunov(const Matrix& a, const Matrix& q);

/// True iff A^T P + P A = -I has a positive definite solution.
bool is_hurwitz(const Matrix& a);

struct EigenBounds {
    double min = 0.0;
    double max = 0.0;
};

/// Extreme eigenvalues of an SPD matrix by bisection on Cholesky feasibility.
EigenBounds spd_eigen_extremes(const Matrix& p);

/// Largest eigenvalue of a symmetric positive semidefinite matrix (Gram matrices).
double psd_max_eigenvalue(const Matrix& p);

/// Upper bound on the spectral norm: sqrt(lambda_max(A A^T)).
double spectral_norm_bound(const Matrix& a);

/// Horizontal concatenation [A B].
Matrix hstack(const Matrix& a, const Matrix& b);

std::string to_string(const Matrix& a);

}  // namespace ttssa
