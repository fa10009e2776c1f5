#include "ttssa/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <utility>

namespace ttssa {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw DimensionMismatch(what);
}

// Gershgorin bound on the spectral radius of a symmetric matrix.
double gershgorin_radius(const Matrix& p) {
    double r = 0.0;
    for (std::size_t i = 0; i < p.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < p.cols(); ++j) s += std::abs(p(i, j));
        r = std::max(r, s);
    }
    return r;
}

Matrix shifted(const Matrix& p, double diag_scale, double shift) {
    // diag_scale * P + shift * I
    Matrix out = diag_scale * p;
    for (std::size_t i = 0; i < p.rows(); ++i) out(i, i) += shift;
    return out;
}

constexpr int kBisectionIterations = 200;

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), entries_(rows * cols, fill) {}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    entries_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        require(r.size() == cols_, "ragged matrix literal");
        entries_.insert(entries_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
    Matrix m(diag.size(), diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
    return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
    Matrix m;
    m.rows_ = rows.size();
    m.cols_ = rows.empty() ? 0 : rows.front().size();
    for (const auto& r : rows) {
        require(r.size() == m.cols_, "ragged matrix rows");
        if (!all_finite(r)) throw std::invalid_argument("matrix entries must be finite");
        m.entries_.insert(m.entries_.end(), r.begin(), r.end());
    }
    return m;
}

Matrix Matrix::transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

std::vector<std::vector<double>> Matrix::to_rows() const {
    std::vector<std::vector<double>> out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) out[i].assign(row(i).begin(), row(i).end());
    return out;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
    require(a.cols() == b.rows(), "matrix product dimensions");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
    require(a.rows() == b.rows() && a.cols() == b.cols(), "matrix sum dimensions");
    Matrix c(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = a(i, j) + b(i, j);
    return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) { return a + (-1.0) * b; }

Matrix operator*(double s, const Matrix& a) {
    Matrix c(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = s * a(i, j);
    return c;
}

Vector operator*(const Matrix& a, std::span<const double> x) {
    Vector y(a.rows());
    multiply_into(a, x, y);
    return y;
}

void multiply_into(const Matrix& a, std::span<const double> x, std::span<double> y) {
    require(a.cols() == x.size() && a.rows() == y.size(), "matrix-vector dimensions");
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
        y[i] = s;
    }
}

double max_abs(const Matrix& a) { return max_abs(a.entries()); }

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
    require(a.size() == b.size(), "dot product dimensions");
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm_sq(std::span<const double> v) { return dot(v, v); }

double norm(std::span<const double> v) { return std::sqrt(norm_sq(v)); }

Vector subtract(std::span<const double> a, std::span<const double> b) {
    require(a.size() == b.size(), "vector difference dimensions");
    Vector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

Vector solve_linear(const Matrix& a, std::span<const double> b) {
    require(a.is_square(), "solve_linear needs a square matrix");
    require(a.rows() == b.size(), "solve_linear rhs dimension");
    const std::size_t n = a.rows();
    Matrix m = a;
    Vector x(b.begin(), b.end());

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(m(r, col)) > std::abs(m(piv, col))) piv = r;
        if (std::abs(m(piv, col)) < kPivotTolerance) throw SingularMatrix();
        if (piv != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(m(col, j), m(piv, j));
            std::swap(x[col], x[piv]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double factor = m(r, col) / m(col, col);
            if (factor == 0.0) continue;
            for (std::size_t j = col; j < n; ++j) m(r, j) -= factor * m(col, j);
            x[r] -= factor * x[col];
        }
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = x[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= m(i, j) * x[j];
        x[i] = s / m(i, i);
    }
    return x;
}

std::optional<Matrix> cholesky(const Matrix& p) {
    require(p.is_square(), "cholesky needs a square matrix");
    const std::size_t n = p.rows();
    const double sym_tol = kSymmetryTolerance * (1.0 + max_abs(p));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(p(i, j) - p(j, i)) > sym_tol) throw NotSymmetric();

    Matrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double pivot = p(j, j);
        for (std::size_t k = 0; k < j; ++k) pivot -= l(j, k) * l(j, k);
        if (!(pivot > kPivotTolerance)) return std::nullopt;
        const double ljj = std::sqrt(pivot);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = 0.5 * (p(i, j) + p(j, i));
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / ljj;
        }
    }
    return l;
}

Matrix solve_lyapunov(const Matrix& a, const Matrix& q) {
    require(a.is_square() && q.is_square() && a.rows() == q.rows(), "Lyapunov dimensions");
    const std::size_t n = a.rows();
    require(n >= 1 && n <= kMaxDim, "Lyapunov solve supports 1 <= n <= 8");
    if (!is_positive_definite(q)) throw std::invalid_argument("Lyapunov right-hand side Q must be SPD");

    // Row-major vec: (A^T P)_ij = sum_k A_ki P_kj, (P A)_ij = sum_k P_ik A_kj.
    const std::size_t nn = n * n;
    Matrix k(nn, nn);
    Vector rhs(nn);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t row = i * n + j;
            for (std::size_t m = 0; m < n; ++m) {
                k(row, m * n + j) += a(m, i);
                k(row, i * n + m) += a(m, j);
            }
            rhs[row] = -q(i, j);
        }

    Vector vec_p;
    try {
        vec_p = solve_linear(k, rhs);
    } catch (const SingularMatrix&) {
        throw NoSolution();
    }

    Matrix p(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) p(i, j) = 0.5 * (vec_p[i * n + j] + vec_p[j * n + i]);

    const Matrix residual = a.transpose() * p + p * a + q;
    if (!all_finite(p.entries()) ||
        max_abs(residual) > kLyapunovResidualTolerance * (1.0 + max_abs(q)))
        throw NoSolution();
    if (!is_positive_definite(p)) throw NotPositiveDefinite();
    return p;
}

bool is_hurwitz(const Matrix& a) {
    try {
        solve_lyapunov(a, Matrix::identity(a.rows()));
        return true;
    } catch (const LinalgError&) {
        return false;
    }
}

EigenBounds spd_eigen_extremes(const Matrix& p) {
    if (!is_positive_definite(p)) throw NotPositiveDefinite();
    const double radius = gershgorin_radius(p);

    // lambda_min: largest mu with P - mu I positive definite.
    double lo = 0.0, hi = radius + 1.0;
    for (int it = 0; it < kBisectionIterations && hi - lo > 1e-13 * (1.0 + hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (is_positive_definite(shifted(p, 1.0, -mid)) ? lo : hi) = mid;
    }
    const double lambda_min = 0.5 * (lo + hi);

    // lambda_max: smallest c with c I - P positive definite.
    lo = lambda_min;
    hi = radius + 1.0;
    for (int it = 0; it < kBisectionIterations && hi - lo > 1e-13 * (1.0 + hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (is_positive_definite(shifted(p, -1.0, mid)) ? hi : lo) = mid;
    }
    return {lambda_min, 0.5 * (lo + hi)};
}

double psd_max_eigenvalue(const Matrix& p) {
    require(p.is_square(), "eigenvalue bound needs a square matrix");
    if (max_abs(p) == 0.0) return 0.0;
    double lo = 0.0, hi = gershgorin_radius(p) + 1.0;
    for (int it = 0; it < kBisectionIterations && hi - lo > 1e-13 * (1.0 + hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (is_positive_definite(shifted(p, -1.0, mid)) ? hi : lo) = mid;
    }
    return hi;
}

double spectral_norm_bound(const Matrix& a) {
    return std::sqrt(psd_max_eigenvalue(a * a.transpose()));
}

Matrix hstack(const Matrix& a, const Matrix& b) {
    require(a.rows() == b.rows(), "hstack row counts");
    Matrix out(a.rows(), a.cols() + b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = a(i, j);
        for (std::size_t j = 0; j < b.cols(); ++j) out(i, a.cols() + j) = b(i, j);
    }
    return out;
}

std::string to_string(const Matrix& a) {
    std::ostringstream os;
    os.precision(17);
    os << '[';
    for (std::size_t i = 0; i < a.rows(); ++i) {
        os << (i ? ", [" : "[");
        for (std::size_t j = 0; j < a.cols(); ++j) os << (j ? ", " : "") << a(i, j);
        os << ']';
    }
    os << ']';
    return os.str();
}

}  // namespace ttssa
