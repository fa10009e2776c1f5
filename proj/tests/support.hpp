#pragma once

#include <cstdint>
#include <random>

#include "ttssa/linalg.hpp"

namespace ttssa::test {

inline std::mt19937_64& rng() {
    static std::mt19937_64 engine(20240611);
    return engine;
}

inline double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }

inline Vector random_vector(std::size_t n, double scale = 3.0) {
    Vector v(n);
    for (auto& x : v) x = uniform(-scale, scale);
    return v;
}

inline Matrix random_matrix(std::size_t rows, std::size_t cols, double scale = 1.0) {
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = uniform(-scale, scale);
    return m;
}

// -(B B^T + 0.5 I) + (S - S^T): the symmetric part is negative definite, so the matrix is Hurwitz.
inline Matrix random_hurwitz(std::size_t n) {
    const Matrix b = random_matrix(n, n);
    const Matrix s = random_matrix(n, n);
    return -1.0 * (b * b.transpose() + 0.5 * Matrix::identity(n)) + (s - s.transpose());
}

inline Matrix random_spd(std::size_t n) {
    const Matrix b = random_matrix(n, n);
    return b * b.transpose() + 0.1 * Matrix::identity(n);
}

}  // namespace ttssa::test
