#pragma once

// Dense row-major matrices sized for Jacobians (dimension cap 12), with the
// determinant machinery the geometry layer needs: signed maximal minors of
// tall matrices, the induced normal vector, and the Cauchy-Binet expansion of
// det(P*Q) into products of maximal minors.

#include <array>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace hyperflux {

inline constexpr int max_dim = 12;

class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, 0.0) {
        assert(rows >= 0 && cols >= 0);
    }

    static Matrix identity(int n) {
        Matrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    double& operator()(int r, int c) {
        assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
        return data_[static_cast<std::size_t>(r) * cols_ + c];
    }
    double operator()(int r, int c) const {
        assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
        return data_[static_cast<std::size_t>(r) * cols_ + c];
    }

    std::span<const double> row(int r) const {
        return {data_.data() + static_cast<std::size_t>(r) * cols_, static_cast<std::size_t>(cols_)};
    }

private:
    int rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

inline Matrix operator*(const Matrix& a, const Matrix& b) {
    assert(a.cols() == b.rows());
    Matrix c(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            for (int j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

inline Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double norm_inf(std::span<const double> a) {
    double m = 0.0;
    for (double v : a) m = std::fmax(m, std::abs(v));
    return m;
}

namespace detail {

// Fraction-free (Bareiss) elimination with partial pivoting.  Every
// intermediate entry of the working matrix is itself a minor of the input, so
// on integer matrices all divisions are exact and the result carries no
// rounding error as long as minors stay below 2^53.  Row swaps only flip the
// sign.  This is what lets determinant identities on integer Jacobians be
// checked for exact equality rather than within a tolerance.
inline double det_bareiss(Matrix a) {
    const int n = a.rows();
    double sign = 1.0;
    double prev = 1.0;
    for (int k = 0; k < n - 1; ++k) {
        int piv = k;
        for (int r = k + 1; r < n; ++r)
            if (std::abs(a(r, k)) > std::abs(a(piv, k))) piv = r;
        if (a(piv, k) == 0.0) return 0.0;
        if (piv != k) {
            for (int c = k; c < n; ++c) std::swap(a(piv, c), a(k, c));
            sign = -sign;
        }
        for (int i = k + 1; i < n; ++i) {
            for (int j = k + 1; j < n; ++j)
                a(i, j) = (a(i, j) * a(k, k) - a(i, k) * a(k, j)) / prev;
            a(i, k) = 0.0;
        }
        prev = a(k, k);
    }
    return sign * a(n - 1, n - 1);
}

}  // namespace detail

/// Determinant of a square matrix, n <= 12. Closed forms up to 3x3, Bareiss
/// elimination above (exact on integer input while minors fit in 53 bits).
inline double det(const Matrix& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("det: matrix not square");
    const int n = a.rows();
    if (n > max_dim) throw std::invalid_argument("det: dimension exceeds 12");
    switch (n) {
        case 0: return 1.0;
        case 1: return a(0, 0);
        case 2: return a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
        case 3:
            return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
                   a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
                   a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
        default: return detail::det_bareiss(a);
    }
}

/// Determinant of `a` with row `drop_row` removed; `a` must be (n+1) x n.
inline double minor_det(const Matrix& a, int drop_row) {
    assert(a.rows() == a.cols() + 1);
    assert(drop_row >= 0 && drop_row < a.rows());
    const int n = a.cols();
    Matrix m(n, n);
    for (int i = 0, r = 0; i < a.rows(); ++i) {
        if (i == drop_row) continue;
        for (int j = 0; j < n; ++j) m(r, j) = a(i, j);
        ++r;
    }
    return det(m);
}

/// The vector of signed maximal minors of an m x (m-1) matrix J:
///   N_i = (-1)^(i+1) * det(J with row i deleted),   i = 1..m.
/// When J is the Jacobian of a hypersurface chart, N is normal to the
/// surface: appending any tangent column J e_k to J gives a singular m x m
/// matrix whose Laplace expansion down the new column is exactly dot(N, J e_k).
inline std::vector<double> normal_from_minors(const Matrix& j) {
    if (j.rows() != j.cols() + 1)
        throw std::invalid_argument("normal_from_minors: expected m x (m-1) matrix");
    const int m = j.rows();
    std::vector<double> n(static_cast<std::size_t>(m));
    double sign = 1.0;
    for (int i = 0; i < m; ++i) {
        n[static_cast<std::size_t>(i)] = sign * minor_det(j, i);
        sign = -sign;
    }
    return n;
}

/// Cauchy-Binet for the maximal case: P is (m-1) x m, Q is m x (m-1), and
///   det(P*Q) = sum_i det(P minus column i) * det(Q minus row i).
/// Returns the right-hand side computed minor by minor.
inline double cauchy_binet(const Matrix& p, const Matrix& q) {
    if (p.cols() != q.rows() || p.rows() != q.cols() || p.cols() != p.rows() + 1)
        throw std::invalid_argument("cauchy_binet: need (m-1) x m times m x (m-1)");
    const int m = p.cols();
    const int k = m - 1;
    double sum = 0.0;
    Matrix pm(k, k);
    for (int drop = 0; drop < m; ++drop) {
        for (int r = 0; r < k; ++r)
            for (int c = 0, cc = 0; c < m; ++c) {
                if (c == drop) continue;
                pm(r, cc++) = p(r, c);
            }
        sum += det(pm) * minor_det(q, drop);
    }
    return sum;
}

/// Scale-relative threshold for treating a chart Jacobian as rank-deficient:
/// a surface parametrization at u is degenerate when |N(u)| fails to exceed
/// 1e-10 times the product of the Jacobian's column norms (the Hadamard
/// bound on the minors).
inline double rank_tolerance(const Matrix& a) {
    double prod = 1.0;
    for (int j = 0; j < a.cols(); ++j) {
        double s = 0.0;
        for (int i = 0; i < a.rows(); ++i) s += a(i, j) * a(i, j);
        prod *= std::sqrt(s);
    }
    return 1e-10 * prod;
}

}  // namespace hyperflux
