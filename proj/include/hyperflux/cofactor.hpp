#pragma once

// The cofactor vector field of a square map: A_i(x) is the algebraic cofactor
// of entry (1,i) of the Jacobian of phi at x, i.e.
//   A_i = (-1)^(i+1) det( Jacobian with row 1 and column i removed ).
// Laplace expansion along row j of the Jacobian gives
//   sum_i A_i * d(phi^j)/dx_i = (j == 1 ? det J : 0),
// and for C^2 maps A is divergence-free.

#include <span>
#include <stdexcept>
#include <vector>

#include "hyperflux/diff.hpp"
#include "hyperflux/expr.hpp"
#include "hyperflux/linalg.hpp"

namespace hyperflux {

struct CofactorVector {
    std::vector<double> components;  // length = ambient dimension m

    int dim() const { return static_cast<int>(components.size()); }
    double operator[](int i) const { return components[static_cast<std::size_t>(i)]; }
};

/// Cofactors of the first row of an m x m matrix, as a length-m vector.
/// Column i's cofactor is read off by dropping row 1, transposing, and taking
/// the signed maximal minors: both routes give (-1)^(i+1) det(J minus row 1,
/// column i).
inline CofactorVector first_row_cofactors(const Matrix& j) {
    if (j.rows() != j.cols()) throw std::invalid_argument("first_row_cofactors: matrix not square");
    const int m = j.rows();
    if (m == 1) return {{1.0}};
    Matrix rest(m, m - 1);  // transpose of J with row 1 deleted
    for (int r = 1; r < m; ++r)
        for (int c = 0; c < m; ++c) rest(c, r - 1) = j(r, c);
    return {normal_from_minors(rest)};
}

inline CofactorVector cofactor_field(const MapExpr& phi, std::span<const double> point,
                                     const DiffConfig& cfg) {
    if (phi.dim_out() != phi.arity_in())
        throw std::invalid_argument("cofactor_field: map is not square");
    return first_row_cofactors(jacobian(phi, point, cfg));
}

}  // namespace hyperflux
