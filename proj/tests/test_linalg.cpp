#include <catch2/catch_amalgamated.hpp>

#include <cstdint>

#include "hyperflux/linalg.hpp"
#include "hyperflux/quad.hpp"  // mix64 for reproducible random matrices

using namespace hyperflux;

namespace {

// textbook cofactor expansion along the first row: slow, obviously correct,
// and exact for integer entries well inside 2^53
double det_cofactor(const Matrix& a) {
    const int n = a.rows();
    if (n == 1) return a(0, 0);
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
        Matrix sub(n - 1, n - 1);
        for (int r = 1; r < n; ++r)
            for (int c = 0, cc = 0; c < n; ++c)
                if (c != j) sub(r - 1, cc++) = a(r, c);
        const double sign = (j % 2 == 0) ? 1.0 : -1.0;
        sum += sign * a(0, j) * det_cofactor(sub);
    }
    return sum;
}

// integer entries in [-range, range]
Matrix random_int_matrix(int rows, int cols, std::uint64_t seed, int range) {
    Matrix a(rows, cols);
    std::uint64_t k = 0;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            a(r, c) = static_cast<double>(
                static_cast<std::int64_t>(mix64(seed, k++) % (2 * range + 1)) - range);
    return a;
}

}  // namespace

TEST_CASE("determinant closed forms for small orders") {
    Matrix a(2, 2);
    a(0, 0) = 3;
    a(0, 1) = 7;
    a(1, 0) = -2;
    a(1, 1) = 5;
    CHECK(det(a) == 29.0);

    Matrix b(3, 3);
    const double vals[9] = {2, -1, 0, 3, 4, 5, 1, 0, 6};
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) b(r, c) = vals[3 * r + c];
    CHECK(det(b) == det_cofactor(b));

    Matrix e(0, 0);
    CHECK(det(e) == 1.0);  // empty product convention
}

TEST_CASE("elimination path agrees exactly with cofactor expansion on integers") {
    for (int n = 4; n <= 8; ++n) {
        for (int rep = 0; rep < 20; ++rep) {
            const Matrix a =
                random_int_matrix(n, n, 1000u * static_cast<std::uint64_t>(n) + rep, 6);
            INFO("n=" << n << " rep=" << rep);
            CHECK(det(a) == det_cofactor(a));  // bit-exact, not approximate
        }
    }
}

TEST_CASE("singular integer matrices give exactly zero") {
    Matrix a = random_int_matrix(5, 5, 42, 9);
    for (int c = 0; c < 5; ++c) a(4, c) = a(0, c) + 2 * a(1, c);  // dependent row
    CHECK(det(a) == 0.0);
}

TEST_CASE("determinant rejects unsupported shapes") {
    CHECK_THROWS_AS(det(Matrix(2, 3)), std::invalid_argument);
    CHECK_THROWS_AS(det(Matrix(max_dim + 1, max_dim + 1)), std::invalid_argument);
}

TEST_CASE("row-deleted minors match explicitly built submatrices") {
    const Matrix a = random_int_matrix(5, 4, 7, 5);
    for (int drop = 0; drop < 5; ++drop) {
        Matrix sub(4, 4);
        for (int r = 0, rr = 0; r < 5; ++r) {
            if (r == drop) continue;
            for (int c = 0; c < 4; ++c) sub(rr, c) = a(r, c);
            ++rr;
        }
        CHECK(minor_det(a, drop) == det_cofactor(sub));
    }
}

TEST_CASE("minor vector is orthogonal to every column") {
    for (int m = 2; m <= 6; ++m) {
        const Matrix a = random_int_matrix(m, m - 1, 91u + static_cast<std::uint64_t>(m), 7);
        const auto n = normal_from_minors(a);
        REQUIRE(static_cast<int>(n.size()) == m);
        for (int c = 0; c < m - 1; ++c) {
            double d = 0.0;
            for (int r = 0; r < m; ++r) d += n[static_cast<std::size_t>(r)] * a(r, c);
            INFO("m=" << m << " column " << c);
            CHECK(d == 0.0);  // exact: integer minors dotted with integer columns
        }
    }
}

TEST_CASE("minor-pairing sum equals the determinant of the product") {
    // P is (m-1) x m, Q is m x (m-1); pairing complementary maximal minors
    // reproduces det(P*Q) exactly on integer data
    int cases = 0;
    for (int m = 2; m <= 5; ++m) {
        for (int rep = 0; rep < 50; ++rep) {
            const std::uint64_t seed = 555u * static_cast<std::uint64_t>(m) + rep;
            const Matrix p = random_int_matrix(m - 1, m, seed, 5);
            const Matrix q = random_int_matrix(m, m - 1, seed + 17, 5);
            const double direct = det(p * q);
            INFO("m=" << m << " rep=" << rep);
            CHECK(cauchy_binet(p, q) == direct);
            ++cases;
        }
    }
    CHECK(cases == 200);
}

TEST_CASE("product and transpose behave as expected") {
    const Matrix a = random_int_matrix(3, 4, 3, 4);
    const Matrix b = random_int_matrix(4, 2, 4, 4);
    const Matrix ab = a * b;
    REQUIRE(ab.rows() == 3);
    REQUIRE(ab.cols() == 2);
    double manual = 0.0;
    for (int k = 0; k < 4; ++k) manual += a(1, k) * b(k, 0);
    CHECK(ab(1, 0) == manual);

    const Matrix at = transpose(a);
    REQUIRE(at.rows() == 4);
    CHECK(at(2, 1) == a(1, 2));
}

TEST_CASE("rank tolerance scales with the column magnitudes") {
    Matrix small(3, 2), large(3, 2);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 2; ++c) {
            small(r, c) = 1e-3 * (r + c + 1);
            large(r, c) = 1e3 * (r + c + 1);
        }
    CHECK(rank_tolerance(small) < rank_tolerance(large));
    CHECK(rank_tolerance(small) > 0.0);
}
