#include <cmath>
#include <numeric>

#include "doctest.h"
#include "oracles.hpp"
#include "pdsde/damping.hpp"
#include "pdsde/errors.hpp"
#include "pdsde/ladder.hpp"
#include "pdsde/polyfield.hpp"

using namespace pdsde;

namespace {

int permutation_sign(const std::vector<int>& p) {
    int sign = 1;
    std::vector<bool> seen(p.size(), false);
    for (std::size_t s = 0; s < p.size(); ++s) {
        if (seen[s]) continue;
        std::size_t len = 0;
        for (std::size_t c = s; !seen[c]; c = static_cast<std::size_t>(p[c])) {
            seen[c] = true;
            ++len;
        }
        if (len % 2 == 0) sign = -sign;
    }
    return sign;
}

}  // namespace

TEST_CASE("witness ladder is the standard basis") {
    for (int d = 3; d <= 10; ++d) {
        const CoefficientTensor w = witness_tensor(d);
        CHECK(verify_membership(w.to_raw(), 0.0).pass);
        const LadderCertificate unit = ladder(w, 0, 1, BracketConvention::unit);
        for (int m = 0; m < d; ++m) CHECK(unit.vectors[static_cast<std::size_t>(m)] == Vector::Unit(d, m));
        CHECK(unit.G == 1.0);
        CHECK(unit.G_normalized == 1.0);
        const LadderCertificate exact = ladder(w, 0, 1, BracketConvention::exact);
        CHECK(exact.G_normalized == 1.0);
    }
    CHECK_THROWS_AS(witness_tensor(2), InvalidDimension);
}

TEST_CASE("ladder degree follows the rung recursion") {
    CHECK(ladder_degree(3) == 1);
    CHECK(ladder_degree(4) == 3);
    CHECK(ladder_degree(5) == 7);
    CHECK(ladder_degree(6) == 14);
}

TEST_CASE("G is homogeneous in the tensor") {
    Stream rng(41);
    for (int d = 3; d <= 7; ++d) {
        const CoefficientTensor b = sample(d, 1.0, rng);
        const double g1 = ladder(b, 0, 1).G;
        const double g2 = ladder(b.scaled(2.0), 0, 1).G;
        CHECK(g2 == doctest::Approx(std::ldexp(g1, ladder_degree(d))).epsilon(1e-10));
        CHECK(ladder(b.scaled(2.0), 0, 1).G_normalized == doctest::Approx(ladder(b, 0, 1).G_normalized));
    }
}

TEST_CASE("relabeling that keeps the remaining order changes G by the permutation sign") {
    Stream rng(43);
    const int d = 6;
    const CoefficientTensor b = sample(d, 1.0, rng);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            if (i == j) continue;
            std::vector<int> perm{i, j};
            for (int m = 0; m < d; ++m) {
                if (m != i && m != j) perm.push_back(m);
            }
            const CoefficientTensor bp = b.permuted(perm);
            const LadderCertificate a = ladder(b, i, j);
            const LadderCertificate c = ladder(bp, 0, 1);
            CHECK(c.G == doctest::Approx(permutation_sign(perm) * a.G).epsilon(1e-10));
            CHECK(std::abs(c.G_normalized) == doctest::Approx(std::abs(a.G_normalized)).epsilon(1e-10));
        }
    }
}

TEST_CASE("linear drift terms do not change the ladder") {
    Stream rng(47);
    const int d = 5;
    const CoefficientTensor b = sample(d, 1.0, rng);
    Matrix M(d, d);
    for (int r = 0; r < d; ++r) {
        for (int c = 0; c < d; ++c) M(r, c) = rng.normal();
    }
    const LadderCertificate ref = ladder(b, 1, 3);
    for (double eps : {0.0, 1e-3, 0.7}) {
        const PolyField drift = PolyField::quadratic(b) + PolyField::linear(M) * eps;
        const LadderCertificate got = ladder(drift, 1, 3);
        CHECK(got.G == doctest::Approx(ref.G).epsilon(1e-11));
        for (int m = 0; m < d; ++m) {
            CHECK((got.vectors[static_cast<std::size_t>(m)] - ref.vectors[static_cast<std::size_t>(m)]).norm() <=
                  1e-11 * (1.0 + ref.vectors[static_cast<std::size_t>(m)].norm()));
        }
    }
}

TEST_CASE("double brackets agree with finite differences of the drift") {
    Stream rng(53);
    for (int s = 0; s < 20; ++s) {
        const int d = 5;
        const CoefficientTensor b = sample(d, 1.0, rng);
        Matrix M = Matrix::Identity(d, d) * 0.3;
        const PolyField drift = PolyField::quadratic(b) - PolyField::linear(M);
        Vector v(d), w(d);
        for (int m = 0; m < d; ++m) {
            v[m] = rng.normal();
            w[m] = rng.normal();
        }
        const Vector symbolic =
            bracket(PolyField::constant(v), bracket(PolyField::constant(w), drift)).evaluate(Vector::Zero(d));
        const Vector fd = oracle::fd_double_bracket([&](const Vector& x) { return drift.evaluate(x); }, v, w, 1e-2);
        CHECK((symbolic - fd).norm() <= 1e-8 * symbolic.norm());
        Vector bvw(d);
        b.bilinear(v.data(), w.data(), bvw.data());
        CHECK((symbolic - 2.0 * bvw).norm() <= 1e-12 * symbolic.norm());
    }
}

TEST_CASE("polynomial field algebra") {
    Stream rng(59);
    const CoefficientTensor b = sample(4, 1.0, rng);
    const PolyField q = PolyField::quadratic(b);
    CHECK(q.degree() == 2);
    Vector x(4);
    x << 0.3, -1.2, 0.7, 2.0;
    Vector f(4);
    b.quadratic(x.data(), f.data());
    CHECK((q.evaluate(x) - f).norm() <= 1e-14);
    // Jacobi identity of the Lie bracket on three polynomial fields.
    const PolyField a = PolyField::constant(Vector::Unit(4, 0));
    const PolyField l = PolyField::linear(Matrix::Identity(4, 4) * 2.0);
    const PolyField jac = bracket(a, bracket(l, q)) + bracket(l, bracket(q, a)) + bracket(q, bracket(a, l));
    CHECK(jac.evaluate(x).norm() <= 1e-12);
    CHECK((q - q).is_zero());
    CHECK(bracket(q, q).is_zero());
    CHECK_THROWS_AS(PolyField::linear(Matrix(2, 3)), DimensionError);
}

TEST_CASE("generic tensors pass the hypoellipticity check") {
    Stream rng(61);
    int passed = 0;
    for (int s = 0; s < 100; ++s) passed += generic_hypoellipticity(sample(5, 1.0, rng), 1e-10).pass ? 1 : 0;
    CHECK(passed >= 99);
    const HypoellipticityReport zero = generic_hypoellipticity(CoefficientTensor::zero(4), 1e-10);
    CHECK_FALSE(zero.pass);
    CHECK(zero.pairs.size() == 12);
    CHECK_THROWS_AS(generic_hypoellipticity(CoefficientTensor::zero(4), -1.0), InvalidParameter);
}

TEST_CASE("ladder input errors") {
    const CoefficientTensor w = witness_tensor(4);
    CHECK_THROWS_AS(ladder(w, 0, 0), InvalidParameter);
    CHECK_THROWS_AS(ladder(w, 0, 4), IndexError);
    CHECK_THROWS_AS(ladder(w, -1, 2), IndexError);
}

TEST_CASE("column rank agrees with row reduction") {
    Stream rng(67);
    for (int s = 0; s < 30; ++s) {
        const int rows = 6;
        const int k = 1 + s % 5;
        Matrix a(rows, k), c(k, 9);
        for (int r = 0; r < rows; ++r) {
            for (int q = 0; q < k; ++q) a(r, q) = rng.normal();
        }
        for (int r = 0; r < k; ++r) {
            for (int q = 0; q < 9; ++q) c(r, q) = rng.normal();
        }
        const Matrix m = a * c;
        std::vector<std::vector<double>> cols;
        for (int q = 0; q < 9; ++q) cols.emplace_back(m.col(q).data(), m.col(q).data() + rows);
        CHECK(column_rank(m) == k);
        CHECK(oracle::row_reduce_rank(cols) == k);
    }
    CHECK(column_rank(Matrix::Zero(3, 3)) == 0);
}

TEST_CASE("bracket span reaches full rank") {
    Stream rng(6);
    const CoefficientTensor b4 = sample(4, 1.0, rng);
    Stream rng5(71);
    const CoefficientTensor b5 = sample(5, 1.0, rng5);
    for (const CoefficientTensor* b : {&b4, &b5}) {
        const int d = b->dim();
        Vector sigma = Vector::Zero(d);
        sigma[0] = sigma[1] = 1.0;
        const DampingSpec damping = DampingSpec::diagonal(d, 2, 1.0, sigma);
        const Vector origin = Vector::Zero(d);
        CHECK(numeric_bracket_span(*b, damping, 0.5, origin, 0) == 2);
        CHECK(numeric_bracket_span(*b, damping, 0.5, origin, 3) == 3);
        CHECK(numeric_bracket_span(*b, damping, 0.5, origin, 4) == d);
        Vector x(d);
        for (int m = 0; m < d; ++m) x[m] = 0.3 + 0.1 * m * (m % 2 == 0 ? 1 : -1);
        CHECK(numeric_bracket_span(*b, damping, 0.5, x, 3) == d);
        CHECK_THROWS_AS(numeric_bracket_span(*b, damping, 0.5, origin, 5), DepthError);
    }
}
