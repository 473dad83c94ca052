#include <cmath>
#include <complex>
#include <limits>

#include "doctest.h"
#include "pdsde/bilinear.hpp"
#include "pdsde/errors.hpp"
#include "pdsde/spectral.hpp"

using namespace pdsde;

TEST_CASE("spectrum of matrices with known eigenvalues") {
    Matrix rot(2, 2);
    rot << 0, -1, 1, 0;
    const auto ev = spectrum(rot);
    REQUIRE(ev.size() == 2);
    CHECK(ev[0].real() == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(std::abs(ev[0].imag()) == doctest::Approx(1.0));
    CHECK(ev[0].imag() < ev[1].imag());

    Matrix tri(3, 3);
    tri << 3, 1, 2, 0, -1, 5, 0, 0, 0.5;
    const auto et = spectrum(tri);
    CHECK(et[0].real() == doctest::Approx(-1.0));
    CHECK(et[1].real() == doctest::Approx(0.5));
    CHECK(et[2].real() == doctest::Approx(3.0));

    CHECK_THROWS_AS(spectrum(Matrix(2, 3)), DimensionError);
    Matrix bad = Matrix::Identity(3, 3);
    bad(1, 2) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(spectrum(bad), SpectralFailure);
}

TEST_CASE("trace identities hold on random matrices") {
    Stream rng(31);
    for (int n = 2; n <= 9; ++n) {
        Matrix m(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) m(i, j) = rng.normal();
        }
        const auto ev = spectrum(m);
        std::complex<double> s1 = 0.0, s2 = 0.0;
        for (const auto& l : ev) {
            s1 += l;
            s2 += l * l;
        }
        CHECK(s1.real() == doctest::Approx(m.trace()).epsilon(1e-10));
        CHECK(std::abs(s1.imag()) <= 1e-10);
        CHECK(s2.real() == doctest::Approx((m * m).trace()).epsilon(1e-9));
        for (std::size_t k = 1; k < ev.size(); ++k) {
            CHECK((ev[k - 1].real() < ev[k].real() ||
                   (ev[k - 1].real() == ev[k].real() && ev[k - 1].imag() <= ev[k].imag())));
        }
    }
}

TEST_CASE("axis linearization kills its axis and is traceless") {
    Stream rng(2);
    for (int d = 4; d <= 8; ++d) {
        const CoefficientTensor b = sample(d, 1.0, rng);
        for (int axis = 0; axis < d; ++axis) {
            const Matrix L = linearization(b, axis, 1.7);
            CHECK(L.col(axis).norm() == 0.0);
            CHECK(L(axis, axis) == 0.0);
            CHECK(std::abs(L.trace()) <= 1e-13 * L.norm());
            for (int k = 0; k < d; ++k) {
                for (int j = 0; j < d; ++j) CHECK(L(k, j) == 2.0 * 1.7 * b(k, axis, j));
            }
        }
    }
    const CoefficientTensor b = sample(4, 1.0, rng);
    CHECK_THROWS_AS(linearization(b, 4), IndexError);
    CHECK_THROWS_AS(linearization(b, 0, 0.0), InvalidParameter);
}

TEST_CASE("generic tensors are hyperbolic on every axis") {
    Stream rng(6);
    const CoefficientTensor b = sample(4, 1.0, rng);
    const HyperbolicityReport r = hyperbolicity_report(b);
    CHECK(r.pass);
    CHECK(r.min_margin == doctest::Approx(0.41479).epsilon(1e-4));
    REQUIRE(r.axes.size() == 4);
    for (const AxisSpectrum& a : r.axes) {
        CHECK(a.n_center == 1);
        CHECK(a.n_unstable >= 1);
        CHECK(a.n_stable + a.n_unstable + a.n_center == 4);
        CHECK(a.classes.size() == a.eigenvalues.size());
    }
}

TEST_CASE("eigenvalues scale linearly with the equilibrium amplitude") {
    Stream rng(19);
    const CoefficientTensor b = sample(5, 1.0, rng);
    const auto e1 = spectrum(linearization(b, 2, 1.0));
    const auto e3 = spectrum(linearization(b, 2, 3.0));
    for (std::size_t k = 0; k < e1.size(); ++k) CHECK(std::abs(3.0 * e1[k] - e3[k]) <= 1e-10);
}

TEST_CASE("zero tensor fails the verdict") {
    const HyperbolicityReport r = hyperbolicity_report(CoefficientTensor::zero(4));
    CHECK_FALSE(r.pass);
    CHECK(r.axes[0].n_center == 4);
    CHECK_THROWS_AS(spectral_split(CoefficientTensor::zero(4), 0), NotHyperbolic);
}

TEST_CASE("spectral projectors split the space invariantly") {
    Stream rng(6);
    const CoefficientTensor b = sample(4, 1.0, rng);
    for (int axis = 0; axis < 4; ++axis) {
        const SpectralSplit s = spectral_split(b, axis, 1.0);
        const Matrix L = linearization(b, axis, 1.0);
        const Matrix I = Matrix::Identity(4, 4);
        CHECK((s.proj_s + s.proj_u + s.proj_c - I).norm() <= 1e-10);
        for (const Matrix* p : {&s.proj_s, &s.proj_u, &s.proj_c}) {
            CHECK((*p * *p - *p).norm() <= 1e-10);
            CHECK((L * *p - *p * L).norm() <= 1e-10 * L.norm());
        }
        CHECK((s.proj_s * s.proj_u).norm() <= 1e-10);
        CHECK(s.basis_c.cols() == 1);
        CHECK(s.basis_s.cols() + s.basis_u.cols() + s.basis_c.cols() == 4);
        CHECK((L * s.basis_c).norm() <= 1e-10);
        CHECK(s.lambda_min_unstable > 0.0);
        CHECK(s.margin > 0.0);
    }
    CHECK(spectral_split(b, 0).lambda_min_unstable == doctest::Approx(1.09135).epsilon(1e-4));
}
