#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "pdsde/errors.hpp"
#include "pdsde/flow.hpp"

using namespace pdsde;

namespace {

Vector unit_random(int d, Stream& rng) {
    Vector x(d);
    for (int i = 0; i < d; ++i) x[i] = rng.normal();
    return x / x.norm();
}

// State at time t (possibly negative) by RK4 with n steps; backward time runs the flow of -B.
Vector flow_to(const CoefficientTensor& b, const Vector& x0, double t, int n) {
    if (t == 0.0) return x0;
    const CoefficientTensor f = t > 0 ? b : b.scaled(-1.0);
    const Trajectory tr = integrate(f, x0, std::abs(t), std::abs(t) / n);
    return tr.states.row(tr.states.rows() - 1).transpose();
}

}  // namespace

TEST_CASE("RK4 trajectory conserves energy and converges at fourth order") {
    Stream rng(2);
    const CoefficientTensor b = sample(5, 1.0, rng);
    const Vector x0 = unit_random(5, rng);
    const double dt = 0.02;
    const Trajectory a = integrate(b, x0, 2.0, dt);
    CHECK(a.states.rows() == 101);
    CHECK(a.times.back() == doctest::Approx(2.0));
    for (Eigen::Index r = 0; r < a.states.rows(); ++r) CHECK(a.states.row(r).norm() == doctest::Approx(1.0).epsilon(1e-7));

    auto end = [&](double h) {
        const Trajectory t = integrate(b, x0, 2.0, h);
        return Vector(t.states.row(t.states.rows() - 1).transpose());
    };
    const Vector x1 = end(0.04), x2 = end(0.02), x3 = end(0.01);
    const double ratio = (x1 - x2).norm() / (x2 - x3).norm();
    CHECK(ratio == doctest::Approx(16.0).epsilon(0.15));
}

TEST_CASE("integrate rejects oversized steps") {
    const CoefficientTensor b = lorenz96(5);
    const Vector x0 = 10.0 * Vector::Unit(5, 2);
    CHECK(max_flow_dt(b, x0) == doctest::Approx(0.1 / (1.0 + 0.5 * 10.0)));
    CHECK(default_flow_dt(b, x0) == doctest::Approx(0.01 / (1.0 + 0.5 * 10.0)));
    CHECK_THROWS_AS(integrate(b, x0, 1.0, 0.5), InvalidParameter);
    CHECK_THROWS_AS(integrate(b, x0, -1.0, 0.001), InvalidParameter);
    CHECK_THROWS_AS(integrate(b, Vector::Zero(4), 1.0, 0.001), DimensionError);
}

TEST_CASE("derivative polynomials match finite differences of the trajectory") {
    Stream rng(7);
    const int d = 5;
    const std::vector<double> nodes{-4, -3, -2, -1, 0, 1, 2, 3, 4};
    const auto weights = oracle::fornberg_weights(0.0, nodes, 5);
    for (int s = 0; s < 100; ++s) {
        const CoefficientTensor b = sample(d, 1.0, rng);
        const Vector x = unit_random(d, rng);
        const double h = 0.05;
        std::vector<Vector> samples;
        for (double k : nodes) samples.push_back(flow_to(b, x, k * h, 200));
        const auto P = derivative_polynomials(b, x, 14);
        REQUIRE(P.size() == 15);
        CHECK((P[0] - x).norm() == 0.0);
        for (int j = 1; j <= 4; ++j) {
            Vector fd = Vector::Zero(d);
            double wsum = 0.0;
            for (std::size_t n = 0; n < nodes.size(); ++n) {
                fd += weights[static_cast<std::size_t>(j)][n] * samples[n];
                wsum += std::abs(weights[static_cast<std::size_t>(j)][n]);
            }
            fd /= std::pow(h, j);
            // The centred 9-point stencil is exact to order 8 for j <= 2 and order 6 otherwise, so the
            // leading truncation term is h^p times derivative j + p. The second term covers roundoff.
            const int p = j <= 2 ? 8 : 6;
            const auto k = static_cast<std::size_t>(j + p);
            const double tol = std::pow(h, p) * std::max(P[k].norm(), h * P[k + 1].norm()) + 1e-12 * wsum / std::pow(h, j);
            CHECK((fd - P[static_cast<std::size_t>(j)]).norm() <= tol);
        }
    }
}

TEST_CASE("derivative polynomials are homogeneous") {
    Stream rng(9);
    const CoefficientTensor b = sample(6, 1.0, rng);
    const Vector x = unit_random(6, rng);
    const auto p1 = derivative_polynomials(b, x, 6);
    const auto p2 = derivative_polynomials(b, 2.0 * x, 6);
    for (std::size_t j = 0; j < p1.size(); ++j) {
        CHECK((p2[j] - std::ldexp(1.0, static_cast<int>(j) + 1) * p1[j]).norm() <=
              1e-12 * std::ldexp(1.0, static_cast<int>(j) + 1) * p1[j].norm() + 1e-300);
    }
    CHECK_THROWS_AS(derivative_polynomials(b, x, 0), InvalidParameter);
}

TEST_CASE("distance to axes") {
    Vector x(3);
    x << 3.0, 4.0, 0.0;
    CHECK(distance_to_axes(x) == doctest::Approx(3.0));
    Stream rng(4);
    for (int s = 0; s < 50; ++s) {
        const Vector y = unit_random(5, rng);
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < 5; ++i) {
            const Vector proj = y[i] * Vector::Unit(5, i);
            best = std::min(best, (y - proj).norm());
        }
        CHECK(distance_to_axes(y) == doctest::Approx(best).epsilon(1e-12));
    }
}

TEST_CASE("kernel escape on generic tensors") {
    Stream rng(13);
    const CoefficientTensor b = sample(6, 1.0, rng);
    const KernelSpec K(6, 3);
    Vector x = Vector::Zero(6);
    x << 0.6, -0.5, 0.4, 0, 0, 0;
    const Escape e = kernel_escape(b, K, x, 8);
    REQUIRE(e.j_min.has_value());
    CHECK(e.margin > 0.0);
    const auto P = derivative_polynomials(b, x, 8);
    for (int j = 0; j < *e.j_min; ++j) CHECK(K.project_perp(P[static_cast<std::size_t>(j)]).norm() <= 1e-9);
    CHECK(K.project_perp(P[static_cast<std::size_t>(*e.j_min)]).norm() == doctest::Approx(e.margin));
    x[4] = 0.1;
    CHECK_THROWS_AS(kernel_escape(b, K, x, 8), InvalidParameter);
}

TEST_CASE("K_delta scan is reproducible and partition independent") {
    Stream rng(15);
    const CoefficientTensor b = sample(6, 1.0, rng);
    const KernelSpec K(6, 3);
    const EscapeScan a = kdelta_scan(b, K, 0.2, 200, 8, 77, 1);
    const EscapeScan c = kdelta_scan(b, K, 0.2, 200, 8, 77, 3);
    REQUIRE(a.samples.size() == 200);
    CHECK(a.unescaped == 0);
    REQUIRE(a.J_delta.has_value());
    CHECK(a.J_delta == c.J_delta);
    CHECK(a.c_delta == c.c_delta);
    for (std::size_t p = 0; p < a.samples.size(); ++p) {
        const Vector& x = a.samples[p].x;
        CHECK(x == c.samples[p].x);
        CHECK(x.norm() >= 0.5);
        CHECK(x.norm() <= 1.5);
        CHECK(distance_to_axes(x) >= 0.2);
        CHECK(x.tail(3).norm() == 0.0);
    }
    CHECK_THROWS_AS(kdelta_scan(b, K, 0.6, 10, 8, 1), InvalidParameter);
    CHECK_THROWS_AS(kdelta_scan(b, KernelSpec(6, 0), 0.2, 10, 8, 1), SamplingError);
    // With J = 1 every kernel point lies on an axis, so the slice is empty.
    CHECK_THROWS_AS(kdelta_scan(b, KernelSpec(6, 1), 0.2, 1, 8, 1), SamplingError);
}

TEST_CASE("transversality determinant: closed form equals the explicit matrix") {
    Stream rng(23);
    for (int s = 0; s < 50; ++s) {
        const CoefficientTensor b = sample(5, 1.0, rng);
        const Vector x = unit_random(5, rng);
        const DetD v = transversality_detD(b, x, 0, 2, 4);
        CHECK(v.formula == doctest::Approx(v.matrix).epsilon(1e-12).scale(1.0));
    }
    const CoefficientTensor b = lorenz96(5);
    const Vector x = Vector::Ones(5);
    CHECK_THROWS_AS(transversality_detD(b, x, 0, 0, 1), InvalidParameter);
    CHECK_THROWS_AS(transversality_detD(b, x, 0, 1, 5), IndexError);
}
