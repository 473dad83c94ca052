#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "doctest.h"
#include "oracles.hpp"
#include "pdsde/bilinear.hpp"
#include "pdsde/errors.hpp"

using namespace pdsde;

namespace {

Vector random_vector(int d, Stream& rng) {
    Vector x(d);
    for (int i = 0; i < d; ++i) x[i] = rng.normal();
    return x;
}

}  // namespace

TEST_CASE("class dimension counts two free slots per index triple") {
    CHECK(class_dimension(3) == 2);
    CHECK(class_dimension(4) == 8);
    CHECK(class_dimension(5) == 20);
    CHECK(class_dimension(10) == 240);
    CHECK(class_dimension(2) == 0);
    CHECK_THROWS_AS(class_basis(2), InvalidDimension);
    CHECK(triples(5).size() == 10);
}

TEST_CASE("free coordinates round-trip through the packed and raw forms") {
    Stream rng(3);
    for (int d = 3; d <= 7; ++d) {
        const CoefficientTensor b = sample(d, 2.0, rng);
        const auto free = b.free_coordinates();
        CHECK(free.size() == class_dimension(d));
        CHECK(CoefficientTensor::from_free(d, free) == b);
        const CoefficientTensor back = CoefficientTensor::from_raw(b.to_raw());
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) {
                for (int k = 0; k < d; ++k) CHECK(back(i, j, k) == b(i, j, k));
            }
        }
    }
    const std::vector<double> short_free(3, 0.0);
    CHECK_THROWS_AS(CoefficientTensor::from_free(4, short_free), DimensionError);
}

TEST_CASE("sampled tensors satisfy symmetry, zero pattern and the Jacobi identity") {
    Stream rng(11);
    for (int d = 3; d <= 8; ++d) {
        for (int s = 0; s < 50; ++s) {
            const CoefficientTensor b = sample(d, 1.0, rng);
            const MembershipReport rep = verify_membership(b.to_raw(), 1e-12);
            CHECK(rep.pass);
            for (int i = 0; i < d; ++i) {
                for (int k = 0; k < d; ++k) CHECK(b(k, i, i) == 0.0);
                for (int j = 0; j < d; ++j) {
                    for (int k = 0; k < d; ++k) CHECK(b(i, j, k) == b(i, k, j));
                }
            }
        }
    }
}

TEST_CASE("energy is conserved and the field is divergence free") {
    Stream rng(5);
    for (int d = 3; d <= 8; ++d) {
        const CoefficientTensor b = sample(d, 1.0, rng);
        for (int s = 0; s < 100; ++s) {
            const Vector x = random_vector(d, rng);
            Vector f(d);
            b.quadratic(x.data(), f.data());
            const double scale = b.max_abs() * std::pow(x.norm(), 3);
            CHECK(std::abs(x.dot(f)) <= 1e-12 * scale);
            // Divergence by summing the diagonal of the Jacobian 2 b^i_{i k} x^k directly.
            double div = 0.0;
            for (int i = 0; i < d; ++i) {
                for (int k = 0; k < d; ++k) div += 2.0 * b(i, i, k) * x[k];
            }
            CHECK(std::abs(div) <= 1e-12 * b.max_abs() * x.norm());
            CHECK(std::abs(divergence(b, x)) <= 1e-12 * b.max_abs() * x.norm());
        }
    }
}

TEST_CASE("axes are equilibria") {
    Stream rng(8);
    const CoefficientTensor b = sample(6, 1.0, rng);
    for (int i = 0; i < 6; ++i) {
        Vector f(6);
        const Vector e = 3.5 * Vector::Unit(6, i);
        b.quadratic(e.data(), f.data());
        CHECK(f.cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("evaluate is the symmetric bilinear form and matches quadratic on the diagonal") {
    Stream rng(21);
    const CoefficientTensor b = sample(5, 1.0, rng);
    const Vector x = random_vector(5, rng);
    const Vector y = random_vector(5, rng);
    const Vector z = random_vector(5, rng);
    CHECK((evaluate(b, x, y) - evaluate(b, y, x)).norm() <= 1e-14);
    CHECK((evaluate(b, 2.0 * x + z, y) - 2.0 * evaluate(b, x, y) - evaluate(b, z, y)).norm() <= 1e-12);
    Vector f(5);
    b.quadratic(x.data(), f.data());
    CHECK((evaluate(b, x, x) - f).norm() <= 1e-14);
}

TEST_CASE("class basis has full rank by row reduction") {
    for (int d = 3; d <= 8; ++d) {
        const ClassBasis basis = class_basis(d);
        REQUIRE(basis.elements.size() == class_dimension(d));
        REQUIRE(basis.free_index_map.size() == class_dimension(d));
        std::vector<std::vector<double>> rows;
        for (const auto& e : basis.elements) {
            const RawTensor raw = e.to_raw();
            rows.emplace_back(raw.flat().begin(), raw.flat().end());
            CHECK(verify_membership(raw, 1e-12).pass);
        }
        CHECK(oracle::row_reduce_rank(rows) == static_cast<int>(class_dimension(d)));
    }
}

TEST_CASE("projection agrees with the least-squares fit on the class basis") {
    Stream rng(17);
    for (int d = 3; d <= 6; ++d) {
        RawTensor raw(d);
        for (double& v : raw.flat()) v = rng.normal();
        const CoefficientTensor p = project(raw);

        const ClassBasis basis = class_basis(d);
        const auto n = static_cast<Eigen::Index>(basis.elements.size());
        const auto len = static_cast<Eigen::Index>(raw.flat().size());
        Matrix design(len, n);
        for (Eigen::Index c = 0; c < n; ++c) {
            const RawTensor e = basis.elements[static_cast<std::size_t>(c)].to_raw();
            for (Eigen::Index r = 0; r < len; ++r) design(r, c) = e.flat()[static_cast<std::size_t>(r)];
        }
        const Vector target = Eigen::Map<const Vector>(raw.flat().data(), len);
        const Vector coef = (design.transpose() * design).ldlt().solve(design.transpose() * target);
        const Vector fit = design * coef;
        const RawTensor pr = p.to_raw();
        const Vector got = Eigen::Map<const Vector>(pr.flat().data(), len);
        CHECK((fit - got).norm() <= 1e-10 * target.norm());
        // Projecting a member changes nothing.
        CHECK(project(pr) == p);
    }
}

TEST_CASE("Lorenz 96 is an exact member and matches the direct loop") {
    for (int d = 4; d <= 12; ++d) {
        const CoefficientTensor b = lorenz96(d);
        CHECK(verify_membership(b.to_raw(), 0.0).pass);
        Stream rng(static_cast<std::uint64_t>(d));
        for (int s = 0; s < 100; ++s) {
            const Vector x = random_vector(d, rng);
            Vector f(d);
            b.quadratic(x.data(), f.data());
            const Vector ref = oracle::lorenz96_direct(x);
            CHECK((f - ref).cwiseAbs().maxCoeff() <= 1e-14 * std::max(1.0, ref.cwiseAbs().maxCoeff()));
        }
    }
    CHECK_THROWS_AS(lorenz96(3), InvalidDimension);
}

TEST_CASE("membership check flags each kind of violation") {
    RawTensor asym = lorenz96(5).to_raw();
    asym(0, 1, 2) += 0.1;
    const MembershipReport r1 = verify_membership(asym, 1e-12);
    CHECK_FALSE(r1.pass);
    CHECK(r1.symmetry > 0.0);

    RawTensor diag = lorenz96(5).to_raw();
    diag(1, 0, 0) = 0.3;
    const MembershipReport r2 = verify_membership(diag, 1e-12);
    CHECK_FALSE(r2.pass);
    CHECK(r2.zero_pattern > 0.0);

    RawTensor jac = lorenz96(5).to_raw();
    jac(0, 2, 3) += 0.2;
    jac(0, 3, 2) += 0.2;
    const MembershipReport r3 = verify_membership(jac, 1e-12);
    CHECK_FALSE(r3.pass);
    CHECK(r3.jacobi > 0.0);
    CHECK(r3.worst_jacobi == std::array<int, 3>{0, 2, 3});
    CHECK_THROWS_AS(CoefficientTensor::from_raw(jac), DimensionError);
}

TEST_CASE("relabeling coordinates conjugates the field") {
    Stream rng(4);
    const CoefficientTensor b = sample(6, 1.0, rng);
    std::vector<int> perm{3, 0, 5, 1, 4, 2};
    const CoefficientTensor bp = b.permuted(perm);
    CHECK(verify_membership(bp.to_raw(), 1e-12).pass);
    const Vector y = random_vector(6, rng);
    Vector x(6);
    for (int a = 0; a < 6; ++a) x[perm[static_cast<std::size_t>(a)]] = y[a];
    Vector fy(6), fx(6);
    bp.quadratic(y.data(), fy.data());
    b.quadratic(x.data(), fx.data());
    for (int a = 0; a < 6; ++a) CHECK(fy[a] == doctest::Approx(fx[perm[static_cast<std::size_t>(a)]]).epsilon(1e-13));
}

TEST_CASE("sampling scale") {
    Stream rng(1);
    const CoefficientTensor z = sample(5, 0.0, rng);
    CHECK(z == CoefficientTensor::zero(5));
    const CoefficientTensor b = sample(5, 0.25, rng);
    for (double v : b.free_coordinates()) CHECK(std::abs(v) <= 0.25);
    CHECK_THROWS_AS(sample(5, -1.0, rng), InvalidParameter);
    CHECK_THROWS_AS(sample(2, 1.0, rng), InvalidDimension);
    Stream a(9), c(9);
    CHECK(sample(6, 1.0, a) == sample(6, 1.0, c));
}

TEST_CASE("tensor files use 1-based free slots") {
    Stream rng(12);
    const CoefficientTensor b = sample(5, 1.0, rng);
    const auto path = std::filesystem::temp_directory_path() / "pdsde_tensor_roundtrip.json";
    save_tensor(b, path.string());
    CHECK(load_tensor(path.string()) == b);
    std::filesystem::remove(path);

    const nlohmann::json j = to_json(b);
    CHECK(j.at("d") == 5);
    CHECK(j.at("entries").size() == class_dimension(5));
    for (const auto& e : j.at("entries")) {
        CHECK(e[0].get<int>() >= 1);
        CHECK(e[0].get<int>() <= 5);
    }

    // b^1_{23} and b^2_{13} are free; b^3_{12} is determined.
    const nlohmann::json ok = {{"d", 3}, {"entries", {{1, 2, 3, 0.5}, {2, 1, 3, -1.5}}}};
    const CoefficientTensor t = tensor_from_json(ok);
    CHECK(t(0, 1, 2) == 0.5);
    CHECK(t(1, 0, 2) == -1.5);
    CHECK(t(2, 0, 1) == 1.0);
    const nlohmann::json dependent = {{"d", 3}, {"entries", {{3, 1, 2, 0.5}}}};
    CHECK_THROWS_AS(tensor_from_json(dependent), DimensionError);
    const nlohmann::json duplicate = {{"d", 3}, {"entries", {{1, 2, 3, 0.5}, {1, 3, 2, 0.5}}}};
    CHECK_THROWS_AS(tensor_from_json(duplicate), DimensionError);
    const nlohmann::json out_of_range = {{"d", 3}, {"entries", {{0, 2, 3, 0.5}}}};
    CHECK_THROWS_AS(tensor_from_json(out_of_range), IndexError);
    CHECK_THROWS_AS(load_tensor("/nonexistent/tensor.json"), Error);
}
