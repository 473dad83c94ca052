#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "pdsde/rng.hpp"

namespace pdsde {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Number of free coordinates of the constraint class in dimension d: 2 * C(d, 3).
std::size_t class_dimension(int d);

/// Unconstrained coefficient array b^i_{jk} of shape d x d x d (0-based).
class RawTensor {
public:
    explicit RawTensor(int d);

    int dim() const noexcept { return d_; }
    double& operator()(int i, int j, int k) { return data_[index(i, j, k)]; }
    double operator()(int i, int j, int k) const { return data_[index(i, j, k)]; }

    double max_abs() const;
    double frobenius() const;
    std::span<const double> flat() const noexcept { return data_; }
    std::span<double> flat() noexcept { return data_; }

private:
    std::size_t index(int i, int j, int k) const noexcept {
        return (static_cast<std::size_t>(i) * d_ + j) * d_ + k;
    }
    int d_;
    std::vector<double> data_;
};

/// A point b of the constraint class: symmetric in the lower indices,
/// vanishing whenever the upper index repeats a lower one or the lower
/// indices coincide, and satisfying b^i_{jk} + b^j_{ik} + b^k_{ij} = 0.
///
/// Only the entries b^i_{jk} with j < k are stored (one row of d(d-1)/2
/// pair slots per component i). Instances are built from free coordinates
/// or from a raw array that passed the membership check, so the invariants
/// hold by construction. Immutable after construction.
class CoefficientTensor {
public:
    static CoefficientTensor zero(int d);
    // `free` lists, per triple i<j<k in lexicographic order, b^i_{jk} then b^j_{ik}.
    static CoefficientTensor from_free(int d, std::span<const double> free);
    // Throws DimensionError unless `raw` is a member at relative tolerance `tol`.
    // Stored entries are the symmetrized pairs (raw(i,j,k) + raw(i,k,j)) / 2.
    static CoefficientTensor from_raw(const RawTensor& raw, double tol = 1e-12);

    int dim() const noexcept { return d_; }
    // b^i_{jk}, 0-based.
    double operator()(int i, int j, int k) const noexcept;
    double max_abs() const noexcept { return max_abs_; }

    std::vector<double> free_coordinates() const;
    RawTensor to_raw() const;

    CoefficientTensor scaled(double factor) const;
    CoefficientTensor permuted(std::span<const int> perm) const;

    // out = B(x, x); `out` must not alias `x`. No allocation, used in integrator loops.
    void quadratic(const double* x, double* out) const noexcept;
    // out = B(x, y).
    void bilinear(const double* x, const double* y, double* out) const noexcept;

    friend bool operator==(const CoefficientTensor&, const CoefficientTensor&) = default;

private:
    CoefficientTensor(int d, std::vector<double> packed);
    std::size_t pair_index(int j, int k) const noexcept;  // requires j < k

    int d_ = 0;
    std::size_t pairs_ = 0;
    std::vector<double> packed_;
    double max_abs_ = 0.0;
};

struct Triple {
    int i, j, k;  // 0-based, i < j < k
    friend bool operator==(const Triple&, const Triple&) = default;
};

// Lexicographic list of the triples i<j<k; position t owns free slots 2t and 2t+1.
std::vector<Triple> triples(int d);

struct FreeSlot {
    Triple triple;
    int slot;  // 0: b^i_{jk}, 1: b^j_{ik}
};

struct ClassBasis {
    int d = 0;
    std::vector<CoefficientTensor> elements;
    std::vector<FreeSlot> free_index_map;
};

ClassBasis class_basis(int d);

// Uniform on [-scale, scale]^(2 C(d,3)) in free coordinates.
CoefficientTensor sample(int d, double scale, Stream& rng);

Vector evaluate(const CoefficientTensor& b, const Vector& x, const Vector& y);

// sum_i d/dx^i (B(x,x))^i = 2 sum_{i,k} b^i_{ik} x^k
double divergence(const RawTensor& b, const Vector& x);
double divergence(const CoefficientTensor& b, const Vector& x);

// Euclidean-orthogonal projection of a raw array onto the class.
CoefficientTensor project(const RawTensor& raw);

// Cyclic advection (B(x,x))_k = (x_{k+1} - x_{k-2}) x_{k-1}.
CoefficientTensor lorenz96(int d);

struct MembershipReport {
    int d = 0;
    double scale = 0.0;  // max |b|
    double symmetry = 0.0;
    double zero_pattern = 0.0;
    double jacobi = 0.0;
    double tol = 0.0;  // relative to scale
    bool pass = false;
    // 0-based triple {i,j,k} of the worst Jacobi residual.
    std::array<int, 3> worst_jacobi{0, 0, 0};
};

MembershipReport verify_membership(const RawTensor& raw, double tol);

// Tensor file format: {"d": d, "entries": [[i, j, k, value], ...]} with 1-based
// indices listing the free coordinates b^i_{jk} and b^j_{ik} of each triple i<j<k.
nlohmann::json to_json(const CoefficientTensor& b);
CoefficientTensor tensor_from_json(const nlohmann::json& j);
CoefficientTensor load_tensor(const std::string& path);
void save_tensor(const CoefficientTensor& b, const std::string& path);

}  // namespace pdsde
