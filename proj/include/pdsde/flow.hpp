#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pdsde/bilinear.hpp"
#include "pdsde/damping.hpp"

namespace pdsde {

struct Trajectory {
    double dt = 0.0;
    std::vector<double> times;
    Matrix states;  // (steps + 1) x d
};

// Largest step accepted by integrate: 0.1 / (1 + max|b| |x0|).
double max_flow_dt(const CoefficientTensor& b, const Vector& x0);
// Default step: 0.01 / (1 + max|b| |x0|).
double default_flow_dt(const CoefficientTensor& b, const Vector& x0);

// Classical RK4 for dx/dt = B(x, x) sampled every dt up to T.
// Throws BlowupDetected (with the step index) on non-finite states.
Trajectory integrate(const CoefficientTensor& b, const Vector& x0, double T, double dt);

// Single RK4 step of dx/dt = B(x,x) - A x, in place. `work` holds 5 d scratch values.
void rk4_step(const CoefficientTensor& b, const Matrix* damping, double* x, double dt, double* work);

// [P_1, ..., P_{j_max+1}] with P_{j+1} the j-th time derivative of the flow at x.
std::vector<Vector> derivative_polynomials(const CoefficientTensor& b, const Vector& x, int j_max);

struct Escape {
    std::optional<int> j_min;  // smallest j with Pi_K^perp P_{j+1}(x) != 0
    double margin = 0.0;       // |Pi_K^perp P_{j_min+1}(x)|
};

Escape kernel_escape(const CoefficientTensor& b, const KernelSpec& K, const Vector& x, int j_max);

// Euclidean distance to the union of the coordinate axes.
double distance_to_axes(const Vector& x);

struct EscapeSample {
    Vector x;
    std::optional<int> j_min;
    double margin = 0.0;
};

struct EscapeScan {
    double delta = 0.0;
    std::vector<EscapeSample> samples;
    std::optional<int> J_delta;  // max j_min (empty if some point never escaped)
    double c_delta = 0.0;        // min margin
    std::size_t unescaped = 0;
};

/// Samples n points uniformly on {x in K : 1/2 <= |x| <= 3/2, dist(x, axes) >= delta} by
/// rejection (point p draws from stream seed_derive(seed, p)) and records their escape order.
/// Throws SamplingError when a point needs more than 10^6 draws.
EscapeScan kdelta_scan(const CoefficientTensor& b, const KernelSpec& K, double delta, std::size_t n_samples,
                       int j_max, std::uint64_t seed, int threads = 1);

struct DetD {
    double formula = 0.0;  // 4 (x^k)^2 (xdot^p x^m - xdot^m x^p)
    double matrix = 0.0;   // determinant of the explicit 2 x 2 matrix D
};

DetD transversality_detD(const CoefficientTensor& b, const Vector& x, int k, int m, int p);

}  // namespace pdsde
