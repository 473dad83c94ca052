#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "pdsde/bilinear.hpp"
#include "pdsde/damping.hpp"
#include "pdsde/errors.hpp"
#include "pdsde/rng.hpp"
#include "pdsde/stats.hpp"

namespace pdsde {

/// tamed_euler: x += dt f / (1 + dt |f|) + sqrt(dt) sigma . xi, with f = B(x,x) - A x.
/// split_rk4:   x = RK4_dt(x) for dx/dt = f, then x += sqrt(dt) sigma . xi.
/// Both are weak order one for additive noise. The split scheme keeps the
/// conservative part's energy error at O(dt^4), which matters at |x| >> 1
/// where the explicit scheme injects dt^2 |f|^2 per step.
enum class Scheme { tamed_euler, split_rk4 };
const char* to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

struct SimConfig {
    double T = 1.0;
    double dt = 1e-3;
    Scheme scheme = Scheme::tamed_euler;
    std::size_t record_stride = 1;
};

// dt = min(1e-3, 0.05 / (1 + |x0| max|b|)).
double default_sde_dt(const CoefficientTensor& b, const Vector& x0);

/// One sample path of dx = (B(x,x) - A x) dt + diag(noise) dW.
///
/// Coordinate m draws its Gaussian increments from its own stream
/// seed_derive(seed, m), so zero-amplitude coordinates can skip draws without
/// shifting any other coordinate's noise.
class PathIntegrator {
public:
    PathIntegrator(const CoefficientTensor& b, const Matrix& damping, const Vector& noise, double dt, Scheme scheme,
                   std::uint64_t seed);

    int dim() const noexcept { return d_; }
    double dt() const noexcept { return dt_; }

    // Advances x (length d) by one step.
    void step(double* x);

    // Deterministic and stochastic parts of the last increment.
    const double* drift_increment() const noexcept { return drift_inc_.data(); }
    const double* noise_increment() const noexcept { return noise_inc_.data(); }

private:
    const CoefficientTensor* b_;
    Matrix damping_;
    bool damped_;
    Vector noise_;
    int d_;
    double dt_;
    double sqrt_dt_;
    Scheme scheme_;
    std::vector<Stream> streams_;
    std::vector<double> drift_inc_, noise_inc_, work_;
};

struct SdePath {
    std::vector<double> times;
    Matrix states;  // rows are recorded states
    std::uint64_t seed = 0;
    double dt = 0.0;
    std::size_t stride = 1;
    Scheme scheme = Scheme::tamed_euler;
};

SdePath em_simulate(const CoefficientTensor& b, const DampingSpec& damping, const Vector& x0, const SimConfig& cfg,
                    std::uint64_t seed);

// dx = (B(x,x) - eps A x) dt + eps^{3/2} sigma dW.
SdePath simulate_rescaled(const CoefficientTensor& b, const DampingSpec& damping, double eps, const Vector& x0,
                          const SimConfig& cfg, std::uint64_t seed);

struct StoppingOutcome {
    double tau = 0.0;
    bool censored = false;
    std::size_t steps = 0;
};

/// Grid-resolved first passage: returns the first grid time at which `stop(x)` holds,
/// checking the initial state first; censored at `horizon`.
template <class StepFn, class StopFn>
StoppingOutcome first_passage(StepFn&& step, StopFn&& stop, double* x, int d, double dt, double horizon) {
    if (stop(static_cast<const double*>(x))) return {0.0, false, 0};
    const auto n_max = static_cast<std::size_t>(std::llround(horizon / dt));
    for (std::size_t n = 1; n <= n_max; ++n) {
        step(x);
        for (int i = 0; i < d; ++i) {
            if (!std::isfinite(x[i])) throw BlowupDetected("first_passage: non-finite state", n);
        }
        if (stop(static_cast<const double*>(x))) return {static_cast<double>(n) * dt, false, n};
    }
    return {static_cast<double>(n_max) * dt, true, n_max};
}

struct StoppingRecord {
    double epsilon = 0.0;
    double delta = 0.0;
    double tau = 0.0;
    bool censored = false;
    double horizon = 0.0;
    double dt = 0.0;
    std::uint64_t seed = 0;
};

// Membership in the exit set: 1/2 <= |x| <= 3/2 and dist(x, axes) >= delta.
bool in_exit_set(const double* x, int d, double delta);

StoppingRecord exit_time(const CoefficientTensor& b, const DampingSpec& damping, double eps, double delta,
                         const Vector& x0, double horizon, double dt, std::uint64_t seed);

// Path p uses seed_derive(master_seed, p).
std::vector<StoppingRecord> exit_time_ensemble(const CoefficientTensor& b, const DampingSpec& damping, double eps,
                                               double delta, const Vector& x0, double horizon, double dt,
                                               std::size_t n_paths, std::uint64_t master_seed, int threads = 1);

struct EnergyBalanceReport {
    double T = 0.0;
    double dt = 0.0;
    std::size_t n = 0;
    // E|x_T|^2 + 2 int_0^T E[A x.x] - |x0|^2 - T sum sigma^2 (left-point quadrature)
    double residual = 0.0;
    double se = 0.0;
    // Residual with the discrete martingale removed path by path: pure discretization bias.
    double bias = 0.0;
    double bias_se = 0.0;
};

EnergyBalanceReport energy_balance(const CoefficientTensor& b, const DampingSpec& damping, const Vector& x0, double T,
                                   double dt, std::size_t n_paths, std::uint64_t master_seed, int threads = 1,
                                   Scheme scheme = Scheme::tamed_euler);

struct Estimate {
    double mean = 0.0;
    double se = 0.0;
    std::size_t n = 0;
    double horizon = 0.0;
};

// E int_0^{C0 |log eps|} A x.x dt along the rescaled dynamics.
Estimate coercivity(const CoefficientTensor& b, const DampingSpec& damping, double eps, const Vector& x0, double C0,
                    double dt, std::size_t n_paths, std::uint64_t master_seed, int threads = 1);

// (1/T) int <Pi_K x, Pi_K B(x,x)> dt by the trapezoid rule on the recorded grid.
double flux_average(const SdePath& path, const CoefficientTensor& b, const KernelSpec& K);

struct FluxReport {
    double T = 0.0;
    // Time average of <Pi_K x, Pi_K B(x,x)> over every step (trapezoid).
    double bracket_average = 0.0;
    // (|Pi_K x_T|^2 - |Pi_K x_0|^2 - sum |Pi_K dx|^2) / (2T): the same quantity
    // obtained from Ito bookkeeping of |Pi_K x|^2 along the path.
    double ito_balanced = 0.0;
    // sum |Pi_K dx|^2 / T, which converges to sum_{m <= J} sigma_m^2.
    double quadratic_variation_rate = 0.0;
};

// Streams a single long path without storing it.
FluxReport flux_run(const CoefficientTensor& b, const DampingSpec& damping, const Vector& x0, double T, double dt,
                    std::uint64_t seed);

}  // namespace pdsde
