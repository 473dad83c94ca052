#include "pdsde/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pdsde/errors.hpp"
#include "pdsde/parallel.hpp"
#include "pdsde/rng.hpp"

namespace pdsde {

double max_flow_dt(const CoefficientTensor& b, const Vector& x0) {
    return 0.1 / (1.0 + b.max_abs() * x0.norm());
}

double default_flow_dt(const CoefficientTensor& b, const Vector& x0) {
    return 0.01 / (1.0 + b.max_abs() * x0.norm());
}

void rk4_step(const CoefficientTensor& b, const Matrix* damping, double* x, double dt, double* work) {
    const int d = b.dim();
    double* k1 = work;
    double* k2 = work + d;
    double* k3 = work + 2 * d;
    double* k4 = work + 3 * d;
    double* y = work + 4 * d;
    auto field = [&](const double* in, double* out) {
        b.quadratic(in, out);
        if (damping != nullptr) {
            for (int i = 0; i < d; ++i) {
                double s = 0.0;
                for (int j = 0; j < d; ++j) s += (*damping)(i, j) * in[j];
                out[i] -= s;
            }
        }
    };
    field(x, k1);
    for (int i = 0; i < d; ++i) y[i] = x[i] + 0.5 * dt * k1[i];
    field(y, k2);
    for (int i = 0; i < d; ++i) y[i] = x[i] + 0.5 * dt * k2[i];
    field(y, k3);
    for (int i = 0; i < d; ++i) y[i] = x[i] + dt * k3[i];
    field(y, k4);
    for (int i = 0; i < d; ++i) x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

Trajectory integrate(const CoefficientTensor& b, const Vector& x0, double T, double dt) {
    const int d = b.dim();
    if (x0.size() != d) throw DimensionError("integrate: x0 has wrong length");
    if (!(T > 0.0)) throw InvalidParameter("integrate: T must be positive");
    if (!(dt > 0.0) || dt > max_flow_dt(b, x0) * (1.0 + 1e-12)) {
        throw InvalidParameter("integrate: dt must lie in (0, 0.1 / (1 + max|b| |x0|)]");
    }
    const auto steps = static_cast<std::size_t>(std::llround(T / dt));
    Trajectory traj;
    traj.dt = dt;
    traj.times.resize(steps + 1);
    traj.states.resize(static_cast<Eigen::Index>(steps + 1), d);
    std::vector<double> x(x0.data(), x0.data() + d);
    std::vector<double> work(5 * static_cast<std::size_t>(d));
    traj.times[0] = 0.0;
    for (int i = 0; i < d; ++i) traj.states(0, i) = x[i];
    for (std::size_t n = 1; n <= steps; ++n) {
        rk4_step(b, nullptr, x.data(), dt, work.data());
        for (int i = 0; i < d; ++i) {
            if (!std::isfinite(x[i])) throw BlowupDetected("integrate: non-finite state", n);
            traj.states(static_cast<Eigen::Index>(n), i) = x[i];
        }
        traj.times[n] = static_cast<double>(n) * dt;
    }
    return traj;
}

std::vector<Vector> derivative_polynomials(const CoefficientTensor& b, const Vector& x, int j_max) {
    const int d = b.dim();
    if (x.size() != d) throw DimensionError("derivative_polynomials: x has wrong length");
    if (j_max < 1) throw InvalidParameter("derivative_polynomials: j_max must be >= 1");
    std::vector<Vector> p{x};
    Vector tmp(d);
    for (int j = 1; j <= j_max; ++j) {
        // P_{j+1} = sum_{m=0}^{j-1} C(j-1, m) B(P_{m+1}, P_{j-m})
        Vector next = Vector::Zero(d);
        double binom = 1.0;
        for (int m = 0; m <= j - 1; ++m) {
            b.bilinear(p[static_cast<std::size_t>(m)].data(), p[static_cast<std::size_t>(j - 1 - m)].data(), tmp.data());
            next += binom * tmp;
            binom = binom * static_cast<double>(j - 1 - m) / static_cast<double>(m + 1);
        }
        p.push_back(std::move(next));
    }
    return p;
}

Escape kernel_escape(const CoefficientTensor& b, const KernelSpec& K, const Vector& x, int j_max) {
    if (K.d != b.dim() || x.size() != b.dim()) throw DimensionError("kernel_escape: dimension mismatch");
    const double xn = x.norm();
    if (K.project_perp(x).norm() > 1e-12 * std::max(xn, 1e-300)) {
        throw InvalidParameter("kernel_escape: x must lie in the kernel span{e_1..e_J}");
    }
    const std::vector<Vector> p = derivative_polynomials(b, x, j_max);
    const double s = b.max_abs();
    for (int j = 1; j <= j_max; ++j) {
        const double norm = K.project_perp(p[static_cast<std::size_t>(j)]).norm();
        const double thr = 1e-12 * std::pow(s, j) * std::pow(xn, j + 1);
        if (norm > thr && norm > 0.0) return {j, norm};
    }
    return {};
}

double distance_to_axes(const Vector& x) {
    const double n2 = x.squaredNorm();
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index m = 0; m < x.size(); ++m) best = std::min(best, n2 - x[m] * x[m]);
    return std::sqrt(std::max(0.0, best));
}

EscapeScan kdelta_scan(const CoefficientTensor& b, const KernelSpec& K, double delta, std::size_t n_samples,
                       int j_max, std::uint64_t seed, int threads) {
    if (!(delta > 0.0 && delta < 0.5)) throw InvalidParameter("kdelta_scan: delta must lie in (0, 1/2)");
    if (K.d != b.dim()) throw DimensionError("kdelta_scan: dimension mismatch");
    if (K.J < 1) throw SamplingError("kdelta_scan: the kernel is trivial");
    const int d = b.dim();
    const int J = K.J;
    constexpr std::size_t max_draws = 1'000'000;

    auto draw_point = [&](std::size_t p) {
        Stream rng(seed_derive(seed, p));
        for (std::size_t draw = 0; draw < max_draws; ++draw) {
            Vector x = Vector::Zero(d);
            double norm = 0.0;
            do {
                for (int m = 0; m < J; ++m) x[m] = rng.normal();
                norm = x.norm();
            } while (norm == 0.0);
            // Radius density proportional to r^(J-1) on [1/2, 3/2].
            const double lo = std::pow(0.5, J), hi = std::pow(1.5, J);
            const double r = std::pow(lo + (hi - lo) * rng.uniform(), 1.0 / J);
            x *= r / norm;
            if (distance_to_axes(x) >= delta) return x;
        }
        throw SamplingError("kdelta_scan: no admissible point after 10^6 draws (is the slice empty?)");
    };

    EscapeScan scan;
    scan.delta = delta;
    scan.samples = parallel_map(n_samples, threads, [&](std::size_t p) {
        EscapeSample s;
        s.x = draw_point(p);
        const Escape e = kernel_escape(b, K, s.x, j_max);
        s.j_min = e.j_min;
        s.margin = e.margin;
        return s;
    });
    scan.c_delta = std::numeric_limits<double>::infinity();
    int jmax_seen = 0;
    for (const auto& s : scan.samples) {
        if (s.j_min) {
            jmax_seen = std::max(jmax_seen, *s.j_min);
            scan.c_delta = std::min(scan.c_delta, s.margin);
        } else {
            ++scan.unescaped;
            scan.c_delta = 0.0;
        }
    }
    if (scan.unescaped == 0 && !scan.samples.empty()) scan.J_delta = jmax_seen;
    if (scan.samples.empty()) scan.c_delta = 0.0;
    return scan;
}

DetD transversality_detD(const CoefficientTensor& b, const Vector& x, int k, int m, int p) {
    const int d = b.dim();
    if (x.size() != d) throw DimensionError("transversality_detD: x has wrong length");
    for (int idx : {k, m, p}) {
        if (idx < 0 || idx >= d) throw IndexError("transversality_detD: index out of range");
    }
    if (k == m || m == p || k == p) throw InvalidParameter("transversality_detD: indices must be distinct");
    Vector xdot(d);
    b.quadratic(x.data(), xdot.data());
    DetD out;
    out.formula = 4.0 * x[k] * x[k] * (xdot[p] * x[m] - xdot[m] * x[p]);
    const double d11 = 2.0 * x[k] * x[m];
    const double d12 = 2.0 * x[k] * x[p];
    const double d21 = 2.0 * xdot[k] * x[m] + 2.0 * xdot[m] * x[k];
    const double d22 = 2.0 * xdot[k] * x[p] + 2.0 * xdot[p] * x[k];
    out.matrix = d11 * d22 - d12 * d21;
    return out;
}

}  // namespace pdsde
