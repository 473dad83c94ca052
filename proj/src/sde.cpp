#include "pdsde/sde.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "pdsde/flow.hpp"
#include "pdsde/parallel.hpp"

namespace pdsde {

const char* to_string(Scheme s) {
    return s == Scheme::tamed_euler ? "tamed_euler" : "split_rk4";
}

Scheme scheme_from_string(const std::string& s) {
    if (s == "tamed_euler") return Scheme::tamed_euler;
    if (s == "split_rk4") return Scheme::split_rk4;
    throw InvalidParameter("unknown scheme '" + s + "' (expected tamed_euler or split_rk4)");
}

double default_sde_dt(const CoefficientTensor& b, const Vector& x0) {
    return std::min(1e-3, 0.05 / (1.0 + x0.norm() * b.max_abs()));
}

PathIntegrator::PathIntegrator(const CoefficientTensor& b, const Matrix& damping, const Vector& noise, double dt,
                               Scheme scheme, std::uint64_t seed)
    : b_(&b),
      damping_(damping),
      damped_(damping.size() > 0 && damping.cwiseAbs().maxCoeff() != 0.0),
      noise_(noise),
      d_(b.dim()),
      dt_(dt),
      sqrt_dt_(std::sqrt(dt)),
      scheme_(scheme) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidParameter("dt must be positive");
    if (damping.rows() != d_ || damping.cols() != d_ || noise.size() != d_) {
        throw DimensionError("PathIntegrator: damping/noise dimension mismatch");
    }
    streams_.reserve(static_cast<std::size_t>(d_));
    for (int m = 0; m < d_; ++m) streams_.emplace_back(seed_derive(seed, static_cast<std::uint64_t>(m)));
    drift_inc_.assign(static_cast<std::size_t>(d_), 0.0);
    noise_inc_.assign(static_cast<std::size_t>(d_), 0.0);
    work_.assign(6 * static_cast<std::size_t>(d_), 0.0);
}

void PathIntegrator::step(double* x) {
    double* f = drift_inc_.data();
    if (scheme_ == Scheme::tamed_euler) {
        b_->quadratic(x, f);
        if (damped_) {
            for (int i = 0; i < d_; ++i) {
                double s = 0.0;
                for (int j = 0; j < d_; ++j) s += damping_(i, j) * x[j];
                f[i] -= s;
            }
        }
        double nf = 0.0;
        for (int i = 0; i < d_; ++i) nf += f[i] * f[i];
        const double scale = dt_ / (1.0 + dt_ * std::sqrt(nf));
        for (int i = 0; i < d_; ++i) f[i] *= scale;
    } else {
        double* y = work_.data() + 5 * d_;
        std::copy(x, x + d_, y);
        rk4_step(*b_, damped_ ? &damping_ : nullptr, y, dt_, work_.data());
        for (int i = 0; i < d_; ++i) f[i] = y[i] - x[i];
    }
    for (int m = 0; m < d_; ++m) {
        noise_inc_[m] = noise_[m] != 0.0 ? sqrt_dt_ * noise_[m] * streams_[m].normal() : 0.0;
    }
    for (int i = 0; i < d_; ++i) x[i] += f[i] + noise_inc_[i];
}

namespace {

void check_inputs(const CoefficientTensor& b, const DampingSpec& damping, const Vector& x0) {
    damping.validate();
    if (damping.d != b.dim() || x0.size() != b.dim()) throw DimensionError("SDE inputs have inconsistent dimensions");
}

SdePath run_path(const CoefficientTensor& b, const Matrix& damping, const Vector& noise, const Vector& x0,
                 const SimConfig& cfg, std::uint64_t seed) {
    if (!(cfg.dt > 0.0)) throw InvalidParameter("dt must be positive");
    if (!(cfg.T >= cfg.dt)) throw InvalidParameter("T must be >= dt");
    const int d = b.dim();
    const std::size_t stride = std::max<std::size_t>(1, cfg.record_stride);
    const auto steps = static_cast<std::size_t>(std::llround(cfg.T / cfg.dt));
    PathIntegrator integ(b, damping, noise, cfg.dt, cfg.scheme, seed);
    SdePath path;
    path.seed = seed;
    path.dt = cfg.dt;
    path.stride = stride;
    path.scheme = cfg.scheme;
    const std::size_t rows = steps / stride + 1;
    path.times.reserve(rows);
    path.states.resize(static_cast<Eigen::Index>(rows), d);
    Vector x = x0;
    path.times.push_back(0.0);
    path.states.row(0) = x.transpose();
    Eigen::Index row = 1;
    for (std::size_t n = 1; n <= steps; ++n) {
        integ.step(x.data());
        if (!x.allFinite()) throw BlowupDetected("SDE path produced a non-finite state", n);
        if (n % stride == 0) {
            path.times.push_back(static_cast<double>(n) * cfg.dt);
            path.states.row(row++) = x.transpose();
        }
    }
    path.states.conservativeResize(row, d);
    return path;
}

double quad_form(const Matrix& a, const double* x, int d) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) {
        double r = 0.0;
        for (int j = 0; j < d; ++j) r += a(i, j) * x[j];
        s += r * x[i];
    }
    return s;
}

}  // namespace

SdePath em_simulate(const CoefficientTensor& b, const DampingSpec& damping, const Vector& x0, const SimConfig& cfg,
                    std::uint64_t seed) {
    check_inputs(b, damping, x0);
    return run_path(b, damping.A, damping.sigma, x0, cfg, seed);
}

SdePath simulate_rescaled(const CoefficientTensor& b, const DampingSpec& damping, double eps, const Vector& x0,
                          const SimConfig& cfg, std::uint64_t seed) {
    check_inputs(b, damping, x0);
    if (!(eps >= 0.0 && eps < 1.0)) throw InvalidParameter("eps must lie in [0, 1)");
    return run_path(b, eps * damping.A, std::pow(eps, 1.5) * damping.sigma, x0, cfg, seed);
}

bool in_exit_set(const double* x, int d, double delta) {
    double n2 = 0.0, maxsq = 0.0;
    for (int i = 0; i < d; ++i) {
        const double s = x[i] * x[i];
        n2 += s;
        maxsq = std::max(maxsq, s);
    }
    if (n2 < 0.25 || n2 > 2.25) return false;
    return n2 - maxsq >= delta * delta;
}

StoppingRecord exit_time(const CoefficientTensor& b, const DampingSpec& damping, double eps, double delta,
                         const Vector& x0, double horizon, double dt, std::uint64_t seed) {
    check_inputs(b, damping, x0);
    if (!(eps > 0.0 && eps < 1.0)) throw InvalidParameter("eps must lie in (0, 1)");
    if (!(delta > 0.0 && delta < 0.5)) throw InvalidParameter("delta must lie in (0, 1/2)");
    if (!(horizon > 0.0)) throw InvalidParameter("horizon must be positive");
    const int d = b.dim();
    PathIntegrator integ(b, eps * damping.A, std::pow(eps, 1.5) * damping.sigma, dt, Scheme::tamed_euler, seed);
    Vector x = x0;
    const StoppingOutcome out = first_passage([&](double* s) { integ.step(s); },
                                              [&](const double* s) { return in_exit_set(s, d, delta); }, x.data(), d,
                                              dt, horizon);
    return {eps, delta, out.tau, out.censored, horizon, dt, seed};
}

std::vector<StoppingRecord> exit_time_ensemble(const CoefficientTensor& b, const DampingSpec& damping, double eps,
                                               double delta, const Vector& x0, double horizon, double dt,
                                               std::size_t n_paths, std::uint64_t master_seed, int threads) {
    return parallel_map(n_paths, threads, [&](std::size_t p) {
        return exit_time(b, damping, eps, delta, x0, horizon, dt, seed_derive(master_seed, p));
    });
}

EnergyBalanceReport energy_balance(const CoefficientTensor& b, const DampingSpec& damping, const Vector& x0, double T,
                                   double dt, std::size_t n_paths, std::uint64_t master_seed, int threads,
                                   Scheme scheme) {
    check_inputs(b, damping, x0);
    if (n_paths < 100) throw InvalidParameter("energy_balance needs n_paths >= 100");
    if (!(dt > 0.0) || !(T >= dt)) throw InvalidParameter("energy_balance needs 0 < dt <= T");
    const int d = b.dim();
    const auto steps = static_cast<std::size_t>(std::llround(T / dt));
    const double t_end = static_cast<double>(steps) * dt;
    const double noise_power = damping.noise_power();
    const double x0sq = x0.squaredNorm();

    const auto per_path = parallel_map(n_paths, threads, [&](std::size_t p) {
        PathIntegrator integ(b, damping.A, damping.sigma, dt, scheme, seed_derive(master_seed, p));
        Vector x = x0;
        CompensatedSum dissipation, bias;
        for (std::size_t n = 1; n <= steps; ++n) {
            const double ax = quad_form(damping.A, x.data(), d);
            integ.step(x.data());
            if (!x.allFinite()) throw BlowupDetected("energy_balance: non-finite state", n);
            // |x_{n+1}|^2 - |x_n|^2 = 2 x.Dd + |Dd|^2 + [2 (x + Dd).Dn + |Dn|^2]; the bracket is a
            // martingale increment plus dt sum sigma^2 in expectation.
            const double* dd = integ.drift_increment();
            const double* dn = integ.noise_increment();
            double x_dd = 0.0, dd2 = 0.0;
            for (int i = 0; i < d; ++i) {
                const double xi = x[i] - dd[i] - dn[i];
                x_dd += xi * dd[i];
                dd2 += dd[i] * dd[i];
            }
            dissipation.add(2.0 * dt * ax);
            bias.add(2.0 * x_dd + dd2 + 2.0 * dt * ax);
        }
        const double residual = x.squaredNorm() + dissipation.value() - x0sq - t_end * noise_power;
        return std::array<double, 2>{residual, bias.value()};
    });

    std::vector<double> res(n_paths), bias(n_paths);
    for (std::size_t p = 0; p < n_paths; ++p) {
        res[p] = per_path[p][0];
        bias[p] = per_path[p][1];
    }
    const Summary sr = summarize(res);
    const Summary sb = summarize(bias);
    return {t_end, dt, n_paths, sr.mean, sr.se, sb.mean, sb.se};
}

Estimate coercivity(const CoefficientTensor& b, const DampingSpec& damping, double eps, const Vector& x0, double C0,
                    double dt, std::size_t n_paths, std::uint64_t master_seed, int threads) {
    check_inputs(b, damping, x0);
    if (!(eps > 0.0 && eps < 1.0)) throw InvalidParameter("eps must lie in (0, 1)");
    if (!(C0 > 0.0)) throw InvalidParameter("C0 must be positive");
    if (!(dt > 0.0)) throw InvalidParameter("dt must be positive");
    if (n_paths < 2) throw InvalidParameter("coercivity needs n_paths >= 2");
    const int d = b.dim();
    const double horizon = C0 * std::abs(std::log(eps));
    const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
    const Matrix a_eps = eps * damping.A;
    const Vector noise = std::pow(eps, 1.5) * damping.sigma;
    const auto values = parallel_map(n_paths, threads, [&](std::size_t p) {
        PathIntegrator integ(b, a_eps, noise, dt, Scheme::tamed_euler, seed_derive(master_seed, p));
        Vector x = x0;
        CompensatedSum acc;
        for (std::size_t n = 1; n <= steps; ++n) {
            acc.add(dt * quad_form(damping.A, x.data(), d));
            integ.step(x.data());
            if (!x.allFinite()) throw BlowupDetected("coercivity: non-finite state", n);
        }
        return acc.value();
    });
    const Summary s = summarize(values);
    return {s.mean, s.se, s.n, horizon};
}

double flux_average(const SdePath& path, const CoefficientTensor& b, const KernelSpec& K) {
    const int d = b.dim();
    const auto rows = path.states.rows();
    if (rows < 2) return 0.0;
    if (path.states.cols() != d || K.d != d) throw DimensionError("flux_average: dimension mismatch");
    Vector x(d), f(d);
    auto g = [&](Eigen::Index r) {
        x = path.states.row(r).transpose();
        b.quadratic(x.data(), f.data());
        double s = 0.0;
        for (int m = 0; m < K.J; ++m) s += x[m] * f[m];
        return s;
    };
    CompensatedSum acc;
    double prev = g(0);
    for (Eigen::Index r = 1; r < rows; ++r) {
        const double cur = g(r);
        acc.add(0.5 * (prev + cur) * (path.times[r] - path.times[r - 1]));
        prev = cur;
    }
    return acc.value() / (path.times.back() - path.times.front());
}

FluxReport flux_run(const CoefficientTensor& b, const DampingSpec& damping, const Vector& x0, double T, double dt,
                    std::uint64_t seed) {
    check_inputs(b, damping, x0);
    if (!(dt > 0.0) || !(T >= dt)) throw InvalidParameter("flux_run needs 0 < dt <= T");
    const int d = b.dim();
    const int J = damping.J;
    const auto steps = static_cast<std::size_t>(std::llround(T / dt));
    PathIntegrator integ(b, damping.A, damping.sigma, dt, Scheme::tamed_euler, seed);
    Vector x = x0, prev = x0, f(d);
    auto g = [&](const Vector& s) {
        b.quadratic(s.data(), f.data());
        double acc = 0.0;
        for (int m = 0; m < J; ++m) acc += s[m] * f[m];
        return acc;
    };
    CompensatedSum bracket_sum, qv;
    double g_prev = g(x);
    for (std::size_t n = 1; n <= steps; ++n) {
        prev = x;
        integ.step(x.data());
        if (!x.allFinite()) throw BlowupDetected("flux_run: non-finite state", n);
        const double g_cur = g(x);
        bracket_sum.add(0.5 * (g_prev + g_cur) * dt);
        g_prev = g_cur;
        double inc = 0.0;
        for (int m = 0; m < J; ++m) inc += (x[m] - prev[m]) * (x[m] - prev[m]);
        qv.add(inc);
    }
    const double t_end = static_cast<double>(steps) * dt;
    const double k0 = x0.head(J).squaredNorm();
    const double kt = x.head(J).squaredNorm();
    FluxReport r;
    r.T = t_end;
    r.bracket_average = bracket_sum.value() / t_end;
    r.ito_balanced = (kt - k0 - qv.value()) / (2.0 * t_end);
    r.quadratic_variation_rate = qv.value() / t_end;
    return r;
}

}  // namespace pdsde
