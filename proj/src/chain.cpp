#include "pdsde/chain.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "pdsde/errors.hpp"
#include "pdsde/flow.hpp"
#include "pdsde/ladder.hpp"
#include "pdsde/parallel.hpp"
#include "pdsde/spectral.hpp"

namespace pdsde {

CertificateMargins certify(const CoefficientTensor& center, int J, std::uint64_t seed, std::size_t scan_samples,
                           double delta) {
    CertificateMargins m;
    const HyperbolicityReport h = hyperbolicity_report(center);
    m.hyperbolicity = h.min_margin;
    m.hyperbolic = h.pass;
    m.hypoellipticity = generic_hypoellipticity(center, 0.0).min_margin;
    if (J >= 2 && J < center.dim() && scan_samples > 0) {
        const EscapeScan scan = kdelta_scan(center, KernelSpec(center.dim(), J), delta, scan_samples, 8, seed);
        m.passthrough_J_delta = scan.J_delta;
        m.passthrough_c_delta = scan.c_delta;
    }
    return m;
}

SwitchBall SwitchBall::around(const CoefficientTensor& center, int J, std::uint64_t seed,
                              std::optional<double> radius) {
    SwitchBall ball{center, 0.0, certify(center, J, seed)};
    ball.radius = radius ? *radius : 0.1 * ball.margins.hyperbolicity / 2.0;
    if (!(ball.radius >= 0.0) || !std::isfinite(ball.radius)) throw InvalidParameter("ball radius must be >= 0");
    return ball;
}

Switch sample_switch(const SwitchBall& ball, Stream& rng) {
    const int d = ball.center.dim();
    const std::size_t n = class_dimension(d);
    std::vector<double> dir(n);
    double norm2 = 0.0;
    do {
        norm2 = 0.0;
        for (double& c : dir) {
            c = rng.normal();
            norm2 += c * c;
        }
    } while (norm2 == 0.0);
    const double r = ball.radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(n));
    const double duration = rng.uniform(0.5, 1.5);
    if (ball.radius == 0.0) return {ball.center, duration};
    const double scale = r / std::sqrt(norm2);
    std::vector<double> free = ball.center.free_coordinates();
    for (std::size_t m = 0; m < n; ++m) free[m] += scale * dir[m];
    return {CoefficientTensor::from_free(d, free), duration};
}

ChainState chain_step(const ChainState& state, const SwitchBall& ball, const DampingSpec& damping,
                      const ChainConfig& cfg, std::uint64_t path_seed) {
    const int d = ball.center.dim();
    if (state.x.size() != d || damping.d != d) throw DimensionError("chain_step: dimension mismatch");
    const std::uint64_t step_seed = seed_derive(path_seed, state.n + 1);
    Stream switch_rng(seed_derive(step_seed, 0));
    const Switch sw = sample_switch(ball, switch_rng);
    const double dt = std::min(cfg.dt_max, cfg.dt_scale / (1.0 + state.x.norm() * sw.b.max_abs()));
    const auto steps = std::max<long long>(1, std::llround(sw.duration / dt));

    PathIntegrator integ(sw.b, damping.A, damping.sigma, dt, cfg.scheme, seed_derive(step_seed, 1));
    ChainState next;
    next.x = state.x;
    for (long long k = 1; k <= steps; ++k) {
        integ.step(next.x.data());
        if (!next.x.allFinite()) throw BlowupDetected("chain_step: non-finite state", static_cast<std::size_t>(k));
    }
    next.n = state.n + 1;
    next.t_n = sw.duration;
    next.t_realized = static_cast<double>(steps) * dt;
    next.last_max_b = sw.b.max_abs();
    return next;
}

std::vector<ChainState> run_chain(const SwitchBall& ball, const DampingSpec& damping, const Vector& x0,
                                  std::size_t n_steps, const ChainConfig& cfg, std::uint64_t path_seed) {
    damping.validate();
    std::vector<ChainState> run;
    run.reserve(n_steps + 1);
    run.push_back({x0, 0, 0.0, 0.0, 0.0});
    for (std::size_t n = 0; n < n_steps; ++n) run.push_back(chain_step(run.back(), ball, damping, cfg, path_seed));
    return run;
}

DriftEstimate lyapunov_drift(const SwitchBall& ball, const DampingSpec& damping, const Vector& x0,
                             std::size_t n_paths, const ChainConfig& cfg, std::uint64_t master_seed, int threads) {
    damping.validate();
    if (x0.norm() < std::numbers::e) throw InvalidParameter("lyapunov_drift needs |x0| >= e");
    if (n_paths < 1000) throw InvalidParameter("lyapunov_drift needs n_paths >= 1000");
    const double v0 = 1.0 + x0.squaredNorm();
    const auto per_path = parallel_map(n_paths, threads, [&](std::size_t p) {
        const std::uint64_t seed = seed_derive(master_seed, p);
        const ChainState s0{x0, 0, 0.0, 0.0, 0.0};
        const ChainState s1 = chain_step(s0, ball, damping, cfg, seed);
        const ChainState s2 = chain_step(s1, ball, damping, cfg, seed);
        return std::array<double, 2>{1.0 + s1.x.squaredNorm() - v0, 1.0 + s2.x.squaredNorm() - v0};
    });
    std::vector<double> one(n_paths), two(n_paths);
    for (std::size_t p = 0; p < n_paths; ++p) {
        one[p] = per_path[p][0];
        two[p] = per_path[p][1];
    }
    const Summary s1 = summarize(one);
    const Summary s2 = summarize(two);
    return {v0, s1.mean, s1.se, s2.mean, s2.se, n_paths};
}

std::vector<MomentRow> empirical_measure(const std::vector<ChainState>& run, std::size_t burn_in,
                                         const std::vector<double>& p_list) {
    if (run.size() <= burn_in) throw InvalidParameter("empirical_measure: run is not longer than burn_in");
    std::vector<MomentRow> rows;
    std::vector<double> series(run.size() - burn_in);
    for (double p : p_list) {
        for (std::size_t n = burn_in; n < run.size(); ++n) series[n - burn_in] = std::pow(run[n].x.norm(), p);
        const Summary s = batch_means(series);
        rows.push_back({p, s.mean, s.se});
    }
    return rows;
}

}  // namespace pdsde
