#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pdsde/bilinear.hpp"
#include "pdsde/damping.hpp"
#include "pdsde/sde.hpp"
#include "pdsde/stats.hpp"

namespace pdsde {

struct CertificateMargins {
    double hyperbolicity = 0.0;    // min over axes of the spectral margin
    bool hyperbolic = false;
    double hypoellipticity = 0.0;  // min |G_normalized| over ordered pairs
    std::optional<int> passthrough_J_delta;
    double passthrough_c_delta = 0.0;
};

// Certificates of the three generic conditions for a center tensor (kernel dimension J).
CertificateMargins certify(const CoefficientTensor& center, int J, std::uint64_t seed, std::size_t scan_samples = 500,
                           double delta = 0.2);

/// Uniform ball in free coordinates around a certified center.
struct SwitchBall {
    CoefficientTensor center;
    double radius = 0.0;
    CertificateMargins margins;

    // Radius defaults to 0.1 * (hyperbolicity margin / 2): the linearization is 2 alpha b,
    // so a free-coordinate perturbation of size r moves its entries by at most about 2 r.
    static SwitchBall around(const CoefficientTensor& center, int J, std::uint64_t seed,
                             std::optional<double> radius = std::nullopt);
};

struct Switch {
    CoefficientTensor b;
    double duration = 1.0;  // uniform on [1/2, 3/2]
};

Switch sample_switch(const SwitchBall& ball, Stream& rng);

struct ChainConfig {
    Scheme scheme = Scheme::split_rk4;
    double dt_max = 1e-3;
    // Step size per chain step: min(dt_max, dt_scale / (1 + |x_n| max|b_n|)).
    double dt_scale = 0.05;
};

struct ChainState {
    Vector x;
    std::size_t n = 0;
    double t_n = 0.0;           // drawn duration of the last step, in [1/2, 3/2]
    double t_realized = 0.0;    // duration actually integrated (t_n rounded to the step grid)
    double last_max_b = 0.0;    // max |b_n| of the last switch
};

// Step n of the chain run `path_seed`: the switch draw and the noise come from
// streams derived from (path_seed, n), so steps never share randomness.
ChainState chain_step(const ChainState& state, const SwitchBall& ball, const DampingSpec& damping,
                      const ChainConfig& cfg, std::uint64_t path_seed);

std::vector<ChainState> run_chain(const SwitchBall& ball, const DampingSpec& damping, const Vector& x0,
                                  std::size_t n_steps, const ChainConfig& cfg, std::uint64_t path_seed);

struct DriftEstimate {
    double v0 = 0.0;             // V(x0) = 1 + |x0|^2
    double one_step = 0.0;       // E V(Phi_1) - V(x0)
    double one_step_se = 0.0;
    double two_step = 0.0;       // E V(Phi_2) - V(x0)
    double two_step_se = 0.0;
    std::size_t n = 0;
};

// Requires |x0| >= e and n_paths >= 1000. Path p uses seed_derive(master_seed, p).
DriftEstimate lyapunov_drift(const SwitchBall& ball, const DampingSpec& damping, const Vector& x0,
                             std::size_t n_paths, const ChainConfig& cfg, std::uint64_t master_seed, int threads = 1);

struct MomentRow {
    double p = 0.0;
    double mean = 0.0;
    double se = 0.0;  // batch means
};

// Time averages of |x|^p over the chain states after `burn_in` steps.
std::vector<MomentRow> empirical_measure(const std::vector<ChainState>& run, std::size_t burn_in,
                                         const std::vector<double>& p_list);

}  // namespace pdsde
