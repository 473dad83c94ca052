#include "pdsde/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <ostream>
#include <set>

#include "pdsde/chain.hpp"
#include "pdsde/errors.hpp"
#include "pdsde/flow.hpp"
#include "pdsde/ladder.hpp"
#include "pdsde/sde.hpp"
#include "pdsde/spectral.hpp"
#include "pdsde/stats.hpp"
#include "pdsde/svg.hpp"

#ifndef PDSDE_VERSION
#define PDSDE_VERSION "unknown"
#endif

namespace pdsde {

namespace fs = std::filesystem;
using nlohmann::json;

#define PDSDE_CONFIG_FIELDS(X)                                                                                    \
    X(kind) X(d) X(J) X(sigma) X(tensor) X(tensor_seed) X(tensor_scale) X(tensor_file) X(damping_rate) X(x0)    \
    X(dt) X(T) X(eps) X(delta) X(horizon) X(C0) X(n_paths) X(n_steps) X(burn_in) X(shells) X(radius) X(samples) \
    X(j_max) X(tol) X(convention) X(scheme) X(record_stride) X(master_seed) X(threads) X(out)

const std::vector<std::string>& experiment_kinds() {
    static const std::vector<std::string> kinds{"verify-class", "spectral-report", "hormander",  "passthrough",
                                                "detd",         "simulate",        "exit-times", "coercivity",
                                                "flux",         "switch-chain",    "energy-balance"};
    return kinds;
}

const char* version_string() { return PDSDE_VERSION; }

json to_json(const ExperimentConfig& cfg) {
    json j;
#define PDSDE_TO_JSON(f) j[#f] = cfg.f;
    PDSDE_CONFIG_FIELDS(PDSDE_TO_JSON)
#undef PDSDE_TO_JSON
    return j;
}

ExperimentConfig config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("", "configuration must be a JSON object");
    ExperimentConfig cfg;
    std::set<std::string> known;
#define PDSDE_FROM_JSON(f)                                                             \
    known.insert(#f);                                                                  \
    if (j.contains(#f)) {                                                              \
        try {                                                                          \
            j.at(#f).get_to(cfg.f);                                                    \
        } catch (const json::exception&) {                                             \
            throw ConfigError(#f, "has the wrong type (" + j.at(#f).dump() + ")");     \
        }                                                                              \
    }
    PDSDE_CONFIG_FIELDS(PDSDE_FROM_JSON)
#undef PDSDE_FROM_JSON
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) throw ConfigError(key, "unknown field");
    }
    return cfg;
}

namespace {

bool needs_noise(const std::string& kind) {
    return kind == "simulate" || kind == "exit-times" || kind == "coercivity" || kind == "flux" ||
           kind == "switch-chain" || kind == "energy-balance";
}

bool uses_x0(const std::string& kind) { return needs_noise(kind) || kind == "detd"; }

void require(bool ok, const char* field, const std::string& msg) {
    if (!ok) throw ConfigError(field, msg);
}

bool all_finite(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double a) { return std::isfinite(a); });
}

int effective_dim(const ExperimentConfig& cfg) {
    if (cfg.tensor != "file") return cfg.d;
    return resolve_tensor(cfg).dim();
}

}  // namespace

CoefficientTensor resolve_tensor(const ExperimentConfig& cfg) {
    if (cfg.tensor == "file") {
        require(!cfg.tensor_file.empty(), "tensor_file", "missing required field for tensor = \"file\"");
        CoefficientTensor b = CoefficientTensor::zero(3);
        try {
            b = load_tensor(cfg.tensor_file);
        } catch (const Error& e) {
            throw ConfigError("tensor_file", e.what());
        }
        require(cfg.d == 0 || cfg.d == b.dim(), "d",
                "does not match the tensor file (d = " + std::to_string(b.dim()) + ")");
        return b;
    }
    require(cfg.d != 0, "d", "missing required field");
    if (cfg.tensor == "sample") {
        require(cfg.d >= 3, "d", "must be >= 3");
        require(std::isfinite(cfg.tensor_scale) && cfg.tensor_scale >= 0.0, "tensor_scale", "must be >= 0");
        Stream rng(cfg.tensor_seed);
        return sample(cfg.d, cfg.tensor_scale, rng);
    }
    if (cfg.tensor == "lorenz96") {
        require(cfg.d >= 4, "d", "must be >= 4 for lorenz96");
        return lorenz96(cfg.d);
    }
    if (cfg.tensor == "witness") {
        require(cfg.d >= 3, "d", "must be >= 3 for witness");
        return witness_tensor(cfg.d);
    }
    throw ConfigError("tensor", "must be one of sample, file, lorenz96, witness");
}

DampingSpec resolve_damping(const ExperimentConfig& cfg, int d) {
    Vector sigma = Vector::Zero(d);
    if (cfg.sigma.empty()) {
        sigma.head(std::min(2, d)).setOnes();
    } else {
        sigma = Eigen::Map<const Vector>(cfg.sigma.data(), static_cast<Eigen::Index>(cfg.sigma.size()));
    }
    return DampingSpec::diagonal(d, cfg.J, cfg.damping_rate, sigma);
}

void validate(const ExperimentConfig& cfg) {
    const auto& kinds = experiment_kinds();
    require(!cfg.kind.empty(), "kind", "missing required field");
    require(std::find(kinds.begin(), kinds.end(), cfg.kind) != kinds.end(), "kind",
            "unknown experiment kind \"" + cfg.kind + "\"");
    require(cfg.tensor == "sample" || cfg.tensor == "file" || cfg.tensor == "lorenz96" || cfg.tensor == "witness",
            "tensor", "must be one of sample, file, lorenz96, witness");
    require(cfg.tensor == "file" || cfg.d != 0, "d", "missing required field");
    require(cfg.d >= 0, "d", "must be positive");
    const int d = effective_dim(cfg);
    require(d >= 3, "d", "must be >= 3");

    require(cfg.J >= 0 && cfg.J <= d, "J", "must lie in [0, d]");
    if (cfg.kind == "passthrough") require(cfg.J >= 2 && cfg.J < d, "J", "passthrough needs 2 <= J < d");
    if (cfg.kind == "flux") require(cfg.J >= 1, "J", "flux needs J >= 1");
    if (cfg.kind == "switch-chain") require(cfg.J >= 1 && cfg.J < d, "J", "switch-chain needs 1 <= J < d");
    require(cfg.sigma.empty() || static_cast<int>(cfg.sigma.size()) == d, "sigma", "must have d entries");
    require(all_finite(cfg.sigma), "sigma", "entries must be finite");
    require(std::isfinite(cfg.damping_rate) && cfg.damping_rate > 0.0, "damping_rate", "must be positive");
    require(cfg.x0.empty() || static_cast<int>(cfg.x0.size()) == d, "x0", "must have d entries");
    require(all_finite(cfg.x0), "x0", "entries must be finite");
    if (uses_x0(cfg.kind) && !cfg.x0.empty()) {
        double n2 = 0.0;
        for (double v : cfg.x0) n2 += v * v;
        require(cfg.kind != "switch-chain" || n2 > 0.0, "x0", "must be nonzero for switch-chain");
    }
    require(std::isfinite(cfg.dt) && cfg.dt >= 0.0, "dt", "must be >= 0 (0 selects the default)");
    require(std::isfinite(cfg.T) && cfg.T > 0.0, "T", "must be positive");
    if (cfg.dt > 0.0) require(cfg.dt <= cfg.T || !(cfg.kind == "simulate" || cfg.kind == "flux" ||
                                                    cfg.kind == "energy-balance"),
                              "dt", "must not exceed T");
    if (cfg.kind == "exit-times" || cfg.kind == "coercivity") {
        require(!cfg.eps.empty(), "eps", "needs at least one value");
        for (double e : cfg.eps) require(e > 0.0 && e < 1.0, "eps", "values must lie in (0, 1)");
    }
    require(cfg.delta > 0.0 && cfg.delta < 0.5, "delta", "must lie in (0, 1/2)");
    require(std::isfinite(cfg.horizon) && cfg.horizon > 0.0, "horizon", "must be positive");
    require(std::isfinite(cfg.C0) && cfg.C0 > 0.0, "C0", "must be positive");
    if (cfg.kind == "energy-balance") require(cfg.n_paths == 0 || cfg.n_paths >= 100, "n_paths", "must be >= 100");
    if (cfg.kind == "switch-chain") require(cfg.n_paths == 0 || cfg.n_paths >= 1000, "n_paths", "must be >= 1000");
    if (cfg.kind == "coercivity") require(cfg.n_paths == 0 || cfg.n_paths >= 2, "n_paths", "must be >= 2");
    require(cfg.n_steps >= 1, "n_steps", "must be >= 1");
    require(cfg.burn_in < cfg.n_steps, "burn_in", "must be smaller than n_steps");
    if (cfg.kind == "switch-chain") {
        for (double s : cfg.shells) require(s >= std::numbers::e, "shells", "values must be >= e");
    }
    require(std::isnan(cfg.radius) == false, "radius", "must be a number");
    require(cfg.samples >= 1, "samples", "must be >= 1");
    require(cfg.j_max >= 1 && cfg.j_max <= 30, "j_max", "must lie in [1, 30]");
    require(std::isfinite(cfg.tol) && cfg.tol >= 0.0, "tol", "must be >= 0");
    require(cfg.convention == "unit" || cfg.convention == "exact", "convention", "must be unit or exact");
    require(cfg.scheme.empty() || cfg.scheme == "tamed_euler" || cfg.scheme == "split_rk4", "scheme",
            "must be tamed_euler or split_rk4");
    require(cfg.record_stride >= 1, "record_stride", "must be >= 1");
    require(cfg.threads >= 0, "threads", "must be >= 0 (0 selects all cores)");
    require(!cfg.out.empty(), "out", "must name a directory");
}

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class Writer {
public:
    Writer(fs::path dir, RunResult& result) : dir_(std::move(dir)), result_(result) {}

    std::ofstream open(const std::string& name) {
        std::ofstream f(dir_ / name, std::ios::binary | std::ios::trunc);
        if (!f) throw ConfigError("out", "cannot write " + (dir_ / name).string());
        result_.files.push_back(name);
        return f;
    }

    void write_json(const std::string& name, const json& j) { open(name) << j.dump(2) << '\n'; }
    void write_text(const std::string& name, const std::string& s) { open(name) << s; }

private:
    fs::path dir_;
    RunResult& result_;
};

Vector default_x0(const ExperimentConfig& cfg, int d) {
    if (!cfg.x0.empty()) return Eigen::Map<const Vector>(cfg.x0.data(), d);
    if (cfg.kind == "detd") {
        Vector x(d);
        for (int m = 0; m < d; ++m) x[m] = 1.0 / (m + 1);
        return x;
    }
    return Vector::Unit(d, 0);
}

Scheme scheme_of(const ExperimentConfig& cfg) {
    if (!cfg.scheme.empty()) return scheme_from_string(cfg.scheme);
    return cfg.kind == "switch-chain" ? Scheme::split_rk4 : Scheme::tamed_euler;
}

std::size_t paths_or(const ExperimentConfig& cfg, std::size_t fallback) {
    return cfg.n_paths == 0 ? fallback : cfg.n_paths;
}

double dt_or(const ExperimentConfig& cfg, double fallback) { return cfg.dt > 0.0 ? cfg.dt : fallback; }

json optional_int(const std::optional<int>& v, int offset = 0) {
    return v ? json(*v + offset) : json(nullptr);
}

void run_verify_class(const ExperimentConfig& cfg, const CoefficientTensor& b, Writer& w, RunResult& r) {
    const int d = b.dim();
    const MembershipReport m = verify_membership(b.to_raw(), 1e-12);
    Stream rng(seed_derive(cfg.master_seed, 1));
    double energy = 0.0, div = 0.0;
    Vector x(d), f(d);
    const double scale = std::max(b.max_abs(), 1e-300);
    for (std::size_t s = 0; s < cfg.samples; ++s) {
        for (int i = 0; i < d; ++i) x[i] = rng.normal();
        b.quadratic(x.data(), f.data());
        const double n = x.norm();
        energy = std::max(energy, std::abs(x.dot(f)) / (scale * n * n * n));
        div = std::max(div, std::abs(divergence(b, x)) / (scale * n));
    }
    r.summary = {{"d", d},
                 {"pass", m.pass},
                 {"scale", m.scale},
                 {"symmetry", m.symmetry},
                 {"zero_pattern", m.zero_pattern},
                 {"jacobi", m.jacobi},
                 {"tol", m.tol},
                 {"worst_jacobi", {m.worst_jacobi[0] + 1, m.worst_jacobi[1] + 1, m.worst_jacobi[2] + 1}},
                 {"energy_residual", energy},
                 {"divergence_residual", div},
                 {"samples", cfg.samples}};
    w.write_json("membership.json", r.summary);
}

void run_spectral(const CoefficientTensor& b, Writer& w, RunResult& r) {
    const HyperbolicityReport h = hyperbolicity_report(b);
    auto csv = w.open("spectrum.csv");
    csv << "axis,re,im,class\n";
    json axes = json::array();
    for (const AxisSpectrum& a : h.axes) {
        for (std::size_t k = 0; k < a.eigenvalues.size(); ++k) {
            csv << a.axis + 1 << ',' << fmt(a.eigenvalues[k].real()) << ',' << fmt(a.eigenvalues[k].imag()) << ','
                << to_string(a.classes[k]) << '\n';
        }
        axes.push_back({{"axis", a.axis + 1},
                        {"n_stable", a.n_stable},
                        {"n_unstable", a.n_unstable},
                        {"n_center", a.n_center},
                        {"margin", a.margin}});
    }
    r.summary = {{"verdict", h.pass ? "pass" : "fail"}, {"min_margin", h.min_margin}, {"axes", axes}};
    w.write_json("spectral_summary.json", r.summary);
}

void run_hormander(const ExperimentConfig& cfg, const CoefficientTensor& b, Writer& w, RunResult& r) {
    const BracketConvention conv = cfg.convention == "exact" ? BracketConvention::exact : BracketConvention::unit;
    const int d = b.dim();
    auto csv = w.open("hormander.csv");
    csv << "i,j,G,G_normalized,pass\n";
    double min_margin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            if (i == j) continue;
            const LadderCertificate c = ladder(b, i, j, conv);
            const bool pass = std::abs(c.G_normalized) > cfg.tol;
            min_margin = std::min(min_margin, std::abs(c.G_normalized));
            csv << i + 1 << ',' << j + 1 << ',' << fmt(c.G) << ',' << fmt(c.G_normalized) << ',' << (pass ? 1 : 0)
                << '\n';
        }
    }
    r.summary = {{"pass", min_margin > cfg.tol},
                 {"min_margin", min_margin},
                 {"tol", cfg.tol},
                 {"convention", cfg.convention},
                 {"degree", ladder_degree(d)}};
    w.write_json("hormander_summary.json", r.summary);
}

void run_passthrough(const ExperimentConfig& cfg, const CoefficientTensor& b, Writer& w, RunResult& r) {
    const int d = b.dim();
    const EscapeScan scan = kdelta_scan(b, KernelSpec(d, cfg.J), cfg.delta, cfg.samples, cfg.j_max,
                                        seed_derive(cfg.master_seed, 2), cfg.threads);
    auto csv = w.open("passthrough.csv");
    for (int m = 0; m < d; ++m) csv << 'x' << m + 1 << ',';
    csv << "j_min,margin\n";
    for (const EscapeSample& s : scan.samples) {
        for (int m = 0; m < d; ++m) csv << fmt(s.x[m]) << ',';
        csv << (s.j_min ? std::to_string(*s.j_min) : std::string("none")) << ',' << fmt(s.margin) << '\n';
    }
    r.summary = {{"J_delta", optional_int(scan.J_delta)},
                 {"c_delta", scan.c_delta},
                 {"unescaped", scan.unescaped},
                 {"n", scan.samples.size()},
                 {"delta", cfg.delta},
                 {"J", cfg.J}};
    w.write_json("passthrough_summary.json", r.summary);
}

void run_detd(const ExperimentConfig& cfg, const CoefficientTensor& b, Writer& w, RunResult& r) {
    const int d = b.dim();
    const Vector x = default_x0(cfg, d);
    auto csv = w.open("detd.csv");
    csv << "k,m,p,det_formula,det_matrix\n";
    double worst = 0.0;
    std::size_t rows = 0;
    for (int k = 0; k < d; ++k) {
        for (int m = 0; m < d; ++m) {
            for (int p = m + 1; p < d; ++p) {
                if (m == k || p == k) continue;
                const DetD v = transversality_detD(b, x, k, m, p);
                csv << k + 1 << ',' << m + 1 << ',' << p + 1 << ',' << fmt(v.formula) << ',' << fmt(v.matrix) << '\n';
                worst = std::max(worst, std::abs(v.formula - v.matrix));
                ++rows;
            }
        }
    }
    r.summary = {{"rows", rows}, {"max_abs_discrepancy", worst}};
    w.write_json("detd_summary.json", r.summary);
}

void run_simulate(const ExperimentConfig& cfg, const CoefficientTensor& b, const DampingSpec& damping, Writer& w,
                  RunResult& r) {
    const int d = b.dim();
    const Vector x0 = default_x0(cfg, d);
    SimConfig sc;
    sc.T = cfg.T;
    sc.dt = dt_or(cfg, default_sde_dt(b, x0));
    sc.scheme = scheme_of(cfg);
    sc.record_stride = cfg.record_stride;
    const SdePath path = em_simulate(b, damping, x0, sc, seed_derive(cfg.master_seed, 3));
    auto csv = w.open("path.csv");
    csv << 't';
    for (int m = 0; m < d; ++m) csv << ",x" << m + 1;
    csv << '\n';
    for (Eigen::Index row = 0; row < path.states.rows(); ++row) {
        csv << fmt(path.times[static_cast<std::size_t>(row)]);
        for (int m = 0; m < d; ++m) csv << ',' << fmt(path.states(row, m));
        csv << '\n';
    }
    const Eigen::Index last = path.states.rows() - 1;
    r.summary = {{"dt", path.dt},
                 {"scheme", to_string(path.scheme)},
                 {"rows", path.states.rows()},
                 {"final_norm", path.states.row(last).norm()}};
    w.write_json("simulate_summary.json", r.summary);
}

void run_exit_times(const ExperimentConfig& cfg, const CoefficientTensor& b, const DampingSpec& damping, Writer& w,
                    RunResult& r) {
    const int d = b.dim();
    const Vector x0 = default_x0(cfg, d);
    const double dt = dt_or(cfg, 1e-3);
    const std::size_t n = paths_or(cfg, 500);
    auto csv = w.open("exit_times.csv");
    csv << "epsilon,path_id,tau,censored,seed\n";
    std::vector<double> logs, means, ses;
    std::vector<std::vector<double>> taus;
    json rows = json::array();
    for (std::size_t e = 0; e < cfg.eps.size(); ++e) {
        const double eps = cfg.eps[e];
        const auto recs = exit_time_ensemble(b, damping, eps, cfg.delta, x0, cfg.horizon, dt, n,
                                             seed_derive(cfg.master_seed, 100 + e), cfg.threads);
        std::vector<double> t(recs.size());
        std::size_t censored = 0;
        for (std::size_t p = 0; p < recs.size(); ++p) {
            t[p] = recs[p].tau;
            censored += recs[p].censored ? 1 : 0;
            csv << fmt(eps) << ',' << p << ',' << fmt(recs[p].tau) << ',' << (recs[p].censored ? 1 : 0) << ','
                << recs[p].seed << '\n';
        }
        const Summary s = summarize(t);
        logs.push_back(std::abs(std::log(eps)));
        means.push_back(s.mean);
        ses.push_back(s.se);
        taus.push_back(std::move(t));
        rows.push_back({{"epsilon", eps},
                        {"mean", s.mean},
                        {"var", s.var},
                        {"se", s.se},
                        {"n", s.n},
                        {"censored_n", censored}});
    }
    json fit = nullptr;
    if (logs.size() >= 2) {
        const LinearFit lf = fit_line(logs, means);
        // Smallest C with C |log eps| above the fitted line on the whole grid.
        const double l_min = *std::min_element(logs.begin(), logs.end());
        const double C = lf.slope + std::max(0.0, lf.intercept) / l_min;
        double c_min = 1.0;
        for (std::size_t e = 0; e < taus.size(); ++e) {
            const double bound = C * logs[e];
            const auto hits = std::count_if(taus[e].begin(), taus[e].end(), [&](double t) { return t <= bound; });
            const double frac = static_cast<double>(hits) / static_cast<double>(taus[e].size());
            rows[e]["p_within_C"] = frac;
            c_min = std::min(c_min, frac);
        }
        fit = {{"slope", lf.slope}, {"intercept", lf.intercept}, {"r_squared", lf.r_squared}, {"C", C},
               {"c", c_min}};
        PlotSpec plot{"Mean exit time vs |log eps|", "|log eps|", "mean tau", {logs, means, ses},
                      PlotLine{lf.slope, lf.intercept}};
        w.write_text("exit_times.svg", render_svg(plot));
    }
    r.summary = {{"delta", cfg.delta}, {"dt", dt}, {"horizon", cfg.horizon}, {"rows", rows}, {"fit", fit}};
    w.write_json("exit_times_summary.json", r.summary);
}

void run_coercivity(const ExperimentConfig& cfg, const CoefficientTensor& b, const DampingSpec& damping, Writer& w,
                    RunResult& r) {
    const Vector x0 = default_x0(cfg, b.dim());
    const double dt = dt_or(cfg, 1e-3);
    const std::size_t n = paths_or(cfg, 200);
    auto csv = w.open("coercivity.csv");
    csv << "epsilon,horizon,mean,se,n\n";
    json rows = json::array();
    double min_lower = std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < cfg.eps.size(); ++e) {
        const Estimate est = coercivity(b, damping, cfg.eps[e], x0, cfg.C0, dt, n,
                                        seed_derive(cfg.master_seed, 200 + e), cfg.threads);
        csv << fmt(cfg.eps[e]) << ',' << fmt(est.horizon) << ',' << fmt(est.mean) << ',' << fmt(est.se) << ','
            << est.n << '\n';
        rows.push_back({{"epsilon", cfg.eps[e]}, {"horizon", est.horizon}, {"mean", est.mean}, {"se", est.se}});
        min_lower = std::min(min_lower, est.mean - 3.0 * est.se);
    }
    r.summary = {{"C0", cfg.C0}, {"dt", dt}, {"rows", rows}, {"min_lower_3se", min_lower}};
    w.write_json("coercivity_summary.json", r.summary);
}

void run_flux(const ExperimentConfig& cfg, const CoefficientTensor& b, const DampingSpec& damping, Writer& w,
              RunResult& r) {
    const Vector x0 = default_x0(cfg, b.dim());
    const double dt = dt_or(cfg, 1e-3);
    const FluxReport f = flux_run(b, damping, x0, cfg.T, dt, seed_derive(cfg.master_seed, 4));
    const double kernel_power = damping.sigma.head(cfg.J).squaredNorm();
    r.summary = {{"T", f.T},
                 {"dt", dt},
                 {"bracket_average", f.bracket_average},
                 {"ito_balanced", f.ito_balanced},
                 {"quadratic_variation_rate", f.quadratic_variation_rate},
                 {"kernel_noise_power", kernel_power},
                 {"expected_magnitude", 0.5 * kernel_power}};
    w.write_json("flux.json", r.summary);
}

void run_energy_balance(const ExperimentConfig& cfg, const CoefficientTensor& b, const DampingSpec& damping,
                        Writer& w, RunResult& r) {
    const Vector x0 = default_x0(cfg, b.dim());
    const double dt = dt_or(cfg, 1e-3);
    const EnergyBalanceReport e = energy_balance(b, damping, x0, cfg.T, dt, paths_or(cfg, 1000),
                                                 seed_derive(cfg.master_seed, 7), cfg.threads, scheme_of(cfg));
    r.summary = {{"T", e.T},         {"dt", e.dt},   {"n", e.n},          {"residual", e.residual},
                 {"se", e.se},       {"bias", e.bias}, {"bias_se", e.bias_se}, {"scheme", to_string(scheme_of(cfg))}};
    w.write_json("energy_balance.json", r.summary);
}

void run_switch_chain(const ExperimentConfig& cfg, const CoefficientTensor& b, const DampingSpec& damping, Writer& w,
                      RunResult& r) {
    const int d = b.dim();
    const Vector x0 = default_x0(cfg, d);
    const SwitchBall ball = SwitchBall::around(b, cfg.J, seed_derive(cfg.master_seed, 5),
                                               cfg.radius < 0.0 ? std::nullopt : std::optional<double>(cfg.radius));
    ChainConfig cc;
    cc.scheme = scheme_of(cfg);
    cc.dt_max = dt_or(cfg, cc.dt_max);

    const auto run = run_chain(ball, damping, x0, cfg.n_steps, cc, seed_derive(cfg.master_seed, 6));
    {
        auto csv = w.open("chain.csv");
        csv << "n,t_n,norm,V\n";
        for (const ChainState& s : run) {
            csv << s.n << ',' << fmt(s.t_n) << ',' << fmt(s.x.norm()) << ',' << fmt(1.0 + s.x.squaredNorm()) << '\n';
        }
    }
    json moments = json::array();
    for (const MomentRow& m : empirical_measure(run, cfg.burn_in, {1.0, 2.0, 4.0})) {
        moments.push_back({{"p", m.p}, {"mean", m.mean}, {"se", m.se}});
    }

    const Vector dir = x0 / x0.norm();
    const std::size_t n = paths_or(cfg, 1000);
    auto csv = w.open("drift.csv");
    csv << "shell,v0,one_step,one_step_se,two_step,two_step_se,n\n";
    json drift = json::array();
    std::vector<double> xs, ys, es;
    for (std::size_t s = 0; s < cfg.shells.size(); ++s) {
        const DriftEstimate e = lyapunov_drift(ball, damping, cfg.shells[s] * dir, n, cc,
                                               seed_derive(cfg.master_seed, 300 + s), cfg.threads);
        csv << fmt(cfg.shells[s]) << ',' << fmt(e.v0) << ',' << fmt(e.one_step) << ',' << fmt(e.one_step_se) << ','
            << fmt(e.two_step) << ',' << fmt(e.two_step_se) << ',' << e.n << '\n';
        drift.push_back({{"shell", cfg.shells[s]},
                         {"v0", e.v0},
                         {"one_step", e.one_step},
                         {"one_step_se", e.one_step_se},
                         {"two_step", e.two_step},
                         {"two_step_se", e.two_step_se}});
        xs.push_back(cfg.shells[s]);
        ys.push_back(e.two_step);
        es.push_back(e.two_step_se);
    }
    if (!xs.empty()) {
        w.write_text("drift.svg", render_svg({"Two-step drift of V = 1 + |x|^2", "|x0|", "E V(Phi_2) - V",
                                              {xs, ys, es}, std::nullopt}));
    }
    r.summary = {{"radius", ball.radius},
                 {"hyperbolicity_margin", ball.margins.hyperbolicity},
                 {"hypoellipticity_margin", ball.margins.hypoellipticity},
                 {"passthrough_J_delta", optional_int(ball.margins.passthrough_J_delta)},
                 {"passthrough_c_delta", ball.margins.passthrough_c_delta},
                 {"scheme", to_string(cc.scheme)},
                 {"one_step_bound", 1.5 * damping.noise_power()},
                 {"drift", drift},
                 {"moments", moments}};
    w.write_json("chain_summary.json", r.summary);
}

}  // namespace

RunResult run(const ExperimentConfig& cfg, const fs::path& out) {
    validate(cfg);
    const CoefficientTensor b = resolve_tensor(cfg);
    const int d = b.dim();
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec || !fs::is_directory(out)) throw ConfigError("out", "cannot create directory " + out.string());

    RunResult result;
    Writer w(out, result);
    const std::string& k = cfg.kind;
    if (k == "verify-class") {
        run_verify_class(cfg, b, w, result);
    } else if (k == "spectral-report") {
        run_spectral(b, w, result);
    } else if (k == "hormander") {
        run_hormander(cfg, b, w, result);
    } else if (k == "passthrough") {
        run_passthrough(cfg, b, w, result);
    } else if (k == "detd") {
        run_detd(cfg, b, w, result);
    } else {
        DampingSpec damping;
        try {
            damping = resolve_damping(cfg, d);
        } catch (const InvalidParameter& e) {
            throw ConfigError("sigma", e.what());
        }
        if (k == "simulate") run_simulate(cfg, b, damping, w, result);
        if (k == "exit-times") run_exit_times(cfg, b, damping, w, result);
        if (k == "coercivity") run_coercivity(cfg, b, damping, w, result);
        if (k == "flux") run_flux(cfg, b, damping, w, result);
        if (k == "switch-chain") run_switch_chain(cfg, b, damping, w, result);
        if (k == "energy-balance") run_energy_balance(cfg, b, damping, w, result);
    }
    return result;
}

int execute(const ExperimentConfig& cfg, std::ostream& log, std::ostream& err) {
    const auto start = std::chrono::steady_clock::now();
    RunResult result;
    try {
        result = run(cfg, cfg.out);
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error in " << cfg.kind << ": " << e.what() << '\n';
        return 3;
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const json manifest = {{"config", to_json(cfg)},
                           {"version", version_string()},
                           {"wall_time_s", wall},
                           {"master_seed", cfg.master_seed},
                           {"files", result.files}};
    std::ofstream f(fs::path(cfg.out) / "manifest.json", std::ios::binary | std::ios::trunc);
    if (!f) {
        err << "configuration error: out: cannot write manifest.json\n";
        return 2;
    }
    f << manifest.dump(2) << '\n';
    log << result.summary.dump(2) << '\n';
    return 0;
}

}  // namespace pdsde
