#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "pdsde/bilinear.hpp"
#include "pdsde/damping.hpp"

namespace pdsde {

const std::vector<std::string>& experiment_kinds();

/// Everything one run needs. Vectors are given in coordinate order (x1..xd);
/// index-valued outputs are 1-based. Zero-valued `dt` and `n_paths` select
/// the defaults of the target operation.
struct ExperimentConfig {
    std::string kind;
    int d = 0;
    int J = 2;
    std::vector<double> sigma;  // empty: 1 on x1 and x2, 0 elsewhere

    std::string tensor = "sample";  // sample | file | lorenz96 | witness
    std::uint64_t tensor_seed = 1;
    double tensor_scale = 1.0;
    std::string tensor_file;

    double damping_rate = 1.0;
    std::vector<double> x0;  // empty: e1 (detd: (1, 1/2, ..., 1/d))
    double dt = 0.0;
    double T = 1.0;
    std::vector<double> eps{1e-2, 1e-3, 1e-4, 1e-5};
    double delta = 0.2;
    double horizon = 200.0;
    double C0 = 10.0;
    std::size_t n_paths = 0;
    std::size_t n_steps = 1000;
    std::size_t burn_in = 100;
    std::vector<double> shells{50.0, 100.0, 200.0};
    double radius = -1.0;  // negative: heuristic radius
    std::size_t samples = 1000;
    int j_max = 8;
    double tol = 1e-10;
    std::string convention = "unit";
    std::string scheme;  // empty: tamed_euler, or split_rk4 for switch-chain
    std::size_t record_stride = 1;

    std::uint64_t master_seed = 0;
    int threads = 0;
    std::string out = ".";
};

nlohmann::json to_json(const ExperimentConfig& cfg);
// Missing keys keep their defaults; unknown keys are a ConfigError.
ExperimentConfig config_from_json(const nlohmann::json& j);

// Throws ConfigError naming the first offending field.
void validate(const ExperimentConfig& cfg);

// The tensor named by the config's source fields. Throws ConfigError.
CoefficientTensor resolve_tensor(const ExperimentConfig& cfg);
DampingSpec resolve_damping(const ExperimentConfig& cfg, int d);

struct RunResult {
    std::vector<std::string> files;  // relative to the output directory
    nlohmann::json summary;
};

// Validates, computes and writes the artifacts of `cfg.kind` into `out`.
RunResult run(const ExperimentConfig& cfg, const std::filesystem::path& out);

/// run() plus manifest.json. Returns 0 on success, 2 for configuration
/// errors and 3 for numerical failures; messages go to `err`.
int execute(const ExperimentConfig& cfg, std::ostream& log, std::ostream& err);

// Build identifier recorded in manifests.
const char* version_string();

}  // namespace pdsde
