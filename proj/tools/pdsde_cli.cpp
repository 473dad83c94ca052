// Command-line front end for the experiment runner.
//
//   pdsde <kind> [options]            run one experiment
//   pdsde --config exp.toml [options] kind and parameters from a flat TOML file
//   pdsde rerun out/manifest.json     repeat a recorded run
//
// Options given on the command line override values from the config file.
// PDSDE_OUT sets the default output directory.

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "pdsde/errors.hpp"
#include "pdsde/experiment.hpp"

namespace {

void add_options(CLI::App& app, pdsde::ExperimentConfig& c) {
    app.add_option("--kind", c.kind, "Experiment kind (or give it as a subcommand)");
    app.add_option("--d", c.d, "State dimension");
    app.add_option("--J", c.J, "Number of undamped modes x1..xJ");
    app.add_option("--sigma", c.sigma, "Noise amplitudes, one per coordinate")->delimiter(',');
    app.add_option("--tensor", c.tensor, "Tensor source: sample | file | lorenz96 | witness");
    app.add_option("--tensor-seed,--tensor_seed", c.tensor_seed, "Seed of the sampled tensor");
    app.add_option("--tensor-scale,--tensor_scale", c.tensor_scale, "Scale of the sampled tensor");
    app.add_option("--tensor-file,--tensor_file", c.tensor_file, "Tensor JSON file");
    app.add_option("--damping-rate,--damping_rate", c.damping_rate, "Damping rate on x(J+1)..xd");
    app.add_option("--x0", c.x0, "Initial state")->delimiter(',');
    app.add_option("--dt", c.dt, "Time step (0 selects the default)");
    app.add_option("--T", c.T, "Time horizon");
    app.add_option("--eps", c.eps, "Noise levels")->delimiter(',');
    app.add_option("--delta", c.delta, "Distance from the coordinate axes");
    app.add_option("--horizon", c.horizon, "Censoring horizon of exit times");
    app.add_option("--C0", c.C0, "Coercivity window constant");
    app.add_option("--n-paths,--n_paths", c.n_paths, "Monte Carlo paths (0 selects the default)");
    app.add_option("--n-steps,--n_steps", c.n_steps, "Switching chain length");
    app.add_option("--burn-in,--burn_in", c.burn_in, "Chain steps discarded before averaging");
    app.add_option("--shells", c.shells, "Norms |x0| for the drift test")->delimiter(',');
    app.add_option("--radius", c.radius, "Switching ball radius (negative selects the heuristic)");
    app.add_option("--samples", c.samples, "Sample count for scans");
    app.add_option("--j-max,--j_max", c.j_max, "Largest derivative order in escape scans");
    app.add_option("--tol", c.tol, "Hormander margin tolerance");
    app.add_option("--convention", c.convention, "Ladder convention: unit | exact");
    app.add_option("--scheme", c.scheme, "SDE scheme: tamed_euler | split_rk4");
    app.add_option("--record-stride,--record_stride", c.record_stride, "Recording stride for simulate");
    app.add_option("--seed,--master_seed", c.master_seed, "Master seed");
    app.add_option("--threads", c.threads, "Worker threads (0 uses all cores)");
    app.add_option("--out", c.out, "Output directory");
}

}  // namespace

int main(int argc, char** argv) {
    pdsde::ExperimentConfig cfg;
    if (const char* env = std::getenv("PDSDE_OUT"); env != nullptr && *env != '\0') cfg.out = env;

    CLI::App app{"Experiments on randomly switched conservative quadratic SDEs"};
    app.set_config("--config", "", "Flat TOML file with experiment parameters");
    app.set_version_flag("--version", pdsde::version_string());
    add_options(app, cfg);

    std::string selected;
    for (const std::string& kind : pdsde::experiment_kinds()) {
        CLI::App* sub = app.add_subcommand(kind, "Run the " + kind + " experiment");
        sub->fallthrough();
        sub->callback([&selected, kind] { selected = kind; });
    }
    std::string manifest_path;
    CLI::App* rerun = app.add_subcommand("rerun", "Repeat the run recorded in a manifest");
    rerun->add_option("manifest", manifest_path, "Path to manifest.json")->required();
    rerun->fallthrough();
    app.require_subcommand(0, 1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    }

    if (*rerun) {
        try {
            std::ifstream in(manifest_path);
            if (!in) throw pdsde::ConfigError("manifest", "cannot read " + manifest_path);
            const nlohmann::json manifest = nlohmann::json::parse(in);
            pdsde::ExperimentConfig recorded = pdsde::config_from_json(manifest.at("config"));
            // Only the destination and the thread count may differ from the recording.
            if (app.count("--out") > 0) recorded.out = cfg.out;
            if (app.count("--threads") > 0) recorded.threads = cfg.threads;
            cfg = recorded;
        } catch (const pdsde::ConfigError& e) {
            std::cerr << "configuration error: " << e.what() << '\n';
            return 2;
        } catch (const std::exception& e) {
            std::cerr << "configuration error: manifest: " << e.what() << '\n';
            return 2;
        }
    } else if (!selected.empty()) {
        if (!cfg.kind.empty() && cfg.kind != selected) {
            std::cerr << "configuration error: kind: subcommand " << selected << " conflicts with kind = " << cfg.kind
                      << '\n';
            return 2;
        }
        cfg.kind = selected;
    }
    return pdsde::execute(cfg, std::cout, std::cerr);
}
