#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "spnp/harness.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Two-scale PNP experiments in random perforated media"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    int threads = 1;
    bool deterministic = true;
    app.add_option("--config", config_path, "JSON config file (defaults apply when omitted)");
    app.add_option("--out", out_dir, "Output directory (overrides output_dir)");
    auto* seed_opt = app.add_option("--seed", seed, "Random seed (overrides seed)");
    app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    app.add_flag("--deterministic,!--no-deterministic", deterministic,
                 "Keep wall times out of the main CSVs (default on)");

    app.add_subcommand("mesh", "Template and tiled meshes with quality summary");
    app.add_subcommand("twoscale", "Volume and surface oscillation convergence tables");
    app.add_subcommand("micro", "One fine-scale run: ledger and snapshots");
    app.add_subcommand("effective", "Effective coefficients as JSON");
    app.add_subcommand("macro", "Homogenized run: ledger and snapshots");
    app.add_subcommand("sweep", "Micro-vs-macro error sweep over eps and omega samples");
    app.add_subcommand("print-config", "Print the resolved config as JSON");

    CLI11_PARSE(app, argc, argv);

    try {
        spnp::ExperimentConfig cfg = config_path.empty() ? spnp::default_config() : spnp::load_config(config_path);
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        if (seed_opt->count() > 0) cfg.seed = seed;
        cfg.validate();

        const std::string cmd = app.get_subcommands().front()->get_name();
        std::vector<std::string> files;
        if (cmd == "mesh") {
            files = spnp::write_mesh_outputs(cfg);
        } else if (cmd == "twoscale") {
            files = spnp::write_twoscale_outputs(cfg);
        } else if (cmd == "micro") {
            files = spnp::write_micro_outputs(cfg);
        } else if (cmd == "effective") {
            files = spnp::write_effective_outputs(cfg, threads);
        } else if (cmd == "macro") {
            files = spnp::write_macro_outputs(cfg, threads);
        } else if (cmd == "sweep") {
            files = spnp::write_sweep_outputs(cfg, threads, deterministic);
        } else {
            std::cout << spnp::to_json(cfg).dump(2) << '\n';
            return 0;
        }
        for (const auto& f : files) std::cout << f << '\n';
    } catch (const spnp::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
