#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "cardiobif/config.hpp"
#include "cardiobif/errors.hpp"
#include "cardiobif/presets.hpp"
#include "cardiobif/runner.hpp"

namespace {

int run_command(const std::string& preset, const std::string& config_file,
                const std::string& out_dir, bool full_scale, bool seedless) {
    using namespace cardiobif;
    try {
        if (preset.empty() == config_file.empty()) {
            std::cerr << "run: pass exactly one of --preset or --config\n";
            return 2;
        }
        ExperimentConfig config =
            preset.empty() ? load_config(config_file) : preset_config(preset);
        if (!out_dir.empty()) config.out_dir = out_dir;
        if (full_scale) resolve_full_scale(config);
        if (seedless && config.kind == ExperimentConfig::Kind::tissue &&
            config.tissue.threads_auto)
            throw ConfigError(
                "tissue.threads: 'auto' is not allowed with --seedless");
        validate_config(config);

        const RunResult result = run_experiment(config);
        for (const auto& note : result.notes) std::cout << note << "\n";
        for (const auto& path : result.artifacts)
            std::cout << "wrote " << path << "\n";
        return 0;
    } catch (const ConfigError& err) {
        std::cerr << "config error: " << err.what() << "\n";
        return 2;
    } catch (const IntegrationDiverged& err) {
        std::cerr << "numerical failure: " << err.what() << "\n";
        return 3;
    } catch (const NewtonFailure& err) {
        std::cerr << "numerical failure: " << err.what() << "\n";
        return 3;
    } catch (const SingularJacobian& err) {
        std::cerr << "numerical failure: " << err.what() << "\n";
        return 3;
    } catch (const DomainError& err) {
        std::cerr << "config error: " << err.what() << "\n";
        return 2;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cardiac cell, bifurcation and tissue experiments"};
    app.require_subcommand(1);

    std::string preset, config_file, out_dir;
    bool full_scale = false, seedless = false;

    CLI::App* run = app.add_subcommand("run", "Run one experiment");
    run->add_option("--preset", preset, "Preset name (see list-presets)");
    run->add_option("--config", config_file, "Config file (key = value lines)");
    run->add_option("--out", out_dir, "Output directory (overrides the config)");
    run->add_flag("--full-scale", full_scale,
                  "Apply the tissue.full.* overrides (full-resolution grid)");
    run->add_flag("--seedless", seedless,
                  "Reject nondeterministic options such as tissue.threads = auto");

    CLI::App* list = app.add_subcommand("list-presets", "Print the preset catalogue");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    if (list->parsed()) {
        for (const auto& info : cardiobif::list_presets())
            std::printf("%-10s %s\n", info.name.c_str(), info.description.c_str());
        return 0;
    }
    return run_command(preset, config_file, out_dir, full_scale, seedless);
}
