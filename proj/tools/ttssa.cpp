// Command line front end: simulate, ensemble and stability.
#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ttssa/commands.hpp"
#include "ttssa/config.hpp"

namespace {

using Command = std::function<int(const ttssa::ExperimentConfig&, const std::filesystem::path&, std::ostream&)>;

int dispatch(const std::string& config_path, const std::string& out_dir, const Command& command) {
    ttssa::ExperimentConfig cfg;
    try {
        cfg = ttssa::load_config(config_path);
    } catch (const ttssa::ConfigError& e) {
        std::cerr << config_path;
        if (e.line() > 0) std::cerr << ':' << e.line();
        std::cerr << ": error: " << e.what() << '\n';
        return ttssa::kExitConfigError;
    }
    const std::filesystem::path out = std::filesystem::path(out_dir.empty() ? cfg.output_dir : out_dir);
    try {
        return command(cfg, out, std::cout);
    } catch (const ttssa::ConfigError& e) {
        std::cerr << config_path << ": error: " << e.what() << '\n';
        return ttssa::kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two time-scale stochastic approximation lab"};
    app.set_version_flag("--version", ttssa::kToolVersion);
    app.require_subcommand(1);

    std::string config_path, out_dir;
    Command selected;
    auto add = [&](const char* name, const char* help, Command command) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "JSON experiment config")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory (default: output_dir from the config)");
        sub->callback([&selected, command] { selected = command; });
    };
    add("simulate", "single trajectory: CSV plus JSON summary", ttssa::cmd_simulate);
    add("ensemble", "independent runs, per-run CSVs, mean CSV and rate fit", ttssa::cmd_ensemble);
    add("stability", "epsilon*(d) sweep, PD certificates and ODE verification", ttssa::cmd_stability);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : ttssa::kExitConfigError;
    }
    return dispatch(config_path, out_dir, selected);
}
