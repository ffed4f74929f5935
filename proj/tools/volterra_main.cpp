#include <cstdint>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "volterra/commands.hpp"
#include "volterra/config.hpp"
#include "volterra/errors.hpp"

namespace {

// Raw flag storage; presence is read back off the subcommand so unset flags
// fall through to the config file and then the defaults.
struct FlagValues {
    double H = 0.0;
    int N = 0;
    int n_paths = 0;
    std::uint64_t seed = 0;
    double tol = 0.0;
    std::string out;
    std::string format;
    std::string config_path;
};

void attach_options(CLI::App* sub, FlagValues& values) {
    sub->add_option("--H", values.H, "Hurst parameter in (0, 1)");
    sub->add_option("--N", values.N, "time steps, a power of two >= 4");
    sub->add_option("--n-paths", values.n_paths, "Monte Carlo path count");
    sub->add_option("--seed", values.seed, "base RNG seed");
    sub->add_option("--tol", values.tol, "Picard stopping tolerance");
    sub->add_option("--out", values.out, "output directory");
    sub->add_option("--format", values.format, "path data format")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--config", values.config_path, "JSON settings file")
        ->check(CLI::ExistingFile);
}

}  // namespace

int main(int argc, char** argv) {
    using namespace volterra;

    CLI::App app{"discretized stochastic Volterra equations with singular fBm-type kernels"};
    app.require_subcommand(1);
    FlagValues values;

    const std::pair<Command, const char*> commands[] = {
        {Command::fbm, "sample fractional Brownian paths through the kernel route"},
        {Command::solve, "run the Picard solver over a Monte Carlo ensemble"},
        {Command::malliavin, "compute the solution's derivative along the built-in direction"},
        {Command::verify_cov, "compare an ensemble covariance against the closed form"},
        {Command::holder, "estimate path regularity from dyadic increments"},
        {Command::kernel_dump, "write the discrete kernel weight table"},
        {Command::acceptance, "run the full acceptance gate"},
    };
    for (const auto& [command, help] : commands) {
        attach_options(app.add_subcommand(command_name(command), help), values);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& help) {
        return app.exit(help);
    } catch (const CLI::ParseError& err) {
        app.exit(err);
        return 2;
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        ConfigOverlay flags;
        flags.command = parse_command(sub->get_name());
        if (sub->count("--H")) flags.H = values.H;
        if (sub->count("--N")) flags.N = values.N;
        if (sub->count("--n-paths")) flags.n_paths = values.n_paths;
        if (sub->count("--seed")) flags.seed = values.seed;
        if (sub->count("--tol")) flags.tol = values.tol;
        if (sub->count("--out")) flags.output_path = values.out;
        if (sub->count("--format")) flags.format = parse_format(values.format);

        ConfigOverlay file;
        if (sub->count("--config")) file = read_config_file(values.config_path);

        return run(finalize_config(file, flags));
    } catch (const ConfigError& err) {
        std::cerr << "configuration error: " << err.what() << "\n";
        return 2;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
}
