#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace volterra {

enum class Command { fbm, solve, malliavin, verify_cov, holder, kernel_dump, acceptance };
enum class OutputFormat { csv, json };

// Command names as typed on the command line (verify-cov, kernel-dump).
Command parse_command(const std::string& name);
std::string command_name(Command command);
OutputFormat parse_format(const std::string& name);
std::string format_name(OutputFormat format);

struct RunConfig {
    Command command = Command::fbm;
    double H = 0.5;
    int N = 256;
    int n_paths = 100;
    std::uint64_t seed = 0;
    double tol = 1e-8;
    std::string output_path = "out";
    OutputFormat format = OutputFormat::csv;
};

// One source of settings (a config file or the flag set); unset fields fall
// through to the next layer.
struct ConfigOverlay {
    std::optional<Command> command;
    std::optional<double> H;
    std::optional<int> N;
    std::optional<int> n_paths;
    std::optional<std::uint64_t> seed;
    std::optional<double> tol;
    std::optional<std::string> output_path;
    std::optional<OutputFormat> format;
};

// Parses a JSON object of settings. Unknown keys and type mismatches raise
// ConfigError naming the key.
ConfigOverlay read_config_file(const std::filesystem::path& path);

// defaults <- file <- flags, then invariant checks (ConfigError names the
// violated field).
RunConfig finalize_config(const ConfigOverlay& file, const ConfigOverlay& flags);

// File-only convenience: defaults filled, validated.
RunConfig load_config(const std::filesystem::path& path);

void validate_config(const RunConfig& config);

}  // namespace volterra
