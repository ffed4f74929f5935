#include "volterra/config.hpp"

#include <fstream>

#include "json.hpp"
#include "volterra/errors.hpp"

namespace volterra {

Command parse_command(const std::string& name) {
    if (name == "fbm") return Command::fbm;
    if (name == "solve") return Command::solve;
    if (name == "malliavin") return Command::malliavin;
    if (name == "verify-cov") return Command::verify_cov;
    if (name == "holder") return Command::holder;
    if (name == "kernel-dump") return Command::kernel_dump;
    if (name == "acceptance") return Command::acceptance;
    throw ConfigError("command: unknown command '" + name + "'");
}

std::string command_name(Command command) {
    switch (command) {
        case Command::fbm: return "fbm";
        case Command::solve: return "solve";
        case Command::malliavin: return "malliavin";
        case Command::verify_cov: return "verify-cov";
        case Command::holder: return "holder";
        case Command::kernel_dump: return "kernel-dump";
        case Command::acceptance: return "acceptance";
    }
    return "unknown";
}

OutputFormat parse_format(const std::string& name) {
    if (name == "csv") return OutputFormat::csv;
    if (name == "json") return OutputFormat::json;
    throw ConfigError("format: must be 'csv' or 'json', got '" + name + "'");
}

std::string format_name(OutputFormat format) {
    return format == OutputFormat::csv ? "csv" : "json";
}

ConfigOverlay read_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path.string() + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& err) {
        throw ConfigError("config: malformed JSON in '" + path.string() + "': " + err.what());
    }
    if (!doc.is_object()) throw ConfigError("config: top level must be a JSON object");

    ConfigOverlay overlay;
    for (const auto& [key, value] : doc.items()) {
        try {
            if (key == "command") {
                overlay.command = parse_command(value.get<std::string>());
            } else if (key == "H") {
                overlay.H = value.get<double>();
            } else if (key == "N") {
                overlay.N = value.get<int>();
            } else if (key == "n_paths") {
                overlay.n_paths = value.get<int>();
            } else if (key == "seed") {
                overlay.seed = value.get<std::uint64_t>();
            } else if (key == "tol") {
                overlay.tol = value.get<double>();
            } else if (key == "output_path") {
                overlay.output_path = value.get<std::string>();
            } else if (key == "format") {
                overlay.format = parse_format(value.get<std::string>());
            } else {
                throw ConfigError("config: unknown key '" + key + "'");
            }
        } catch (const nlohmann::json::exception&) {
            throw ConfigError("config: key '" + key + "' has the wrong type");
        }
    }
    return overlay;
}

namespace {

void apply(RunConfig& config, const ConfigOverlay& overlay) {
    if (overlay.command) config.command = *overlay.command;
    if (overlay.H) config.H = *overlay.H;
    if (overlay.N) config.N = *overlay.N;
    if (overlay.n_paths) config.n_paths = *overlay.n_paths;
    if (overlay.seed) config.seed = *overlay.seed;
    if (overlay.tol) config.tol = *overlay.tol;
    if (overlay.output_path) config.output_path = *overlay.output_path;
    if (overlay.format) config.format = *overlay.format;
}

}  // namespace

RunConfig finalize_config(const ConfigOverlay& file, const ConfigOverlay& flags) {
    RunConfig config;
    apply(config, file);
    apply(config, flags);
    validate_config(config);
    return config;
}

RunConfig load_config(const std::filesystem::path& path) {
    return finalize_config(read_config_file(path), ConfigOverlay{});
}

void validate_config(const RunConfig& config) {
    if (!(config.H > 0.0) || !(config.H < 1.0)) {
        throw ConfigError("H: must lie in (0, 1), got " + std::to_string(config.H));
    }
    if (config.N < 4 || (config.N & (config.N - 1)) != 0) {
        throw ConfigError("N: must be a power of two >= 4, got " + std::to_string(config.N));
    }
    if (config.n_paths < 1) {
        throw ConfigError("n_paths: must be >= 1, got " + std::to_string(config.n_paths));
    }
    if (!(config.tol > 0.0)) {
        throw ConfigError("tol: must be positive, got " + std::to_string(config.tol));
    }
    if (config.output_path.empty()) {
        throw ConfigError("output_path: must not be empty");
    }
}

}  // namespace volterra
