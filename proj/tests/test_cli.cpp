#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "volterra/commands.hpp"
#include "volterra/config.hpp"
#include "volterra/errors.hpp"
#include "volterra/export.hpp"

using namespace volterra;
namespace fs = std::filesystem;

namespace {

// Fresh scratch directory per test case so reruns never see stale files.
fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "volterra_cli_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write_file(const fs::path& dir, const std::string& name, const std::string& text) {
    const fs::path path = dir / name;
    std::ofstream out(path, std::ios::binary);
    out << text;
    return path;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(bool(in));
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_CASE("command and format names round-trip") {
    for (const char* name :
         {"fbm", "solve", "malliavin", "verify-cov", "holder", "kernel-dump", "acceptance"}) {
        CHECK(command_name(parse_command(name)) == name);
    }
    CHECK(parse_format("csv") == OutputFormat::csv);
    CHECK(parse_format("json") == OutputFormat::json);
    CHECK_THROWS_AS(parse_command("fBm"), ConfigError);
    CHECK_THROWS_AS(parse_format("yaml"), ConfigError);
}

TEST_CASE("an empty config file yields the documented defaults") {
    const fs::path dir = scratch("defaults");
    const fs::path file = write_file(dir, "empty.json", "{}\n");
    const RunConfig config = load_config(file);
    CHECK(config.command == Command::fbm);
    CHECK(config.H == 0.5);
    CHECK(config.N == 256);
    CHECK(config.n_paths == 100);
    CHECK(config.seed == 0);
    CHECK(config.tol == 1e-8);
    CHECK(config.output_path == "out");
    CHECK(config.format == OutputFormat::csv);
}

TEST_CASE("config files populate every recognized key") {
    const fs::path dir = scratch("full_file");
    const fs::path file = write_file(dir, "full.json",
                                     "{\"command\": \"solve\", \"H\": 0.75, \"N\": 64,"
                                     " \"n_paths\": 7, \"seed\": 99, \"tol\": 1e-6,"
                                     " \"output_path\": \"runs/a\", \"format\": \"json\"}\n");
    const RunConfig config = load_config(file);
    CHECK(config.command == Command::solve);
    CHECK(config.H == 0.75);
    CHECK(config.N == 64);
    CHECK(config.n_paths == 7);
    CHECK(config.seed == 99);
    CHECK(config.tol == 1e-6);
    CHECK(config.output_path == "runs/a");
    CHECK(config.format == OutputFormat::json);
}

TEST_CASE("config errors name the offending key") {
    const fs::path dir = scratch("bad_files");
    CHECK_THROWS_AS(read_config_file(dir / "missing.json"), ConfigError);
    CHECK_THROWS_AS(read_config_file(write_file(dir, "broken.json", "{unquoted}")), ConfigError);
    CHECK_THROWS_AS(read_config_file(write_file(dir, "array.json", "[1, 2]")), ConfigError);

    try {
        read_config_file(write_file(dir, "unknown.json", "{\"hurst\": 0.5}"));
        FAIL("unknown key accepted");
    } catch (const ConfigError& err) {
        CHECK(std::string(err.what()).find("hurst") != std::string::npos);
    }
    try {
        read_config_file(write_file(dir, "badtype.json", "{\"N\": \"many\"}"));
        FAIL("wrong type accepted");
    } catch (const ConfigError& err) {
        CHECK(std::string(err.what()).find("'N'") != std::string::npos);
    }
}

TEST_CASE("flags override the file which overrides the defaults") {
    const fs::path dir = scratch("precedence");
    const fs::path file = write_file(dir, "base.json", "{\"H\": 0.25, \"N\": 64}");
    ConfigOverlay flags;
    flags.H = 0.75;
    flags.seed = 5;
    const RunConfig config = finalize_config(read_config_file(file), flags);
    CHECK(config.H == 0.75);   // flag wins
    CHECK(config.N == 64);     // file wins over default
    CHECK(config.seed == 5);
    CHECK(config.n_paths == 100);  // untouched default
}

TEST_CASE("validation rejects out-of-range settings by field name") {
    auto message_of = [](RunConfig config) {
        try {
            validate_config(config);
        } catch (const ConfigError& err) {
            return std::string(err.what());
        }
        return std::string();
    };
    RunConfig config;
    config.H = 1.2;
    CHECK(message_of(config).substr(0, 2) == "H:");
    config = RunConfig{};
    config.N = 100;
    CHECK(message_of(config).substr(0, 2) == "N:");
    config = RunConfig{};
    config.N = 2;
    CHECK(message_of(config).substr(0, 2) == "N:");
    config = RunConfig{};
    config.n_paths = 0;
    CHECK(message_of(config).substr(0, 8) == "n_paths:");
    config = RunConfig{};
    config.tol = 0.0;
    CHECK(message_of(config).substr(0, 4) == "tol:");
    config = RunConfig{};
    config.output_path.clear();
    CHECK(message_of(config).substr(0, 12) == "output_path:");
}

TEST_CASE("double formatting survives a parse round-trip") {
    for (double value : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0, 6.02214076e23}) {
        const std::string text = format_double(value);
        CHECK(std::strtod(text.c_str(), nullptr) == value);
    }
    CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("file digests match the FNV-1a reference vectors") {
    const fs::path dir = scratch("digests");
    CHECK(fnv1a64_file(write_file(dir, "empty.bin", "")) == "cbf29ce484222325");
    CHECK(fnv1a64_file(write_file(dir, "a.bin", "a")) == "af63dc4c8601ec8c");
    CHECK(fnv1a64_file(write_file(dir, "foobar.bin", "foobar")) == "85944171f73967e8");
}

TEST_CASE("column export writes one labeled row per node") {
    const fs::path dir = scratch("columns");
    const Grid grid(2);
    const GridFunction u = GridFunction::sample(grid, [](double t) { return 2.0 * t; });
    write_columns_csv(dir / "u.csv", grid, {"u"}, {&u});
    std::istringstream in(slurp(dir / "u.csv"));
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "time,u");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == grid.n_nodes());
}

TEST_CASE("the fbm command writes paths plus a manifest that matches on disk") {
    const fs::path dir = scratch("fbm_run");
    RunConfig config;
    config.command = Command::fbm;
    config.N = 8;
    config.n_paths = 3;
    config.seed = 42;
    config.output_path = (dir / "run").string();
    REQUIRE(run(config) == 0);
    REQUIRE(fs::exists(dir / "run" / "paths.csv"));

    const nlohmann::json manifest = nlohmann::json::parse(slurp(dir / "run" / "manifest.json"));
    CHECK(manifest["config"]["seed"] == 42);
    CHECK(manifest["seeds"].size() == 3);
    REQUIRE(manifest["files"].size() == 1);
    CHECK(manifest["files"][0]["name"] == "paths.csv");
    CHECK(manifest["files"][0]["fnv1a64"] == fnv1a64_file(dir / "run" / "paths.csv"));
    CHECK(manifest["files"][0]["bytes"] == fs::file_size(dir / "run" / "paths.csv"));
}

TEST_CASE("identical commands produce byte-identical outputs") {
    const fs::path dir = scratch("repro");
    RunConfig config;
    config.command = Command::fbm;
    config.H = 0.75;
    config.N = 16;
    config.n_paths = 4;
    config.seed = 7;
    config.format = OutputFormat::json;
    config.output_path = (dir / "first").string();
    REQUIRE(run(config) == 0);
    config.output_path = (dir / "second").string();
    REQUIRE(run(config) == 0);
    CHECK(slurp(dir / "first" / "paths.json") == slurp(dir / "second" / "paths.json"));
    CHECK(slurp(dir / "first" / "manifest.json") != "");
}

TEST_CASE("the solve command reports per-path convergence diagnostics") {
    const fs::path dir = scratch("solve_run");
    RunConfig config;
    config.command = Command::solve;
    config.H = 0.75;
    config.N = 32;
    config.n_paths = 5;
    config.seed = 3;
    config.output_path = (dir / "run").string();
    REQUIRE(run(config) == 0);
    const nlohmann::json diag = nlohmann::json::parse(slurp(dir / "run" / "diagnostics.json"));
    CHECK(diag["iterations"].size() == 5);
    CHECK(diag["final_deltas"].size() == 5);
    CHECK(diag["max_iterations"].get<int>() >= 1);
    CHECK(diag["max_iterations"].get<int>() <= 50);
}

TEST_CASE("the malliavin command writes three agreeing derivative columns") {
    const fs::path dir = scratch("malliavin_run");
    RunConfig config;
    config.command = Command::malliavin;
    config.H = 0.75;
    config.N = 64;
    config.n_paths = 1;
    config.seed = 11;
    config.tol = 1e-10;
    config.output_path = (dir / "run").string();
    REQUIRE(run(config) == 0);
    REQUIRE(fs::exists(dir / "run" / "derivative.csv"));
    const nlohmann::json report = nlohmann::json::parse(slurp(dir / "run" / "consistency.json"));
    CHECK(report["series_terms_used"].get<int>() >= 1);
    CHECK(report["sup_linear_vs_variation"].get<double>() < 1e-4);
    CHECK(report["sup_linear_vs_fd"].get<double>() < 1e-2);
    CHECK(report["direction_h0_norm"].get<double>() > 0.0);
}

TEST_CASE("the verify-cov command passes on an honest sample") {
    const fs::path dir = scratch("verify_run");
    RunConfig config;
    config.command = Command::verify_cov;
    config.H = 0.5;
    config.N = 8;
    config.n_paths = 5000;
    config.seed = 17;
    config.output_path = (dir / "run").string();
    REQUIRE(run(config) == 0);
    const nlohmann::json report = nlohmann::json::parse(slurp(dir / "run" / "covariance.json"));
    CHECK(report["pass"].get<bool>());
    CHECK(report["violations"].get<int>() == 0);
}

TEST_CASE("the holder command records slopes and their median") {
    const fs::path dir = scratch("holder_run");
    RunConfig config;
    config.command = Command::holder;
    config.H = 0.5;
    config.N = 1024;
    config.n_paths = 9;
    config.seed = 23;
    config.output_path = (dir / "run").string();
    REQUIRE(run(config) == 0);
    const nlohmann::json report = nlohmann::json::parse(slurp(dir / "run" / "holder.json"));
    CHECK(report["slopes"].size() == 9);
    CHECK(report["median_error"].get<double>() < 0.25);
}

TEST_CASE("the kernel-dump command tabulates both weight matrices") {
    const fs::path dir = scratch("dump_run");
    RunConfig config;
    config.command = Command::kernel_dump;
    config.H = 0.25;
    config.N = 4;
    config.output_path = (dir / "run").string();
    REQUIRE(run(config) == 0);
    std::istringstream in(slurp(dir / "run" / "kernel.csv"));
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "i,j,t_i,t_j,det_weight,sto_weight");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 1 + 2 + 3 + 4);  // strictly lower-triangular entries for N = 4
}

TEST_CASE("run rejects invalid configurations up front") {
    RunConfig config;
    config.N = 100;
    CHECK_THROWS_AS(run(config), ConfigError);
}

TEST_CASE("the demo dynamics are the documented bounded-Lipschitz pair") {
    const SdeProblem p = demo_problem(FbmKernel{0.75});
    CHECK(p.x0 == 1.0);
    CHECK(p.b(0.0, 2.0) == -2.0);
    CHECK(p.sigma(0.0, 0.0) == 0.5);
    CHECK(p.db_dx(0.0, 5.0) == -1.0);
    CHECK(p.dsigma_dx(0.0, 0.0) == 0.0);

    const Grid grid(8);
    const GridFunction d = demo_direction(grid);
    for (int i = 0; i < d.size(); ++i) CHECK(d[i] > 0.0);
}
