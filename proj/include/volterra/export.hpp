#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "volterra/grid.hpp"
#include "volterra/simulate.hpp"

namespace volterra {

inline constexpr const char* kLibraryVersion = "1.0.0";

// Shortest round-trip decimal form (%.17g); every writer funnels through
// this so identical doubles always serialize identically.
std::string format_double(double value);

// Header "time,<labels...>"; one row per node, time first. columns[k] must
// all live on the same grid.
void write_columns_csv(const std::filesystem::path& path, const Grid& grid,
                       const std::vector<std::string>& labels,
                       const std::vector<const GridFunction*>& columns);

// Ensemble layout: paths as columns path_0..path_{P-1}, nodes as rows.
void write_ensemble_csv(const std::filesystem::path& path, const PathEnsemble& ensemble);

// Same data as a JSON document {grid, seeds, label, paths}.
void write_ensemble_json(const std::filesystem::path& path, const PathEnsemble& ensemble);

// FNV-1a 64-bit digest of the file's bytes, as 16 hex digits.
std::string fnv1a64_file(const std::filesystem::path& path);

struct ManifestEntry {
    std::string name;
    std::uint64_t bytes = 0;
    std::string fnv1a64;
};

// Stats the named files (relative to dir) and hashes their content.
std::vector<ManifestEntry> collect_entries(const std::filesystem::path& dir,
                                           const std::vector<std::string>& names);

}  // namespace volterra
