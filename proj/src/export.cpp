#include "volterra/export.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace volterra {

std::string format_double(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    return out;
}

}  // namespace

void write_columns_csv(const std::filesystem::path& path, const Grid& grid,
                       const std::vector<std::string>& labels,
                       const std::vector<const GridFunction*>& columns) {
    if (labels.size() != columns.size()) {
        throw std::invalid_argument("write_columns_csv: label/column count mismatch");
    }
    for (const GridFunction* column : columns) {
        if (column == nullptr || !(column->grid() == grid)) {
            throw std::invalid_argument("write_columns_csv: column grid mismatch");
        }
    }
    std::ofstream out = open_out(path);
    out << "time";
    for (const auto& label : labels) out << ',' << label;
    out << '\n';
    for (int i = 0; i < grid.n_nodes(); ++i) {
        out << format_double(grid.node(i));
        for (const GridFunction* column : columns) out << ',' << format_double((*column)[i]);
        out << '\n';
    }
}

void write_ensemble_csv(const std::filesystem::path& path, const PathEnsemble& ensemble) {
    std::vector<std::string> labels;
    std::vector<const GridFunction*> columns;
    labels.reserve(ensemble.paths.size());
    columns.reserve(ensemble.paths.size());
    for (std::size_t p = 0; p < ensemble.paths.size(); ++p) {
        labels.push_back("path_" + std::to_string(p));
        columns.push_back(&ensemble.paths[p]);
    }
    write_columns_csv(path, ensemble.grid, labels, columns);
}

void write_ensemble_json(const std::filesystem::path& path, const PathEnsemble& ensemble) {
    nlohmann::json doc;
    doc["grid"] = {{"n_steps", ensemble.grid.n_steps()},
                   {"horizon", ensemble.grid.horizon()}};
    doc["label"] = ensemble.label;
    doc["seeds"] = ensemble.seeds;
    nlohmann::json paths = nlohmann::json::array();
    for (const auto& p : ensemble.paths) paths.push_back(p.values());
    doc["paths"] = std::move(paths);
    std::ofstream out = open_out(path);
    out << doc.dump(2) << '\n';
}

std::string fnv1a64_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string() + " for hashing");
    std::uint64_t hash = 14695981039346656037ULL;
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        const std::streamsize got = in.gcount();
        for (std::streamsize k = 0; k < got; ++k) {
            hash ^= static_cast<unsigned char>(buf[k]);
            hash *= 1099511628211ULL;
        }
        if (got < static_cast<std::streamsize>(sizeof(buf))) break;
    }
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(hash));
    return hex;
}

std::vector<ManifestEntry> collect_entries(const std::filesystem::path& dir,
                                           const std::vector<std::string>& names) {
    std::vector<ManifestEntry> entries;
    entries.reserve(names.size());
    for (const auto& name : names) {
        const std::filesystem::path file = dir / name;
        ManifestEntry entry;
        entry.name = name;
        entry.bytes = static_cast<std::uint64_t>(std::filesystem::file_size(file));
        entry.fnv1a64 = fnv1a64_file(file);
        entries.push_back(std::move(entry));
    }
    return entries;
}

}  // namespace volterra
