#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace volterra {

// Outcome of one acceptance criterion. A criterion passes only if its checks
// hold and it finishes inside its runtime budget.
struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    double seconds = 0.0;
    double budget_seconds = 0.0;
    std::string detail;  // headline measurements, mirrored into report.json
};

// Runs criteria 1..9, writing one JSON artifact per criterion plus a hash
// manifest under artifact_dir. Everything written there is a pure function
// of the seed; wall-clock readings stay out of the files. on_done, when set,
// fires after each criterion.
std::vector<CriterionResult> acceptance_criteria(
    const std::filesystem::path& artifact_dir, std::uint64_t seed,
    const std::function<void(const CriterionResult&)>& on_done = {});

// Full gate: criteria 1..9 into out_dir/artifacts, a second identical pass
// into out_dir/artifacts_rerun, byte comparison of the two trees
// (criterion 10), one stdout line per criterion, report.json with timings.
// Returns 0 iff every criterion passed.
int run_acceptance(const std::filesystem::path& out_dir, std::uint64_t seed);

}  // namespace volterra
