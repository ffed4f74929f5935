#pragma once

#include "volterra/config.hpp"
#include "volterra/solver.hpp"

namespace volterra {

// Bounded-Lipschitz demonstration dynamics used by the solve / malliavin /
// acceptance pipelines: b = -x, sigma = 0.5 (1 + x^2)^{-1/2}, with exact
// x-derivatives.
SdeProblem demo_problem(const KernelSpec& kernel);

// Built-in smooth direction density 1 + sin(3t)/2 + t^2 for the derivative
// pipelines.
GridFunction demo_direction(const Grid& grid);

// Executes config.command, writing data files plus manifest.json under
// config.output_path. Returns 0 on success; numeric failures write
// error.json there and return 1.
int run(const RunConfig& config);

}  // namespace volterra
