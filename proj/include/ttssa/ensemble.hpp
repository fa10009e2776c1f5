#pragma once

#include <cstddef>
#include <vector>

#include "ttssa/solver.hpp"

namespace ttssa {

/// Runs ensemble member i with split_rng(RngState(seed), i), one after another.
/// Reference implementation for run_ensemble.
std::vector<Trajectory> run_ensemble_serial(const Experiment& ex, std::size_t runs);

/// Same result as run_ensemble_serial, members distributed over an OpenMP worker pool.
/// workers <= 0 uses the OpenMP default.
std::vector<Trajectory> run_ensemble(const Experiment& ex, std::size_t runs, int workers = 0);

}  // namespace ttssa
