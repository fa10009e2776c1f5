#include "ttssa/ensemble.hpp"

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ttssa {

std::vector<Trajectory> run_ensemble_serial(const Experiment& ex, std::size_t runs) {
    const RngState root(ex.config.seed);
    std::vector<Trajectory> out;
    out.reserve(runs);
    for (std::size_t i = 0; i < runs; ++i) out.push_back(run(ex, split_rng(root, i)));
    return out;
}

std::vector<Trajectory> run_ensemble(const Experiment& ex, std::size_t runs, int workers) {
    const RngState root(ex.config.seed);
    std::vector<Trajectory> out(runs);
    const auto n = static_cast<std::int64_t>(runs);
#ifdef _OPENMP
    const int threads = workers > 0 ? workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
#else
    (void)workers;
#endif
    for (std::int64_t i = 0; i < n; ++i)
        out[static_cast<std::size_t>(i)] = run(ex, split_rng(root, static_cast<std::uint64_t>(i)));
    return out;
}

}  // namespace ttssa
