#pragma once

#include <cstdint>
#include <utility>

#include "lrhawkes/optimize_alpha.hpp"
#include "lrhawkes/tensors.hpp"
#include "lrhawkes/types.hpp"

namespace lrhawkes {

// Random starting point: free projection entries uniform in (0.1, 1), free
// coefficients uniform in (0.1, 1) scaled by 1/(K r) so that initial
// intensities stay moderate. Strictly positive, hence feasible.
LowRankModel init_params(int d, const Hyperparams& hp, std::uint64_t seed);

struct FitOptions {
    int threads = 1;
    int mm_sweeps = 5;  // multiplicative sweeps per outer iteration
    AlphaOptions::Solver alpha_solver = AlphaOptions::Solver::Auto;
};

// Alternating inference: build the sparse statistics once, then repeat
// (coefficient step, projection sweeps) until the relative log-likelihood
// improvement over a full outer iteration falls below rel_tol or
// max_outer_iters is reached. The trace records the log-likelihood after
// every half-step.
std::pair<LowRankModel, FitReport> fit(const EventHistory& history, const Network& net,
                                       const Hyperparams& hp, const LowRankModel* init = nullptr,
                                       const FitOptions& opts = {});

// Same loop against pre-built statistics (used by the benchmark harness to
// time phases separately).
std::pair<LowRankModel, FitReport> fit_with_tensors(const SuffStats& ts, const Hyperparams& hp,
                                                    const LowRankModel* init = nullptr,
                                                    const FitOptions& opts = {});

}  // namespace lrhawkes
