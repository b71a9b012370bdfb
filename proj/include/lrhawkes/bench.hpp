#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lrhawkes/fit.hpp"
#include "lrhawkes/simulate.hpp"
#include "lrhawkes/types.hpp"

namespace lrhawkes {

struct ScalingRow {
    std::size_t n_target = 0;
    std::size_t n_actual = 0;
    int d = 0;
    int n_realizations = 0;
    double build_s = 0.0;  // median over repetitions
    double iter_s = 0.0;   // one coefficient step + one projection pass
};

struct ScalingConfig {
    int d = 50;
    double erdos_p = 0.1;
    double window = 100.0;
    int repetitions = 3;  // medians over timed runs, after one warm-up
    std::uint64_t seed = 7;
    int threads = 1;
};

// Generates histories whose event counts track the requested targets (by
// scaling the number of realizations from a pilot run), then times the
// statistics build and one outer iteration for each.
std::vector<ScalingRow> scaling_run(const std::vector<std::size_t>& n_targets,
                                    const Hyperparams& hp, const ScalingConfig& cfg);

struct RankRow {
    int r = 0;
    double loglik = 0.0;
    double auc = 0.0;
    double accuracy = 0.0;
    double l2_error = -1.0;  // type-level; -1 when no ground truth given
};

// Fits the same data at each rank (shared seeds) and evaluates prediction on
// a held-out split, plus kernel recovery when the generating config is known.
std::vector<RankRow> rank_sweep(const EventHistory& history, const Network& net,
                                const Hyperparams& hp, const std::vector<int>& ranks,
                                const SyntheticConfig* truth = nullptr, int threads = 1,
                                double holdout = 0.2);

void save_scaling_csv(const std::vector<ScalingRow>& rows, const std::string& path);
void save_rank_csv(const std::vector<RankRow>& rows, const std::string& path);

}  // namespace lrhawkes
