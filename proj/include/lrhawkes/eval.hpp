#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "lrhawkes/simulate.hpp"
#include "lrhawkes/types.hpp"

namespace lrhawkes {

// Kernel matrix as a callable: (src group, dst group, lag) -> value.
using KernelFn = std::function<double(int, int, double)>;

struct EvalGrid {
    double t_max = 10.0;
    int n_points = 1000;
};

// Mean over group pairs of ||f - g||_2 / (||f||_2 + ||g||_2) with L2 norms by
// trapezoidal quadrature on [0, t_max]; a pair with both norms zero
// contributes zero. Symmetric in its arguments and invariant to scaling both
// by the same positive constant. No label alignment is applied here.
double normalized_l2_error(const KernelFn& inferred, const KernelFn& truth, int r,
                           const EvalGrid& grid = {});

// ---------------------------------------------------------------------------
// Group recovery
// ---------------------------------------------------------------------------

struct GroupRecovery {
    std::vector<int> assignment;   // d labels in [0, r)
    std::vector<double> centers;   // r x r row-major: centers[c*r + i]
    double inertia = 0.0;
};

// k-means (k = r) on the free projection rows; kmeans++ seeding, multiple
// restarts, best inertia kept. Empty clusters are re-seeded within the
// restart. Deterministic given seed.
GroupRecovery recover_groups(const LowRankModel& model, int restarts = 10,
                             std::uint64_t seed = 0);

// Group-level kernels of a fitted model expressed in the recovered basis:
// ghat(a, b, t) = sum_{j,i} centers[a][j] centers[b][i] kernel_value(j, i, t).
KernelFn model_group_kernels(const LowRankModel& model, const Hyperparams& hp,
                             const std::vector<double>& centers);

KernelFn synthetic_kernels(const SyntheticConfig& cfg);

struct AlignedError {
    double error = 0.0;
    std::vector<int> permutation;  // true group g maps to cluster permutation[g]
    bool assignment_exact = false;
};

// Minimum normalized L2 error over all r! relabelings of the recovered
// clusters, plus whether the best relabeling reproduces the true assignment.
AlignedError aligned_kernel_error(const LowRankModel& model, const Hyperparams& hp,
                                  const GroupRecovery& rec, const SyntheticConfig& cfg,
                                  const EvalGrid& grid = {});

// Pairwise error over all d^2 type pairs (defined for any fitted rank, used
// by the rank sensitivity sweep).
double type_level_l2_error(const LowRankModel& model, const Hyperparams& hp,
                           const SyntheticConfig& cfg, const EvalGrid& grid = {});

// ---------------------------------------------------------------------------
// Next-event prediction
// ---------------------------------------------------------------------------

// Scores for the next event type at time t: the occurrence rates themselves.
std::vector<double> predict_scores(const LowRankModel& model, const Hyperparams& hp,
                                   const EventHistory& history, const Network& net, int h,
                                   double t);

// Per-event one-vs-rest AUC of the true type's score against the other d-1,
// ties counted half, averaged over events.
double auc(const std::vector<std::vector<double>>& scores, const std::vector<int>& true_types);

// Share of events whose true type ranks in the top ceil(fraction*d)
// candidates (ties broken by type index).
double accuracy_at(const std::vector<std::vector<double>>& scores,
                   const std::vector<int>& true_types, double fraction = 0.30);

// Training-frequency scores of the constant-rate baseline ranker.
std::vector<double> naive_baseline(const EventHistory& train, int d);

struct PredictionEval {
    double auc = 0.0;
    double accuracy = 0.0;
    std::size_t n_events = 0;
};

// Scores every event of every test realization given that realization's own
// past, then evaluates AUC and accuracy.
PredictionEval evaluate_prediction(const LowRankModel& model, const Hyperparams& hp,
                                   const EventHistory& test, const Network& net,
                                   double fraction = 0.30, int threads = 1);

// Same metrics for a ranker with constant scores (e.g. the naive baseline).
PredictionEval evaluate_static_scores(const std::vector<double>& static_scores,
                                      const EventHistory& test, double fraction = 0.30);

// First (1 - test_fraction) realizations for training, the rest held out.
std::pair<EventHistory, EventHistory> split_holdout(const EventHistory& history,
                                                    double test_fraction = 0.2);

}  // namespace lrhawkes
