#pragma once

#include <string>
#include <vector>

#include "lrhawkes/tensors.hpp"
#include "lrhawkes/types.hpp"

namespace lrhawkes {

// Statistics of the coefficient-step objective after projecting the event
// tensors through a fixed P. Free coefficients are packed per target group i
// as one block of length L = r*K + (K+1):
//   [ a(j,i,k) for j = 0..r-1, k = 1..K | beta(i,k) for k = 0..K ]
// so an event's intensity is sum_i P[u_e,i] * <block_i, w_e> with a shared
// per-event vector w_e. The raw decay rows backing the barrier terms stay in
// the SuffStats they were built from.
struct ProjectedStats {
    int d = 0, r = 0, K = 0;
    const SuffStats* ts = nullptr;
    std::vector<double> P;      // d x r free block of the projection
    std::vector<double> q;      // n_events x (r*K): projected predecessor rows
    std::vector<double> b;      // n_params: linear (compensator) coefficients
    bool has_trigger_rows = false;

    int block_len() const { return r * K + (K + 1); }
    int n_params() const { return r * block_len(); }
    std::size_t n_events() const { return ts ? ts->n_events() : 0; }

    int trig_index(int j, int i, int k) const { return i * block_len() + j * K + (k - 1); }
    int base_index(int i, int k) const { return i * block_len() + r * K + k; }
};

// c^{e}_{jik} = P[u_e,i] * q_e[j,k] plus the baseline part; b as defined by
// the compensator. O(nnz * r).
ProjectedStats project_tensors(const LowRankModel& model, const SuffStats& ts, int threads = 1);

std::vector<double> pack_alpha(const LowRankModel& model);
void unpack_alpha(const std::vector<double>& x, LowRankModel& model);

// Barrier-augmented concave objective
//   F(x) = sum_e [ ln(c_e^T x) + eps * sum_rows ln(row^T x) ] - b^T x.
// Returns false (and leaves outputs unspecified) when x is infeasible, i.e.
// some log argument is non-positive. grad/hess may be null when not needed;
// hess is dense row-major n_params^2.
bool barrier_objective(const std::vector<double>& x, const ProjectedStats& stats, double epsilon,
                       double& value, std::vector<double>* grad, std::vector<double>* hess,
                       int threads = 1);

struct AlphaOptions {
    enum class Solver { Auto, Newton, QuasiNewton };
    Solver solver = Solver::Auto;
    int threads = 1;
    // Newton is used while the parameter count stays below this; above it the
    // limited-memory path takes over.
    int dense_param_limit = 2000;
};

struct AlphaResult {
    double objective = 0.0;
    double grad_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<std::string> warnings;
};

// Maximizes the barrier objective over the free coefficients, keeping every
// iterate strictly feasible (damped Newton / L-BFGS with a feasibility-aware
// backtracking line search). model.alpha is the warm start and receives the
// result; model.P is fixed. With epsilon_decay_pass set, one extra solve at
// epsilon/10 is run from the optimum.
AlphaResult optimize_alpha(LowRankModel& model, const SuffStats& ts, const Hyperparams& hp,
                           const AlphaOptions& opts = {});

}  // namespace lrhawkes
