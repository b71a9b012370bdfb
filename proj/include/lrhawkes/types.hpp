#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace lrhawkes {

// ---------------------------------------------------------------------------
// Network
// ---------------------------------------------------------------------------

// Unweighted directed graph over event types. adj[v*d+u] == 1 means events of
// type v excite type u. Immutable after construction.
struct Network {
    int d = 0;
    std::vector<std::uint8_t> adj;            // row-major d*d, entries 0/1
    int max_out_degree = 0;
    int max_in_degree = 0;
    std::vector<std::vector<int>> out_of;     // out_of[v] = {u : v -> u}
    std::vector<std::vector<int>> in_of;      // in_of[u]  = {v : v -> u}

    bool edge(int v, int u) const { return adj[static_cast<std::size_t>(v) * d + u] != 0; }

    // Fully connected off-diagonal graph, the default when no network is given.
    static Network complete(int d, bool self_loops = true);
    static Network from_adjacency(int d, std::vector<std::uint8_t> adj);
};

// ---------------------------------------------------------------------------
// EventHistory
// ---------------------------------------------------------------------------

struct Event {
    double time = 0.0;
    int type = 0;
};

struct Realization {
    double t_minus = 0.0;
    double t_plus = 0.0;
    std::vector<Event> events;  // times non-decreasing, inside [t_minus, t_plus]
};

// Independent realizations of the process. Events with equal timestamps keep
// their input order; only strictly earlier events count as predecessors.
struct EventHistory {
    std::vector<Realization> realizations;

    std::size_t total_events() const;
    // Largest number of distinct types appearing in a single realization.
    int max_distinct_types(int d) const;
    // Throws std::invalid_argument naming the offending realization/event.
    void validate(int d) const;
};

// ---------------------------------------------------------------------------
// Hyperparams
// ---------------------------------------------------------------------------

struct Hyperparams {
    int K = 6;                  // number of exponential kernel terms
    int r = 2;                  // rank of the type-to-group projection
    double gamma = 1.0;         // baseline basis decay (terms k*gamma, k=0..K)
    double delta = 1.0;         // triggering basis decay (terms k*delta, k=1..K)
    double epsilon = 1e-3;      // barrier weight for the coefficient step
    int max_outer_iters = 50;
    int max_newton_iters = 50;
    double rel_tol = 1e-6;
    std::uint64_t seed = 0;
    // One extra solve with epsilon/10 after convergence of the coefficient
    // step; sharpens solutions at some extra cost.
    bool epsilon_decay_pass = false;

    void validate() const;
};

// ---------------------------------------------------------------------------
// LowRankModel
// ---------------------------------------------------------------------------

// Projection matrix P ((d+1) x (r+1)) and coefficient tensor
// alpha ((r+1) x (r+1) x (K+1)) in the augmented layout:
//   - row d of P is the unit vector e_r, column r is zero for u < d;
//   - alpha(r, i, k) holds the baseline coefficients beta_{i,k}, k = 0..K;
//   - column r of alpha is identically zero, and slot k = 0 of every
//     triggering block (j, i < r) is zero (triggering terms start at k = 1).
// The augmented slots make the log-likelihood a single bilinear/linear form
// in P and alpha with no separate baseline terms.
struct LowRankModel {
    int d = 0;
    int r = 0;
    int K = 0;
    std::vector<double> P;      // (d+1) x (r+1), row-major
    std::vector<double> alpha;  // (r+1) x (r+1) x (K+1), k fastest

    static LowRankModel zeros(int d, int r, int K);

    double p(int u, int i) const { return P[static_cast<std::size_t>(u) * (r + 1) + i]; }
    double& p(int u, int i) { return P[static_cast<std::size_t>(u) * (r + 1) + i]; }

    // alpha_{ji,k}: effect of source group j on target group i, term k.
    double a(int j, int i, int k) const {
        return alpha[(static_cast<std::size_t>(j) * (r + 1) + i) * (K + 1) + k];
    }
    double& a(int j, int i, int k) {
        return alpha[(static_cast<std::size_t>(j) * (r + 1) + i) * (K + 1) + k];
    }

    double beta(int i, int k) const { return a(r, i, k); }
    double& beta(int i, int k) { return a(r, i, k); }

    // Re-asserts the fixed augmented rows/columns (call after bulk writes).
    void enforce_augmentation();
    void validate() const;
};

// ---------------------------------------------------------------------------
// FitReport
// ---------------------------------------------------------------------------

enum class FitStep : char { Init = 'i', Alpha = 'a', Projection = 'p' };

struct PhaseTimes {
    double build_tensors_s = 0.0;
    double alpha_s = 0.0;
    double projection_s = 0.0;
    double total_s = 0.0;
};

struct FitReport {
    std::vector<double> loglik_trace;   // one entry per half-step
    std::vector<FitStep> trace_steps;   // parallel to loglik_trace
    PhaseTimes wall_times;
    bool converged = false;
    int outer_iters_used = 0;
    std::vector<std::string> warnings;
};

// ---------------------------------------------------------------------------
// Scalar helpers
// ---------------------------------------------------------------------------

// Integral of exp(-k*x*s) over [0, t]: (1 - exp(-k*x*t)) / (k*x), with the
// analytic limit t at k = 0. Requires x > 0, t >= 0, k >= 0.
double exp_integral(int k, double x, double t);

// Triggering kernel of the fitted model: sum_{k=1..K} alpha_{ji,k} e^{-k delta t}.
double kernel_value(const LowRankModel& model, const Hyperparams& hp, int j, int i, double t);

// Group baseline: sum_{k=0..K} beta_{i,k} e^{-k gamma t}.
double baseline_value(const LowRankModel& model, const Hyperparams& hp, int i, double t);

// Distinguished return value for log-likelihoods of infeasible models (some
// event has non-positive intensity). Callers test with std::isinf.
inline constexpr double kInfeasible = -std::numeric_limits<double>::infinity();

}  // namespace lrhawkes
