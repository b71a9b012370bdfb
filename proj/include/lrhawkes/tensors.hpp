#pragma once

#include <cstdint>
#include <vector>

#include "lrhawkes/types.hpp"

namespace lrhawkes {

// Sparse sufficient statistics of an event history under the exponential
// basis. Two tensors are stored:
//
//   decay: per event (h, m), for each admissible predecessor type v (an
//     earlier type with an edge v -> u_m), the K decayed sums
//     sum_{l : t_l < t_m, u_l = v} exp(-k delta (t_m - t_l)), k = 1..K,
//     plus one baseline row exp(-k gamma (t_m - T-)), k = 0..K.
//
//   integral: per realization h, for each occurred type v the K integrated
//     basis values sum_{m : u_m = v} f_{k delta}(T+ - t_m), plus the window
//     integrals f_{k gamma}(T+ - T-). Adjacency fan-out is applied lazily at
//     accessor/projection time, never stored.
//
// Log-likelihood, its gradients and both alternating updates are linear
// functionals of these arrays, which is what makes the whole pipeline linear
// in the number of events.
struct SuffStats {
    int d = 0;
    int K = 0;
    double gamma = 0.0;
    double delta = 0.0;

    // --- per-event decayed predecessor sums -------------------------------
    struct EventEntry {
        int type;                   // u_m
        std::uint32_t row_begin;    // range into row_type / row_vals
        std::uint32_t row_end;
    };
    std::vector<std::uint32_t> event_begin;  // size H+1; events of h are [event_begin[h], event_begin[h+1])
    std::vector<EventEntry> events;          // flattened over realizations
    std::vector<double> baseline_decay;      // n x (K+1), exp(-k gamma (t_m - T-))
    std::vector<int> row_type;               // predecessor type per stored row
    std::vector<double> row_vals;            // per row: K+1 values, slot 0 is 0

    // --- per-realization integrated basis ---------------------------------
    std::vector<std::uint32_t> integ_begin;  // size H+1
    std::vector<int> integ_type;
    std::vector<double> integ_vals;          // per row: K+1 values, slot 0 is 0
    std::vector<double> window_integral;     // H x (K+1), f_{k gamma}(T+ - T-)

    // --- aggregates over realizations (used by compensator-side math) -----
    std::vector<double> agg_integ;           // d x (K+1): sum_h of integ rows
    std::vector<double> agg_window;          // (K+1): sum_h window_integral

    // Adjacency of the network the statistics were built against, kept here
    // so every consumer applies the same fan-out mask.
    std::vector<std::vector<int>> out_of;    // sorted ascending
    std::vector<std::vector<int>> in_of;

    bool edge(int v, int u) const;

    int n_realizations() const { return static_cast<int>(event_begin.size()) - 1; }
    std::size_t n_events() const { return events.size(); }

    const double* event_baseline(std::size_t e) const { return &baseline_decay[e * (K + 1)]; }
    const double* row(std::uint32_t ridx) const { return &row_vals[static_cast<std::size_t>(ridx) * (K + 1)]; }
    const double* integ_row(std::uint32_t ridx) const { return &integ_vals[static_cast<std::size_t>(ridx) * (K + 1)]; }

    std::size_t nnz_decay() const;
    std::size_t nnz_integral() const;

    // Dense accessors matching the tensor definitions; v == d addresses the
    // artificial baseline slot. Slow (linear row scan), intended for tests
    // and debug dumps.
    double decay_at(int h, int m, int u, int v, int k) const;
    double integral_at(int h, int u, int v, int k) const;
};

// Single streaming pass per realization using the memoryless recurrence;
// O(n K sigma) time, output size O(n K min(Delta, sigma)).
SuffStats build_tensors(const EventHistory& history, const Network& net, const Hyperparams& hp,
                        int threads = 1);

// Direct double-loop evaluation of the same definitions, O(sum n_h^2 K)
// time. Test oracle for build_tensors; intended for small instances.
SuffStats build_tensors_bruteforce(const EventHistory& history, const Network& net,
                                   const Hyperparams& hp);

}  // namespace lrhawkes
