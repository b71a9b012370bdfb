#pragma once

#include <vector>

#include "lrhawkes/tensors.hpp"
#include "lrhawkes/types.hpp"

namespace lrhawkes {

// Occurrence rates of all d types at time t inside realization h; only events
// strictly before t contribute. Throws std::out_of_range when t lies outside
// the realization's window.
std::vector<double> intensity(const LowRankModel& model, const Hyperparams& hp,
                              const EventHistory& history, const Network& net, int h, double t);

// Log-likelihood through the sparse statistics; O(nnz * r^2). Returns
// kInfeasible when any event's intensity is non-positive.
double log_likelihood_tensor(const LowRankModel& model, const SuffStats& ts, int threads = 1);

// Same value by direct summation over the raw history with closed-form
// compensator integrals. Quadratic in events per realization; the oracle the
// tensor path is checked against.
double log_likelihood_direct(const LowRankModel& model, const Hyperparams& hp,
                             const EventHistory& history, const Network& net);

// Compensator part alone (the subtracted integral term), tensor route.
double compensator_tensor(const LowRankModel& model, const SuffStats& ts);

}  // namespace lrhawkes
