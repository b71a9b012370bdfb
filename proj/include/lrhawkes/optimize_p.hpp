#pragma once

#include <cstddef>
#include <vector>

#include "lrhawkes/tensors.hpp"
#include "lrhawkes/types.hpp"

namespace lrhawkes {

// Quadratic forms of the projection step. With p the linearized augmented
// projection ((d+1) x (r+1), row-major), the log-likelihood reads
//   LL(p) = sum_events ln(p^T Xi_e p) - p^T Psi p,
// where Xi_e and Psi contract the coefficient tensor with the decay and
// integral statistics. Both are represented implicitly: Xi_e through the
// event's stored rows, Psi through the aggregated integrals, with entry
// accessors for small dense checks.
struct QuadForms {
    int d = 0, r = 0, K = 0;
    const SuffStats* ts = nullptr;
    std::vector<double> alpha;  // (r+1) x (r+1) x (K+1) copy, augmented layout

    double a(int j, int i, int k) const {
        return alpha[(static_cast<std::size_t>(j) * (r + 1) + i) * (K + 1) + k];
    }

    // Xi^{(h,m)}_{(u,i),(v,j)}; u, v in 0..d (d = baseline slot), i, j in 0..r.
    double xi(int h, int m, int u, int i, int v, int j) const;
    // Psi_{(u,i),(v,j)}, summed over realizations.
    double psi(int u, int i, int v, int j) const;
};

QuadForms build_quadforms(const LowRankModel& model, const SuffStats& ts);

struct MMResult {
    std::size_t skipped_events = 0;  // p^T Xi p underflowed; excluded from the sweep
    std::size_t frozen_coords = 0;   // compensator product at/below floor; left unchanged
};

// One multiplicative sweep
//   p_ui <- p_ui * sqrt( sum_e (Xi_e p)_ui / (p^T Xi_e p) / (Psi p)_ui )
// over the free coordinates (u < d, i < r); augmented coordinates stay fixed.
// Non-decreasing log-likelihood whenever the contracted forms are
// entrywise non-negative.
MMResult mm_update(std::vector<double>& p, const QuadForms& quad, int threads = 1);

// Negated log-likelihood f(p) = -sum ln(p^T Xi p) + p^T Psi p; +infinity when
// some event form is non-positive.
double mm_objective(const std::vector<double>& p, const QuadForms& quad, int threads = 1);

// Auxiliary upper bound g(p, q) with g(q, q) = f(q) and g(p, q) >= f(p);
// exists for the property tests of the sweep. Both vectors must be strictly
// positive on free coordinates and carry the exact augmentation pattern.
double auxiliary_value(const std::vector<double>& p, const std::vector<double>& q,
                       const QuadForms& quad, int threads = 1);

std::vector<double> projection_vector(const LowRankModel& model);
void set_projection(const std::vector<double>& p, LowRankModel& model);

}  // namespace lrhawkes
