#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "lrhawkes/types.hpp"

namespace lrhawkes {

// ---------------------------------------------------------------------------
// Two-group synthetic ground truth
// ---------------------------------------------------------------------------

// Parameters of the synthetic generator: a random directed graph, a random
// assignment of types to r_true groups, constant group baselines, and damped
// oscillating group kernels
//   g(src,dst,t) = nu * (sin(2 pi t / omega + (pi/2) ((src+dst) mod 2)) + 2) / (3 (t+1)^2).
struct SyntheticConfig {
    int d = 0;
    double erdos_p = 0.1;
    int r_true = 2;
    std::vector<double> omega;    // r x r, row-major [src * r + dst], in [1, 10]
    std::vector<double> nu;       // r x r, in [0, 1/50]
    std::vector<double> mu_true;  // r, in [0, 0.01]
    std::vector<int> group_of;    // d
    std::uint64_t seed = 0;

    void validate() const;
};

// Erdos-Renyi directed graph (each off-diagonal edge with probability
// erdos_p, diagonal per self_loops), uniform two-group assignment, and
// uniformly drawn kernel parameters. Deterministic given seed.
std::pair<SyntheticConfig, Network> generate_synthetic_config(int d, double erdos_p,
                                                              std::uint64_t seed,
                                                              bool self_loops = true,
                                                              int r_true = 2);

// Exact group kernel of the synthetic truth (not its exponential
// approximation); src/dst are 0-based group labels.
double true_kernel(const SyntheticConfig& cfg, int src, int dst, double t);

// ---------------------------------------------------------------------------
// Group-level dynamics fed to the thinning sampler
// ---------------------------------------------------------------------------

// The sampler needs the exact rates plus non-increasing majorants; the
// majorants make the piecewise-constant dominating rate valid between events
// even for oscillating kernels.
class GroupDynamics {
public:
    virtual ~GroupDynamics() = default;
    virtual int rank() const = 0;
    virtual double baseline(int i, double elapsed) const = 0;
    virtual double excitation(int src, int dst, double lag) const = 0;
    virtual double baseline_bound(int i, double elapsed) const = 0;
    virtual double excitation_bound(int src, int dst, double lag) const = 0;
};

class SyntheticDynamics final : public GroupDynamics {
public:
    explicit SyntheticDynamics(const SyntheticConfig& cfg) : cfg_(cfg) {}
    int rank() const override { return cfg_.r_true; }
    double baseline(int i, double) const override { return cfg_.mu_true[i]; }
    double excitation(int src, int dst, double lag) const override {
        return true_kernel(cfg_, src, dst, lag);
    }
    double baseline_bound(int i, double) const override { return cfg_.mu_true[i]; }
    // (sin + 2)/3 <= 1, so nu/(t+1)^2 dominates and is non-increasing
    double excitation_bound(int src, int dst, double lag) const override {
        const double q = 1.0 + lag;
        return cfg_.nu[static_cast<std::size_t>(src) * cfg_.r_true + dst] / (q * q);
    }

private:
    SyntheticConfig cfg_;
};

// Dynamics of a fitted model; values are clamped at zero (coefficients may be
// mixed-sign) and the majorants keep only the positive terms.
class ModelDynamics final : public GroupDynamics {
public:
    ModelDynamics(const LowRankModel& model, const Hyperparams& hp);
    int rank() const override { return model_.r; }
    double baseline(int i, double elapsed) const override;
    double excitation(int src, int dst, double lag) const override;
    double baseline_bound(int i, double elapsed) const override;
    double excitation_bound(int src, int dst, double lag) const override;

private:
    LowRankModel model_;
    Hyperparams hp_;
    LowRankModel positive_;  // same shape, negative coefficients dropped
};

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

struct SimulateOptions {
    std::size_t max_events_per_realization = 1000000;  // explosion guard
    int threads = 1;
};

struct SimulationExplosion : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Ogata thinning with a piecewise-constant dominating rate recomputed after
// every candidate from the majorant dynamics. `projection` is the free d x r
// block mapping types to groups (indicator matrix for the synthetic truth).
// Realization h uses the stream seed derive_seed(seed, h), so results do not
// depend on scheduling.
EventHistory simulate(const GroupDynamics& dyn, const std::vector<double>& projection,
                      const Network& net, double t_minus, double t_plus, int n_realizations,
                      std::uint64_t seed, const SimulateOptions& opts = {});

// Indicator projection of the synthetic group assignment.
std::vector<double> indicator_projection(const SyntheticConfig& cfg);

EventHistory simulate_synthetic(const SyntheticConfig& cfg, const Network& net, double t_minus,
                                double t_plus, int n_realizations, std::uint64_t seed,
                                const SimulateOptions& opts = {});

EventHistory simulate_model(const LowRankModel& model, const Hyperparams& hp, const Network& net,
                            double t_minus, double t_plus, int n_realizations, std::uint64_t seed,
                            const SimulateOptions& opts = {});

}  // namespace lrhawkes
