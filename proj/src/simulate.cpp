#include "lrhawkes/simulate.hpp"

#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

#include "lrhawkes/parallel.hpp"
#include "lrhawkes/rng.hpp"

namespace lrhawkes {

void SyntheticConfig::validate() const {
    if (d < 2) throw std::invalid_argument("synthetic config: d must be >= 2");
    if (r_true < 1) throw std::invalid_argument("synthetic config: r_true must be >= 1");
    const std::size_t rr = static_cast<std::size_t>(r_true) * r_true;
    if (omega.size() != rr || nu.size() != rr ||
        mu_true.size() != static_cast<std::size_t>(r_true) ||
        group_of.size() != static_cast<std::size_t>(d))
        throw std::invalid_argument("synthetic config: field sizes do not match d/r_true");
    for (double w : omega)
        if (!(w >= 1.0 && w <= 10.0))
            throw std::invalid_argument("synthetic config: omega outside [1,10]");
    for (double v : nu)
        if (!(v >= 0.0 && v <= 0.02))
            throw std::invalid_argument("synthetic config: nu outside [0,1/50]");
    for (double m : mu_true)
        if (!(m >= 0.0 && m <= 0.01))
            throw std::invalid_argument("synthetic config: mu outside [0,0.01]");
    for (int g : group_of)
        if (g < 0 || g >= r_true)
            throw std::invalid_argument("synthetic config: group label out of range");
}

std::pair<SyntheticConfig, Network> generate_synthetic_config(int d, double erdos_p,
                                                              std::uint64_t seed, bool self_loops,
                                                              int r_true) {
    if (d < 2) throw std::invalid_argument("generate_synthetic_config: d must be >= 2");
    if (!(erdos_p >= 0.0 && erdos_p <= 1.0))
        throw std::invalid_argument("generate_synthetic_config: p must lie in [0,1]");

    Rng rng(derive_seed(seed, 0x5e7));
    std::vector<std::uint8_t> adj(static_cast<std::size_t>(d) * d, 0);
    for (int v = 0; v < d; ++v)
        for (int u = 0; u < d; ++u) {
            if (v == u)
                adj[static_cast<std::size_t>(v) * d + u] = self_loops ? 1 : 0;
            else
                adj[static_cast<std::size_t>(v) * d + u] = rng.bernoulli(erdos_p) ? 1 : 0;
        }

    SyntheticConfig cfg;
    cfg.d = d;
    cfg.erdos_p = erdos_p;
    cfg.r_true = r_true;
    cfg.seed = seed;
    cfg.group_of.resize(d);
    for (int u = 0; u < d; ++u) cfg.group_of[u] = static_cast<int>(rng.below(r_true));
    const std::size_t rr = static_cast<std::size_t>(r_true) * r_true;
    cfg.omega.resize(rr);
    cfg.nu.resize(rr);
    cfg.mu_true.resize(r_true);
    for (auto& w : cfg.omega) w = rng.uniform(1.0, 10.0);
    for (auto& v : cfg.nu) v = rng.uniform(0.0, 1.0 / 50.0);
    for (auto& m : cfg.mu_true) m = rng.uniform(0.0, 0.01);
    return {std::move(cfg), Network::from_adjacency(d, std::move(adj))};
}

double true_kernel(const SyntheticConfig& cfg, int src, int dst, double t) {
    if (src < 0 || src >= cfg.r_true || dst < 0 || dst >= cfg.r_true)
        throw std::out_of_range("true_kernel: group index");
    const std::size_t idx = static_cast<std::size_t>(src) * cfg.r_true + dst;
    const double phase = ((src + dst) % 2) ? std::numbers::pi / 2.0 : 0.0;
    const double q = 1.0 + t;
    return cfg.nu[idx] * (std::sin(2.0 * std::numbers::pi * t / cfg.omega[idx] + phase) + 2.0) /
           (3.0 * q * q);
}

// ---------------------------------------------------------------------------
// ModelDynamics
// ---------------------------------------------------------------------------

ModelDynamics::ModelDynamics(const LowRankModel& model, const Hyperparams& hp)
    : model_(model), hp_(hp), positive_(model) {
    for (double& a : positive_.alpha)
        if (a < 0.0) a = 0.0;
}

double ModelDynamics::baseline(int i, double elapsed) const {
    return std::max(0.0, baseline_value(model_, hp_, i, elapsed));
}

double ModelDynamics::excitation(int src, int dst, double lag) const {
    return std::max(0.0, kernel_value(model_, hp_, src, dst, lag));
}

double ModelDynamics::baseline_bound(int i, double elapsed) const {
    return baseline_value(positive_, hp_, i, elapsed);
}

double ModelDynamics::excitation_bound(int src, int dst, double lag) const {
    return kernel_value(positive_, hp_, src, dst, lag);
}

// ---------------------------------------------------------------------------
// Thinning
// ---------------------------------------------------------------------------

namespace {

// lam[u] = sum_i P_ui f_base(i) + sum_past sum_ij P_ui P[src,j] A(src,u) f_exc(j,i,lag)
template <class Base, class Exc>
double accumulate_rates(const std::vector<double>& P, int d, int r, const Network& net,
                        const std::vector<Event>& past, double t, double t_minus, Base&& base,
                        Exc&& exc, std::vector<double>& lam) {
    std::vector<double> mu(r);
    for (int i = 0; i < r; ++i) mu[i] = base(i, t - t_minus);
    for (int u = 0; u < d; ++u) {
        double acc = 0.0;
        for (int i = 0; i < r; ++i) acc += P[static_cast<std::size_t>(u) * r + i] * mu[i];
        lam[u] = acc;
    }
    std::vector<double> g(r);
    for (const Event& ev : past) {
        const double lag = t - ev.time;
        for (int i = 0; i < r; ++i) {
            double gi = 0.0;
            for (int j = 0; j < r; ++j)
                gi += P[static_cast<std::size_t>(ev.type) * r + j] * exc(j, i, lag);
            g[i] = gi;
        }
        for (int u : net.out_of[ev.type]) {
            double add = 0.0;
            for (int i = 0; i < r; ++i) add += P[static_cast<std::size_t>(u) * r + i] * g[i];
            lam[u] += add;
        }
    }
    double total = 0.0;
    for (int u = 0; u < d; ++u) total += lam[u];
    return total;
}

Realization simulate_one(const GroupDynamics& dyn, const std::vector<double>& P,
                         const Network& net, double t_minus, double t_plus, Rng& rng,
                         std::size_t cap) {
    const int d = net.d;
    const int r = dyn.rank();
    Realization re;
    re.t_minus = t_minus;
    re.t_plus = t_plus;

    std::vector<double> lam(d), bound(d);
    auto base = [&](int i, double s) { return dyn.baseline(i, s); };
    auto exc = [&](int j, int i, double s) { return dyn.excitation(j, i, s); };
    auto base_b = [&](int i, double s) { return dyn.baseline_bound(i, s); };
    auto exc_b = [&](int j, int i, double s) { return dyn.excitation_bound(j, i, s); };

    double t = t_minus;
    double lam_bar =
        accumulate_rates(P, d, r, net, re.events, t, t_minus, base_b, exc_b, bound);
    while (true) {
        if (!(lam_bar > 0.0)) break;
        t += rng.exponential(lam_bar);
        if (t >= t_plus) break;
        const double total =
            accumulate_rates(P, d, r, net, re.events, t, t_minus, base, exc, lam);
        if (total > lam_bar * (1.0 + 1e-9))
            throw std::logic_error("simulate: dominating rate violated");
        if (rng.uniform() * lam_bar < total) {
            // accept; draw the type proportionally to lam
            double pick = rng.uniform() * total;
            int u = d - 1;
            double cum = 0.0;
            for (int w = 0; w < d; ++w) {
                cum += lam[w];
                if (pick < cum) {
                    u = w;
                    break;
                }
            }
            re.events.push_back({t, u});
            if (re.events.size() > cap)
                throw SimulationExplosion("simulate: realization exceeded " +
                                          std::to_string(cap) + " events");
        }
        // bounds are non-increasing between events, so refreshing at the
        // current time keeps domination valid either way
        lam_bar = accumulate_rates(P, d, r, net, re.events, t, t_minus, base_b, exc_b, bound);
    }
    return re;
}

}  // namespace

EventHistory simulate(const GroupDynamics& dyn, const std::vector<double>& projection,
                      const Network& net, double t_minus, double t_plus, int n_realizations,
                      std::uint64_t seed, const SimulateOptions& opts) {
    if (n_realizations < 0) throw std::invalid_argument("simulate: negative realization count");
    if (!(t_plus >= t_minus)) throw std::invalid_argument("simulate: empty observation window");
    if (projection.size() != static_cast<std::size_t>(net.d) * dyn.rank())
        throw std::invalid_argument("simulate: projection size must be d*r");
    for (double p : projection)
        if (!(p >= 0.0)) throw std::invalid_argument("simulate: projection must be non-negative");

    EventHistory out;
    out.realizations.resize(n_realizations);
    std::mutex failure_mu;
    std::exception_ptr failure;
    parallel_chunks(static_cast<std::size_t>(n_realizations), opts.threads,
                    [&](std::size_t, std::size_t begin, std::size_t end) {
                        for (std::size_t h = begin; h < end; ++h) {
                            try {
                                Rng rng(derive_seed(seed, h));
                                out.realizations[h] = simulate_one(
                                    dyn, projection, net, t_minus, t_plus, rng,
                                    opts.max_events_per_realization);
                            } catch (...) {
                                std::lock_guard<std::mutex> lock(failure_mu);
                                if (!failure) failure = std::current_exception();
                                return;
                            }
                        }
                    },
                    /*chunk=*/16);
    if (failure) std::rethrow_exception(failure);
    return out;
}

std::vector<double> indicator_projection(const SyntheticConfig& cfg) {
    std::vector<double> P(static_cast<std::size_t>(cfg.d) * cfg.r_true, 0.0);
    for (int u = 0; u < cfg.d; ++u)
        P[static_cast<std::size_t>(u) * cfg.r_true + cfg.group_of[u]] = 1.0;
    return P;
}

EventHistory simulate_synthetic(const SyntheticConfig& cfg, const Network& net, double t_minus,
                                double t_plus, int n_realizations, std::uint64_t seed,
                                const SimulateOptions& opts) {
    cfg.validate();
    SyntheticDynamics dyn(cfg);
    return simulate(dyn, indicator_projection(cfg), net, t_minus, t_plus, n_realizations, seed,
                    opts);
}

EventHistory simulate_model(const LowRankModel& model, const Hyperparams& hp, const Network& net,
                            double t_minus, double t_plus, int n_realizations, std::uint64_t seed,
                            const SimulateOptions& opts) {
    ModelDynamics dyn(model, hp);
    std::vector<double> P(static_cast<std::size_t>(model.d) * model.r);
    for (int u = 0; u < model.d; ++u)
        for (int i = 0; i < model.r; ++i)
            P[static_cast<std::size_t>(u) * model.r + i] = model.p(u, i);
    return simulate(dyn, P, net, t_minus, t_plus, n_realizations, seed, opts);
}

}  // namespace lrhawkes
