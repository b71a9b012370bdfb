#include "lrhawkes/types.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace lrhawkes {

Network Network::complete(int d, bool self_loops) {
    std::vector<std::uint8_t> adj(static_cast<std::size_t>(d) * d, 1);
    if (!self_loops) {
        for (int v = 0; v < d; ++v) adj[static_cast<std::size_t>(v) * d + v] = 0;
    }
    return from_adjacency(d, std::move(adj));
}

Network Network::from_adjacency(int d, std::vector<std::uint8_t> adj) {
    if (d <= 0) throw std::invalid_argument("network: d must be positive");
    if (adj.size() != static_cast<std::size_t>(d) * d)
        throw std::invalid_argument("network: adjacency size does not match d");
    Network net;
    net.d = d;
    net.adj = std::move(adj);
    net.out_of.assign(d, {});
    net.in_of.assign(d, {});
    for (int v = 0; v < d; ++v) {
        for (int u = 0; u < d; ++u) {
            const std::uint8_t a = net.adj[static_cast<std::size_t>(v) * d + u];
            if (a != 0 && a != 1)
                throw std::invalid_argument("network: adjacency entries must be 0 or 1");
            if (a) {
                net.out_of[v].push_back(u);
                net.in_of[u].push_back(v);
            }
        }
    }
    for (int v = 0; v < d; ++v) {
        net.max_out_degree = std::max(net.max_out_degree, static_cast<int>(net.out_of[v].size()));
        net.max_in_degree = std::max(net.max_in_degree, static_cast<int>(net.in_of[v].size()));
    }
    return net;
}

std::size_t EventHistory::total_events() const {
    std::size_t n = 0;
    for (const auto& re : realizations) n += re.events.size();
    return n;
}

int EventHistory::max_distinct_types(int d) const {
    int sigma = 0;
    std::vector<char> seen(d, 0);
    for (const auto& re : realizations) {
        int cnt = 0;
        for (const auto& ev : re.events) {
            if (!seen[ev.type]) {
                seen[ev.type] = 1;
                ++cnt;
            }
        }
        sigma = std::max(sigma, cnt);
        for (const auto& ev : re.events) seen[ev.type] = 0;
    }
    return sigma;
}

void EventHistory::validate(int d) const {
    for (std::size_t h = 0; h < realizations.size(); ++h) {
        const auto& re = realizations[h];
        if (!(re.t_minus <= re.t_plus))
            throw std::invalid_argument("realization " + std::to_string(h) +
                                        ": window end precedes start");
        double prev = re.t_minus;
        for (std::size_t m = 0; m < re.events.size(); ++m) {
            const Event& ev = re.events[m];
            if (ev.type < 0 || ev.type >= d)
                throw std::invalid_argument("realization " + std::to_string(h) + ", event " +
                                            std::to_string(m) + ": type out of range");
            if (ev.time < prev)
                throw std::invalid_argument("realization " + std::to_string(h) + ", event " +
                                            std::to_string(m) +
                                            ": times must be non-decreasing and inside the window");
            if (ev.time > re.t_plus)
                throw std::invalid_argument("realization " + std::to_string(h) + ", event " +
                                            std::to_string(m) + ": time after window end");
            prev = ev.time;
        }
    }
}

void Hyperparams::validate() const {
    if (K < 1) throw std::invalid_argument("hyperparams: K must be >= 1");
    if (r < 1) throw std::invalid_argument("hyperparams: r must be >= 1");
    if (!(gamma > 0)) throw std::invalid_argument("hyperparams: gamma must be positive");
    if (!(delta > 0)) throw std::invalid_argument("hyperparams: delta must be positive");
    if (!(epsilon >= 0)) throw std::invalid_argument("hyperparams: epsilon must be non-negative");
    if (!(rel_tol > 0)) throw std::invalid_argument("hyperparams: rel_tol must be positive");
}

LowRankModel LowRankModel::zeros(int d, int r, int K) {
    LowRankModel m;
    m.d = d;
    m.r = r;
    m.K = K;
    m.P.assign(static_cast<std::size_t>(d + 1) * (r + 1), 0.0);
    m.alpha.assign(static_cast<std::size_t>(r + 1) * (r + 1) * (K + 1), 0.0);
    m.enforce_augmentation();
    return m;
}

void LowRankModel::enforce_augmentation() {
    for (int i = 0; i <= r; ++i) p(d, i) = (i == r) ? 1.0 : 0.0;
    for (int u = 0; u < d; ++u) p(u, r) = 0.0;
    for (int j = 0; j <= r; ++j)
        for (int k = 0; k <= K; ++k) a(j, r, k) = 0.0;
    for (int j = 0; j < r; ++j)
        for (int i = 0; i < r; ++i) a(j, i, 0) = 0.0;
}

void LowRankModel::validate() const {
    if (P.size() != static_cast<std::size_t>(d + 1) * (r + 1) ||
        alpha.size() != static_cast<std::size_t>(r + 1) * (r + 1) * (K + 1))
        throw std::invalid_argument("model: storage does not match dimensions");
    for (double v : P)
        if (!(v >= 0.0)) throw std::invalid_argument("model: projection entries must be >= 0");
    for (int i = 0; i <= r; ++i)
        if (p(d, i) != (i == r ? 1.0 : 0.0))
            throw std::invalid_argument("model: augmented projection row is fixed");
    for (int u = 0; u < d; ++u)
        if (p(u, r) != 0.0)
            throw std::invalid_argument("model: augmented projection column must be zero");
    for (int j = 0; j <= r; ++j)
        for (int k = 0; k <= K; ++k)
            if (a(j, r, k) != 0.0)
                throw std::invalid_argument("model: augmented coefficient column must be zero");
}

double exp_integral(int k, double x, double t) {
    if (k < 0) throw std::invalid_argument("exp_integral: k must be >= 0");
    if (!(x > 0)) throw std::invalid_argument("exp_integral: rate must be positive");
    if (!(t >= 0)) throw std::invalid_argument("exp_integral: t must be >= 0");
    if (k == 0) return t;
    const double a = k * x * t;
    // -expm1(-a)/a is accurate down to a -> 0 where the value tends to 1
    if (a == 0.0) return 0.0;
    return t * (-std::expm1(-a) / a);
}

double kernel_value(const LowRankModel& model, const Hyperparams& hp, int j, int i, double t) {
    if (j < 0 || j >= model.r || i < 0 || i >= model.r)
        throw std::out_of_range("kernel_value: group index out of range");
    if (!(t >= 0)) throw std::invalid_argument("kernel_value: t must be >= 0");
    const double decay = std::exp(-hp.delta * t);
    double pw = 1.0, out = 0.0;
    for (int k = 1; k <= model.K; ++k) {
        pw *= decay;
        out += model.a(j, i, k) * pw;
    }
    return out;
}

double baseline_value(const LowRankModel& model, const Hyperparams& hp, int i, double t) {
    if (i < 0 || i >= model.r) throw std::out_of_range("baseline_value: group index out of range");
    if (!(t >= 0)) throw std::invalid_argument("baseline_value: t must be >= 0");
    const double decay = std::exp(-hp.gamma * t);
    double pw = 1.0, out = model.beta(i, 0);
    for (int k = 1; k <= model.K; ++k) {
        pw *= decay;
        out += model.beta(i, k) * pw;
    }
    return out;
}

}  // namespace lrhawkes
