#include "lrhawkes/likelihood.hpp"

#include <cmath>
#include <stdexcept>

#include "lrhawkes/parallel.hpp"

namespace lrhawkes {

std::vector<double> intensity(const LowRankModel& model, const Hyperparams& hp,
                              const EventHistory& history, const Network& net, int h, double t) {
    if (h < 0 || h >= static_cast<int>(history.realizations.size()))
        throw std::out_of_range("intensity: realization index");
    const Realization& re = history.realizations[h];
    if (t < re.t_minus || t > re.t_plus)
        throw std::out_of_range("intensity: t outside the observation window");
    const int d = model.d;
    const int r = model.r;

    std::vector<double> mu(r);
    for (int i = 0; i < r; ++i) mu[i] = baseline_value(model, hp, i, t - re.t_minus);

    // group-level drive accumulated per (source type suppressed, target group)
    std::vector<double> lam(d, 0.0);
    for (int u = 0; u < d; ++u) {
        double acc = 0.0;
        for (int i = 0; i < r; ++i) acc += model.p(u, i) * mu[i];
        lam[u] = acc;
    }
    std::vector<double> g(static_cast<std::size_t>(r), 0.0);
    for (const Event& ev : re.events) {
        if (!(ev.time < t)) break;  // times are non-decreasing
        for (int i = 0; i < r; ++i) {
            double gi = 0.0;
            for (int j = 0; j < r; ++j)
                gi += model.p(ev.type, j) * kernel_value(model, hp, j, i, t - ev.time);
            g[i] = gi;
        }
        for (int u : net.out_of[ev.type]) {
            double add = 0.0;
            for (int i = 0; i < r; ++i) add += model.p(u, i) * g[i];
            lam[u] += add;
        }
    }
    return lam;
}

namespace {

// Event-side intensity from the stored statistics:
//   s_e = sum_i P[u_e,i] * ( sum_{rows v} sum_{j,k} P[v,j] a(j,i,k) row[k]
//                            + sum_k beta(i,k) * baseline_decay[k] ).
double event_intensity(const LowRankModel& model, const SuffStats& ts, std::size_t e) {
    const int r = model.r;
    const int K = model.K;
    const auto& entry = ts.events[e];
    const double* dvec = ts.event_baseline(e);

    double s = 0.0;
    for (int i = 0; i < r; ++i) {
        const double pui = model.p(entry.type, i);
        if (pui == 0.0) continue;
        double inner = 0.0;
        for (int k = 0; k <= K; ++k) inner += model.beta(i, k) * dvec[k];
        for (std::uint32_t ridx = entry.row_begin; ridx < entry.row_end; ++ridx) {
            const int v = ts.row_type[ridx];
            const double* row = ts.row(ridx);
            for (int j = 0; j < r; ++j) {
                const double pvj = model.p(v, j);
                if (pvj == 0.0) continue;
                double dot = 0.0;
                for (int k = 1; k <= K; ++k) dot += model.a(j, i, k) * row[k];
                inner += pvj * dot;
            }
        }
        s += pui * inner;
    }
    return s;
}

}  // namespace

double compensator_tensor(const LowRankModel& model, const SuffStats& ts) {
    const int d = model.d;
    const int r = model.r;
    const int K = model.K;
    const int stride = K + 1;

    // baseline part: (sum_u P_ui) * sum_k beta_ik * window integrals
    double comp = 0.0;
    std::vector<double> colsum(r, 0.0);
    for (int u = 0; u < d; ++u)
        for (int i = 0; i < r; ++i) colsum[i] += model.p(u, i);
    for (int i = 0; i < r; ++i) {
        double dot = 0.0;
        for (int k = 0; k <= K; ++k) dot += model.beta(i, k) * ts.agg_window[k];
        comp += colsum[i] * dot;
    }

    // triggering part: sum_v sum_i S_i(v) sum_j P_vj sum_k a(j,i,k) W[v,k],
    // S_i(v) = sum over out-neighbors u of P_ui
    for (int v = 0; v < d; ++v) {
        const double* w = &ts.agg_integ[static_cast<std::size_t>(v) * stride];
        bool any = false;
        for (int k = 1; k <= K && !any; ++k) any = w[k] != 0.0;
        if (!any || ts.out_of[v].empty()) continue;
        for (int i = 0; i < r; ++i) {
            double s_vi = 0.0;
            for (int u : ts.out_of[v]) s_vi += model.p(u, i);
            double inner = 0.0;
            for (int j = 0; j < r; ++j) {
                const double pvj = model.p(v, j);
                if (pvj == 0.0) continue;
                double dot = 0.0;
                for (int k = 1; k <= K; ++k) dot += model.a(j, i, k) * w[k];
                inner += pvj * dot;
            }
            comp += s_vi * inner;
        }
    }
    return comp;
}

double log_likelihood_tensor(const LowRankModel& model, const SuffStats& ts, int threads) {
    const std::size_t n = ts.n_events();
    const std::size_t nchunks = chunk_count(n);
    std::vector<double> partial(nchunks, 0.0);
    std::vector<char> feasible(nchunks, 1);
    parallel_chunks(n, threads, [&](std::size_t c, std::size_t begin, std::size_t end) {
        double acc = 0.0;
        for (std::size_t e = begin; e < end; ++e) {
            const double s = event_intensity(model, ts, e);
            if (!(s > 0.0)) {
                feasible[c] = 0;
                return;
            }
            acc += std::log(s);
        }
        partial[c] = acc;
    });
    double loglik = 0.0;
    for (std::size_t c = 0; c < nchunks; ++c) {
        if (!feasible[c]) return kInfeasible;
        loglik += partial[c];
    }
    return loglik - compensator_tensor(model, ts);
}

double log_likelihood_direct(const LowRankModel& model, const Hyperparams& hp,
                             const EventHistory& history, const Network& net) {
    const int r = model.r;
    const int K = model.K;
    double loglik = 0.0;

    for (const Realization& re : history.realizations) {
        const double span = re.t_plus - re.t_minus;
        for (std::size_t m = 0; m < re.events.size(); ++m) {
            const Event& ev = re.events[m];
            double lam = 0.0;
            for (int i = 0; i < r; ++i)
                lam += model.p(ev.type, i) * baseline_value(model, hp, i, ev.time - re.t_minus);
            for (std::size_t l = 0; l < m; ++l) {
                const Event& pred = re.events[l];
                if (!(pred.time < ev.time)) continue;
                if (!net.edge(pred.type, ev.type)) continue;
                for (int i = 0; i < r; ++i) {
                    double gi = 0.0;
                    for (int j = 0; j < r; ++j)
                        gi += model.p(pred.type, j) *
                              kernel_value(model, hp, j, i, ev.time - pred.time);
                    lam += model.p(ev.type, i) * gi;
                }
            }
            if (!(lam > 0.0)) return kInfeasible;
            loglik += std::log(lam);
        }

        // baseline compensator
        for (int u = 0; u < net.d; ++u)
            for (int i = 0; i < r; ++i) {
                double integ = model.beta(i, 0) * span;
                for (int k = 1; k <= K; ++k)
                    integ += model.beta(i, k) * exp_integral(k, hp.gamma, span);
                loglik -= model.p(u, i) * integ;
            }
        // triggering compensator: every event contributes its integrated
        // kernels towards each out-neighbor
        for (const Event& ev : re.events) {
            const double tail = re.t_plus - ev.time;
            for (int u : net.out_of[ev.type]) {
                for (int i = 0; i < r; ++i) {
                    double gi = 0.0;
                    for (int j = 0; j < r; ++j) {
                        double integ = 0.0;
                        for (int k = 1; k <= K; ++k)
                            integ += model.a(j, i, k) * exp_integral(k, hp.delta, tail);
                        gi += model.p(ev.type, j) * integ;
                    }
                    loglik -= model.p(u, i) * gi;
                }
            }
        }
    }
    return loglik;
}

}  // namespace lrhawkes
