#include "lrhawkes/fit.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "lrhawkes/likelihood.hpp"
#include "lrhawkes/optimize_p.hpp"
#include "lrhawkes/rng.hpp"

namespace lrhawkes {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

LowRankModel init_params(int d, const Hyperparams& hp, std::uint64_t seed) {
    hp.validate();
    LowRankModel model = LowRankModel::zeros(d, hp.r, hp.K);
    Rng rng(derive_seed(seed, 0x1417));
    for (int u = 0; u < d; ++u)
        for (int i = 0; i < hp.r; ++i) model.p(u, i) = rng.uniform(0.1, 1.0);
    const double scale = 1.0 / (static_cast<double>(hp.K) * hp.r);
    for (int j = 0; j < hp.r; ++j)
        for (int i = 0; i < hp.r; ++i)
            for (int k = 1; k <= hp.K; ++k) model.a(j, i, k) = scale * rng.uniform(0.1, 1.0);
    for (int i = 0; i < hp.r; ++i)
        for (int k = 0; k <= hp.K; ++k) model.beta(i, k) = scale * rng.uniform(0.1, 1.0);
    model.enforce_augmentation();
    return model;
}

std::pair<LowRankModel, FitReport> fit_with_tensors(const SuffStats& ts, const Hyperparams& hp,
                                                    const LowRankModel* init,
                                                    const FitOptions& opts) {
    hp.validate();
    if (ts.n_events() == 0) throw std::invalid_argument("fit: empty history");
    const auto t_start = std::chrono::steady_clock::now();

    FitReport report;
    LowRankModel model = init ? *init : init_params(ts.d, hp, hp.seed);
    if (model.d != ts.d || model.r != hp.r || model.K != hp.K)
        throw std::invalid_argument("fit: init model does not match dimensions");
    model.validate();

    auto record = [&](double ll, FitStep step) {
        report.loglik_trace.push_back(ll);
        report.trace_steps.push_back(step);
    };

    double ll = log_likelihood_tensor(model, ts, opts.threads);
    record(ll, FitStep::Init);

    AlphaOptions aopts;
    aopts.threads = opts.threads;
    aopts.solver = opts.alpha_solver;

    const int kMaxReinits = 3;
    int reinits = 0;
    double ll_outer_prev = ll;
    for (int outer = 1; outer <= hp.max_outer_iters; ++outer) {
        report.outer_iters_used = outer;

        auto ta = std::chrono::steady_clock::now();
        AlphaResult ar = optimize_alpha(model, ts, hp, aopts);
        report.wall_times.alpha_s += seconds_since(ta);
        for (const auto& w : ar.warnings)
            report.warnings.push_back("outer " + std::to_string(outer) + ": " + w);
        if (!ar.converged)
            report.warnings.push_back("outer " + std::to_string(outer) +
                                      ": coefficient step hit its iteration cap");
        ll = log_likelihood_tensor(model, ts, opts.threads);
        record(ll, FitStep::Alpha);

        auto tp = std::chrono::steady_clock::now();
        QuadForms quad = build_quadforms(model, ts);
        std::vector<double> p = projection_vector(model);
        double f_prev = mm_objective(p, quad, opts.threads);
        std::size_t skipped = 0;
        for (int sweep = 0; sweep < opts.mm_sweeps; ++sweep) {
            std::vector<double> p_next = p;
            MMResult mr = mm_update(p_next, quad, opts.threads);
            skipped += mr.skipped_events;
            const double f_next = mm_objective(p_next, quad, opts.threads);
            // the sweep is monotone whenever the contracted forms are
            // non-negative; guard against the mixed-sign corner and keep the
            // last good iterate otherwise
            if (!(f_next <= f_prev + 1e-9 * std::abs(f_prev))) {
                report.warnings.push_back("outer " + std::to_string(outer) +
                                          ": projection sweep reverted (non-monotone)");
                break;
            }
            p = std::move(p_next);
            f_prev = f_next;
        }
        set_projection(p, model);
        report.wall_times.projection_s += seconds_since(tp);

        ll = log_likelihood_tensor(model, ts, opts.threads);
        record(ll, FitStep::Projection);

        if ((skipped > 0 || std::isinf(ll)) && reinits < kMaxReinits) {
            // some event lost all projected intensity; restart the projection
            ++reinits;
            report.warnings.push_back("outer " + std::to_string(outer) +
                                      ": re-randomized projection (" +
                                      std::to_string(skipped) + " degenerate events)");
            LowRankModel fresh = init_params(ts.d, hp, derive_seed(hp.seed, 977 + reinits));
            for (int u = 0; u < model.d; ++u)
                for (int i = 0; i < model.r; ++i) model.p(u, i) = fresh.p(u, i);
            model.enforce_augmentation();
            ll = log_likelihood_tensor(model, ts, opts.threads);
            ll_outer_prev = ll;
            continue;
        }

        const double improvement = ll - ll_outer_prev;
        if (improvement <= hp.rel_tol * std::abs(ll_outer_prev)) {
            report.converged = true;
            break;
        }
        ll_outer_prev = ll;
    }

    report.wall_times.total_s = seconds_since(t_start);
    return {std::move(model), std::move(report)};
}

std::pair<LowRankModel, FitReport> fit(const EventHistory& history, const Network& net,
                                       const Hyperparams& hp, const LowRankModel* init,
                                       const FitOptions& opts) {
    const auto t0 = std::chrono::steady_clock::now();
    SuffStats ts = build_tensors(history, net, hp, opts.threads);
    const double build_s = seconds_since(t0);
    auto out = fit_with_tensors(ts, hp, init, opts);
    out.second.wall_times.build_tensors_s = build_s;
    out.second.wall_times.total_s += build_s;
    return out;
}

}  // namespace lrhawkes
