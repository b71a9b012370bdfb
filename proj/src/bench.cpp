#include "lrhawkes/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>

#include "lrhawkes/eval.hpp"
#include "lrhawkes/io.hpp"
#include "lrhawkes/likelihood.hpp"
#include "lrhawkes/optimize_alpha.hpp"
#include "lrhawkes/optimize_p.hpp"
#include "lrhawkes/rng.hpp"

namespace lrhawkes {

namespace {

using clock_type = std::chrono::steady_clock;

double time_call(const std::function<void()>& fn) {
    const auto t0 = clock_type::now();
    fn();
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// one coefficient step plus one full projection pass, from a fresh init
void one_outer_iteration(const SuffStats& ts, const Hyperparams& hp, int threads) {
    Hyperparams hp1 = hp;
    hp1.max_outer_iters = 1;
    FitOptions opts;
    opts.threads = threads;
    fit_with_tensors(ts, hp1, nullptr, opts);
}

}  // namespace

std::vector<ScalingRow> scaling_run(const std::vector<std::size_t>& n_targets,
                                    const Hyperparams& hp, const ScalingConfig& cfg) {
    std::vector<ScalingRow> rows;
    if (n_targets.empty()) return rows;

    auto [truth, net] = generate_synthetic_config(cfg.d, cfg.erdos_p, cfg.seed);
    SimulateOptions sopts;
    sopts.threads = cfg.threads;

    // pilot to estimate events per realization
    const int pilot_H = 200;
    EventHistory pilot = simulate_synthetic(truth, net, 0.0, cfg.window, pilot_H,
                                            derive_seed(cfg.seed, 1), sopts);
    const double per_realization =
        std::max(1e-9, static_cast<double>(pilot.total_events()) / pilot_H);

    for (std::size_t target : n_targets) {
        const int H = std::max(1, static_cast<int>(std::lround(target / per_realization)));
        EventHistory history =
            simulate_synthetic(truth, net, 0.0, cfg.window, H, derive_seed(cfg.seed, 2), sopts);

        ScalingRow row;
        row.n_target = target;
        row.n_actual = history.total_events();
        row.d = cfg.d;
        row.n_realizations = H;

        std::vector<double> build_times, iter_times;
        SuffStats ts;
        // warm-up excluded from the medians
        ts = build_tensors(history, net, hp, cfg.threads);
        one_outer_iteration(ts, hp, cfg.threads);
        for (int rep = 0; rep < std::max(1, cfg.repetitions); ++rep) {
            build_times.push_back(
                time_call([&] { ts = build_tensors(history, net, hp, cfg.threads); }));
            iter_times.push_back(time_call([&] { one_outer_iteration(ts, hp, cfg.threads); }));
        }
        row.build_s = median(build_times);
        row.iter_s = median(iter_times);
        rows.push_back(row);
    }
    return rows;
}

std::vector<RankRow> rank_sweep(const EventHistory& history, const Network& net,
                                const Hyperparams& hp, const std::vector<int>& ranks,
                                const SyntheticConfig* truth, int threads, double holdout) {
    std::vector<RankRow> rows;
    auto [train, test] = split_holdout(history, holdout);
    for (int r : ranks) {
        Hyperparams hpr = hp;
        hpr.r = r;
        FitOptions opts;
        opts.threads = threads;
        auto [model, report] = fit(train, net, hpr, nullptr, opts);

        RankRow row;
        row.r = r;
        row.loglik = report.loglik_trace.empty() ? 0.0 : report.loglik_trace.back();
        if (!test.realizations.empty()) {
            const PredictionEval pe = evaluate_prediction(model, hpr, test, net, 0.30, threads);
            row.auc = pe.auc;
            row.accuracy = pe.accuracy;
        }
        if (truth) row.l2_error = type_level_l2_error(model, hpr, *truth);
        rows.push_back(row);
    }
    return rows;
}

void save_scaling_csv(const std::vector<ScalingRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot-open", path, 0, "cannot open for writing");
    out << "#lrhawkes-bench-v1\nn_target,n_actual,d,n_realizations,build_s,iter_s\n";
    for (const auto& r : rows)
        out << r.n_target << ',' << r.n_actual << ',' << r.d << ',' << r.n_realizations << ','
            << fmt_double(r.build_s) << ',' << fmt_double(r.iter_s) << '\n';
}

void save_rank_csv(const std::vector<RankRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot-open", path, 0, "cannot open for writing");
    out << "#lrhawkes-bench-v1\nr,loglik,auc,accuracy,l2_error\n";
    for (const auto& r : rows)
        out << r.r << ',' << fmt_double(r.loglik) << ',' << fmt_double(r.auc) << ','
            << fmt_double(r.accuracy) << ',' << fmt_double(r.l2_error) << '\n';
}

}  // namespace lrhawkes
