// Command-line front end: simulate / fit / predict / evaluate / kernels /
// bench / tensors. All commands are deterministic given --seed.

#include <CLI11.hpp>

#include <cmath>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "lrhawkes/bench.hpp"
#include "lrhawkes/eval.hpp"
#include "lrhawkes/fit.hpp"
#include "lrhawkes/io.hpp"
#include "lrhawkes/likelihood.hpp"
#include "lrhawkes/simulate.hpp"

using namespace lrhawkes;

namespace {

struct CommonFlags {
    std::uint64_t seed = 0;
    int threads = 1;
    bool reproducible = false;  // reductions are deterministic either way
};

void add_common(CLI::App* cmd, CommonFlags& common) {
    cmd->add_option("--seed", common.seed, "random seed");
    cmd->add_option("--threads", common.threads, "worker threads (0 = all cores)");
    cmd->add_flag("--reproducible", common.reproducible,
                  "kept for compatibility; outputs are reproducible regardless");
}

void add_hyper(CLI::App* cmd, Hyperparams& hp) {
    cmd->add_option("--rank", hp.r, "rank of the projection");
    cmd->add_option("--kernels", hp.K, "number of exponential terms");
    cmd->add_option("--gamma", hp.gamma, "baseline basis decay");
    cmd->add_option("--delta", hp.delta, "triggering basis decay");
    cmd->add_option("--epsilon", hp.epsilon, "barrier weight");
    cmd->add_option("--iters", hp.max_outer_iters, "outer iteration cap");
    cmd->add_option("--newton-iters", hp.max_newton_iters, "inner iteration cap");
    cmd->add_option("--tol", hp.rel_tol, "relative log-likelihood tolerance");
    cmd->add_flag("--epsilon-decay", hp.epsilon_decay_pass,
                  "extra coefficient solve at epsilon/10");
}

Network make_network(const std::optional<std::string>& path, int d, bool self_loops,
                     std::vector<std::string>* warnings) {
    if (path) return load_network(*path, d, warnings);
    return Network::complete(d, self_loops);
}

std::vector<std::size_t> parse_sizes(const std::string& csv) {
    std::vector<std::size_t> out;
    std::size_t start = 0;
    while (start <= csv.size()) {
        const auto comma = csv.find(',', start);
        const std::string tok =
            csv.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        if (!tok.empty()) out.push_back(std::stoull(tok));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"low-rank multivariate Hawkes processes: simulation, inference, evaluation"};
    app.require_subcommand(1);

    // ---- simulate ----------------------------------------------------------
    auto* sim = app.add_subcommand("simulate", "generate event histories");
    CommonFlags sim_common;
    int sim_d = 100, sim_H = 1000, sim_groups = 2;
    double sim_p = 0.1, sim_tminus = 0.0, sim_window = 100.0;
    bool sim_no_self_loops = false;
    std::size_t sim_cap = 1000000;
    std::string sim_events, sim_windows;
    std::optional<std::string> sim_network_out, sim_truth_out, sim_model_in, sim_network_in;
    sim->add_option("--d", sim_d, "number of event types");
    sim->add_option("--erdos-p", sim_p, "edge probability");
    sim->add_option("--groups", sim_groups, "number of latent groups");
    sim->add_option("--realizations", sim_H, "independent realizations")->required();
    sim->add_option("--t-minus", sim_tminus, "window start");
    sim->add_option("--window", sim_window, "window length");
    sim->add_flag("--no-self-loops", sim_no_self_loops, "zero adjacency diagonal");
    sim->add_option("--cap", sim_cap, "per-realization event cap");
    sim->add_option("--out-events", sim_events, "events CSV")->required();
    sim->add_option("--out-windows", sim_windows, "windows CSV")->required();
    sim->add_option("--out-network", sim_network_out, "network CSV");
    sim->add_option("--out-truth", sim_truth_out, "generating parameters JSON");
    sim->add_option("--model", sim_model_in, "simulate from a fitted model instead");
    sim->add_option("--network", sim_network_in, "network CSV (with --model)");
    add_common(sim, sim_common);

    // ---- fit ---------------------------------------------------------------
    auto* fitc = app.add_subcommand("fit", "estimate a model from events");
    CommonFlags fit_common;
    Hyperparams fit_hp;
    int fit_d = 0, fit_mm_sweeps = 5;
    bool fit_no_self_loops = false;
    std::string fit_events, fit_windows, fit_model_out, fit_solver = "auto";
    std::optional<std::string> fit_network, fit_report, fit_init;
    fitc->add_option("--events", fit_events)->required();
    fitc->add_option("--windows", fit_windows)->required();
    fitc->add_option("--d", fit_d, "number of event types")->required();
    fitc->add_option("--network", fit_network, "network CSV (default: complete)");
    fitc->add_flag("--no-self-loops", fit_no_self_loops, "diagonal of the default network");
    fitc->add_option("--out-model", fit_model_out)->required();
    fitc->add_option("--report", fit_report, "fit report JSON");
    fitc->add_option("--init-model", fit_init, "warm start from a model file");
    fitc->add_option("--mm-sweeps", fit_mm_sweeps, "projection sweeps per outer iteration");
    fitc->add_option("--solver", fit_solver, "auto|newton|quasi-newton");
    add_hyper(fitc, fit_hp);
    add_common(fitc, fit_common);

    // ---- predict -----------------------------------------------------------
    auto* pred = app.add_subcommand("predict", "score next-event types on a test set");
    CommonFlags pred_common;
    std::string pred_model, pred_events, pred_windows, pred_out;
    std::optional<std::string> pred_network;
    bool pred_no_self_loops = false;
    pred->add_option("--model", pred_model)->required();
    pred->add_option("--events", pred_events)->required();
    pred->add_option("--windows", pred_windows)->required();
    pred->add_option("--network", pred_network);
    pred->add_flag("--no-self-loops", pred_no_self_loops);
    pred->add_option("--out", pred_out, "scores CSV")->required();
    add_common(pred, pred_common);

    // ---- evaluate ----------------------------------------------------------
    auto* ev = app.add_subcommand("evaluate", "kernel recovery / group recovery / prediction");
    CommonFlags ev_common;
    std::string ev_out;
    std::optional<std::string> ev_model, ev_truth, ev_events, ev_windows, ev_train_events,
        ev_train_windows, ev_network;
    double ev_fraction = 0.30, ev_grid_max = 10.0;
    int ev_grid_points = 1000, ev_restarts = 10;
    bool ev_no_self_loops = false;
    ev->add_option("--model", ev_model)->required();
    ev->add_option("--truth", ev_truth, "generating parameters JSON (kernel/group recovery)");
    ev->add_option("--events", ev_events, "test events CSV (prediction metrics)");
    ev->add_option("--windows", ev_windows);
    ev->add_option("--train-events", ev_train_events, "training events CSV (baseline ranker)");
    ev->add_option("--train-windows", ev_train_windows);
    ev->add_option("--network", ev_network);
    ev->add_flag("--no-self-loops", ev_no_self_loops);
    ev->add_option("--top-fraction", ev_fraction, "accuracy candidate fraction");
    ev->add_option("--grid-max", ev_grid_max, "kernel comparison horizon");
    ev->add_option("--grid-points", ev_grid_points);
    ev->add_option("--kmeans-restarts", ev_restarts);
    ev->add_option("--out", ev_out, "metrics CSV")->required();
    add_common(ev, ev_common);

    // ---- kernels -----------------------------------------------------------
    auto* ker = app.add_subcommand("kernels", "emit kernel/baseline curves");
    CommonFlags ker_common;
    std::string ker_model, ker_out;
    std::optional<std::string> ker_truth;
    double ker_grid_max = 10.0;
    int ker_grid_points = 1000, ker_restarts = 10;
    ker->add_option("--model", ker_model)->required();
    ker->add_option("--truth", ker_truth);
    ker->add_option("--grid-max", ker_grid_max);
    ker->add_option("--grid-points", ker_grid_points);
    ker->add_option("--kmeans-restarts", ker_restarts);
    ker->add_option("--out", ker_out)->required();
    add_common(ker, ker_common);

    // ---- bench -------------------------------------------------------------
    auto* bench = app.add_subcommand("bench", "scaling and rank-sensitivity harness");
    bench->require_subcommand(1);
    auto* bscale = bench->add_subcommand("scaling", "time build + one outer iteration vs n");
    CommonFlags bs_common;
    Hyperparams bs_hp;
    std::string bs_sizes = "10000,20000,40000", bs_out;
    ScalingConfig bs_cfg;
    bscale->add_option("--sizes", bs_sizes, "comma-separated event-count targets");
    bscale->add_option("--d", bs_cfg.d);
    bscale->add_option("--erdos-p", bs_cfg.erdos_p);
    bscale->add_option("--window", bs_cfg.window);
    bscale->add_option("--reps", bs_cfg.repetitions);
    bscale->add_option("--out", bs_out)->required();
    add_hyper(bscale, bs_hp);
    add_common(bscale, bs_common);

    auto* brank = bench->add_subcommand("rank", "fit a list of ranks on one dataset");
    CommonFlags br_common;
    Hyperparams br_hp;
    std::string br_events, br_windows, br_ranks = "1,2,3,4", br_out;
    std::optional<std::string> br_network, br_truth;
    int br_d = 0;
    double br_holdout = 0.2;
    bool br_no_self_loops = false;
    brank->add_option("--events", br_events)->required();
    brank->add_option("--windows", br_windows)->required();
    brank->add_option("--d", br_d)->required();
    brank->add_option("--network", br_network);
    brank->add_flag("--no-self-loops", br_no_self_loops);
    brank->add_option("--ranks", br_ranks, "comma-separated ranks");
    brank->add_option("--truth", br_truth);
    brank->add_option("--holdout", br_holdout);
    brank->add_option("--out", br_out)->required();
    add_hyper(brank, br_hp);
    add_common(brank, br_common);

    // ---- tensors -----------------------------------------------------------
    auto* tns = app.add_subcommand("tensors", "debug dump of the sparse statistics");
    CommonFlags tns_common;
    Hyperparams tns_hp;
    std::string tns_events, tns_windows, tns_out;
    std::optional<std::string> tns_network;
    int tns_d = 0;
    bool tns_no_self_loops = false;
    tns->add_option("--events", tns_events)->required();
    tns->add_option("--windows", tns_windows)->required();
    tns->add_option("--d", tns_d)->required();
    tns->add_option("--network", tns_network);
    tns->add_flag("--no-self-loops", tns_no_self_loops);
    tns->add_option("--out", tns_out)->required();
    add_hyper(tns, tns_hp);
    add_common(tns, tns_common);

    CLI11_PARSE(app, argc, argv);

    try {
        std::vector<std::string> warnings;

        if (*sim) {
            SimulateOptions opts;
            opts.threads = sim_common.threads;
            opts.max_events_per_realization = sim_cap;
            EventHistory history;
            if (sim_model_in) {
                auto [model, hp] = load_model(*sim_model_in);
                Network net =
                    make_network(sim_network_in, model.d, !sim_no_self_loops, &warnings);
                history = simulate_model(model, hp, net, sim_tminus, sim_tminus + sim_window,
                                         sim_H, sim_common.seed, opts);
            } else {
                auto [truth, net] = generate_synthetic_config(sim_d, sim_p, sim_common.seed,
                                                              !sim_no_self_loops, sim_groups);
                history = simulate_synthetic(truth, net, sim_tminus, sim_tminus + sim_window,
                                             sim_H, sim_common.seed, opts);
                if (sim_network_out) save_network(net, *sim_network_out);
                if (sim_truth_out) save_truth(truth, *sim_truth_out);
            }
            save_events(history, sim_events, sim_windows);
            std::cout << "simulated " << history.total_events() << " events over "
                      << history.realizations.size() << " realizations\n";
        } else if (*fitc) {
            fit_hp.seed = fit_common.seed;
            EventHistory history = load_events(fit_events, fit_windows, fit_d);
            Network net = make_network(fit_network, fit_d, !fit_no_self_loops, &warnings);
            FitOptions opts;
            opts.threads = fit_common.threads;
            opts.mm_sweeps = fit_mm_sweeps;
            if (fit_solver == "newton")
                opts.alpha_solver = AlphaOptions::Solver::Newton;
            else if (fit_solver == "quasi-newton")
                opts.alpha_solver = AlphaOptions::Solver::QuasiNewton;
            else if (fit_solver != "auto")
                throw CLI::ValidationError("--solver", "must be auto|newton|quasi-newton");
            std::optional<LowRankModel> init;
            if (fit_init) init = load_model(*fit_init).first;
            auto [model, report] =
                fit(history, net, fit_hp, init ? &*init : nullptr, opts);
            save_model(model, fit_hp, fit_model_out);
            if (fit_report) save_report(report, *fit_report);
            std::cout << "fit " << (report.converged ? "converged" : "stopped") << " after "
                      << report.outer_iters_used << " outer iterations; loglik "
                      << fmt_double(report.loglik_trace.back()) << "\n";
            for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
        } else if (*pred) {
            auto [model, hp] = load_model(pred_model);
            EventHistory test = load_events(pred_events, pred_windows, model.d);
            Network net = make_network(pred_network, model.d, !pred_no_self_loops, &warnings);
            std::vector<std::vector<double>> scores;
            std::vector<std::pair<int, int>> ids;
            std::vector<int> truths;
            for (int h = 0; h < static_cast<int>(test.realizations.size()); ++h) {
                const auto& re = test.realizations[h];
                for (std::size_t m = 0; m < re.events.size(); ++m) {
                    scores.push_back(
                        predict_scores(model, hp, test, net, h, re.events[m].time));
                    ids.emplace_back(h, static_cast<int>(m));
                    truths.push_back(re.events[m].type);
                }
            }
            save_scores(scores, ids, truths, pred_out);
            std::cout << "scored " << scores.size() << " events\n";
        } else if (*ev) {
            auto [model, hp] = load_model(*ev_model);
            std::vector<std::pair<std::string, double>> metrics;
            if (ev_truth) {
                SyntheticConfig truth = load_truth(*ev_truth);
                EvalGrid grid{ev_grid_max, ev_grid_points};
                GroupRecovery rec = recover_groups(model, ev_restarts, ev_common.seed);
                AlignedError ae = aligned_kernel_error(model, hp, rec, truth, grid);
                metrics.emplace_back("l2_error", ae.error);
                metrics.emplace_back("groups_exact", ae.assignment_exact ? 1.0 : 0.0);
                metrics.emplace_back("type_l2_error", type_level_l2_error(model, hp, truth, grid));
            }
            if (ev_events) {
                if (!ev_windows)
                    throw CLI::ValidationError("--windows", "required with --events");
                EventHistory test = load_events(*ev_events, *ev_windows, model.d);
                Network net = make_network(ev_network, model.d, !ev_no_self_loops, &warnings);
                PredictionEval pe =
                    evaluate_prediction(model, hp, test, net, ev_fraction, ev_common.threads);
                metrics.emplace_back("auc_model", pe.auc);
                metrics.emplace_back("accuracy_model", pe.accuracy);
                metrics.emplace_back("n_test_events", static_cast<double>(pe.n_events));
                if (ev_train_events) {
                    if (!ev_train_windows)
                        throw CLI::ValidationError("--train-windows",
                                                   "required with --train-events");
                    EventHistory train =
                        load_events(*ev_train_events, *ev_train_windows, model.d);
                    PredictionEval nb = evaluate_static_scores(
                        naive_baseline(train, model.d), test, ev_fraction);
                    metrics.emplace_back("auc_naive", nb.auc);
                    metrics.emplace_back("accuracy_naive", nb.accuracy);
                }
            }
            save_metrics(metrics, ev_out);
            for (const auto& [k, v] : metrics) std::cout << k << " = " << v << "\n";
        } else if (*ker) {
            auto [model, hp] = load_model(ker_model);
            const double dt = ker_grid_max / (ker_grid_points - 1);
            std::vector<CurvePoint> points;
            if (ker_truth) {
                SyntheticConfig truth = load_truth(*ker_truth);
                GroupRecovery rec = recover_groups(model, ker_restarts, ker_common.seed);
                AlignedError ae =
                    aligned_kernel_error(model, hp, rec, truth, {ker_grid_max, ker_grid_points});
                std::vector<double> centers(rec.centers.size());
                for (int g = 0; g < model.r; ++g)
                    std::copy_n(&rec.centers[static_cast<std::size_t>(ae.permutation[g]) * model.r],
                                model.r, centers.begin() + static_cast<std::size_t>(g) * model.r);
                KernelFn fitted = model_group_kernels(model, hp, centers);
                for (int a = 0; a < model.r; ++a)
                    for (int b = 0; b < model.r; ++b)
                        for (int i = 0; i < ker_grid_points; ++i) {
                            const double t = i * dt;
                            points.push_back({"kernel", a, b, t, true_kernel(truth, a, b, t),
                                              fitted(a, b, t)});
                        }
            } else {
                for (int a = 0; a < model.r; ++a)
                    for (int b = 0; b < model.r; ++b)
                        for (int i = 0; i < ker_grid_points; ++i) {
                            const double t = i * dt;
                            points.push_back({"kernel", a, b, t,
                                              std::numeric_limits<double>::quiet_NaN(),
                                              kernel_value(model, hp, a, b, t)});
                        }
            }
            for (int i = 0; i < model.r; ++i)
                for (int g = 0; g < ker_grid_points; ++g) {
                    const double t = g * dt;
                    points.push_back({"baseline", -1, i, t,
                                      std::numeric_limits<double>::quiet_NaN(),
                                      baseline_value(model, hp, i, t)});
                }
            save_curves(points, ker_out);
            std::cout << "wrote " << points.size() << " curve points\n";
        } else if (*bscale) {
            bs_cfg.seed = bs_common.seed;
            bs_cfg.threads = bs_common.threads;
            bs_hp.seed = bs_common.seed;
            auto rows = scaling_run(parse_sizes(bs_sizes), bs_hp, bs_cfg);
            save_scaling_csv(rows, bs_out);
            for (const auto& r : rows)
                std::cout << "n=" << r.n_actual << " build=" << r.build_s << "s iter=" << r.iter_s
                          << "s\n";
        } else if (*brank) {
            br_hp.seed = br_common.seed;
            EventHistory history = load_events(br_events, br_windows, br_d);
            Network net = make_network(br_network, br_d, !br_no_self_loops, &warnings);
            std::optional<SyntheticConfig> truth;
            if (br_truth) truth = load_truth(*br_truth);
            std::vector<int> ranks;
            for (std::size_t s : parse_sizes(br_ranks)) ranks.push_back(static_cast<int>(s));
            auto rows = rank_sweep(history, net, br_hp, ranks, truth ? &*truth : nullptr,
                                   br_common.threads, br_holdout);
            save_rank_csv(rows, br_out);
            for (const auto& r : rows)
                std::cout << "r=" << r.r << " auc=" << r.auc << " accuracy=" << r.accuracy
                          << " l2=" << r.l2_error << "\n";
        } else if (*tns) {
            EventHistory history = load_events(tns_events, tns_windows, tns_d);
            Network net = make_network(tns_network, tns_d, !tns_no_self_loops, &warnings);
            SuffStats ts = build_tensors(history, net, tns_hp, tns_common.threads);
            save_tensor_dump(ts, tns_out);
            std::cout << "dumped " << ts.n_events() << " events\n";
        }

        for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    } catch (const IoError& e) {
        std::cerr << "error code=" << e.code << " line=" << e.line << " msg=\"" << e.what()
                  << "\"\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error code=runtime msg=\"" << e.what() << "\"\n";
        return 1;
    }
    return 0;
}
