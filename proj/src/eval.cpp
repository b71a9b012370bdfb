#include "lrhawkes/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "lrhawkes/likelihood.hpp"
#include "lrhawkes/parallel.hpp"
#include "lrhawkes/rng.hpp"

namespace lrhawkes {

namespace {

// trapezoid weights on a uniform grid
double l2_norm_sq(const std::vector<double>& vals, double dt) {
    double acc = 0.0;
    for (std::size_t i = 0; i < vals.size(); ++i) {
        const double w = (i == 0 || i + 1 == vals.size()) ? 0.5 : 1.0;
        acc += w * vals[i] * vals[i];
    }
    return acc * dt;
}

}  // namespace

double normalized_l2_error(const KernelFn& inferred, const KernelFn& truth, int r,
                           const EvalGrid& grid) {
    if (grid.n_points < 2) throw std::invalid_argument("normalized_l2_error: grid too small");
    const double dt = grid.t_max / (grid.n_points - 1);
    double total = 0.0;
    std::vector<double> f(grid.n_points), g(grid.n_points), diff(grid.n_points);
    for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b) {
            for (int i = 0; i < grid.n_points; ++i) {
                const double t = i * dt;
                f[i] = inferred(a, b, t);
                g[i] = truth(a, b, t);
                diff[i] = f[i] - g[i];
            }
            const double nf = std::sqrt(l2_norm_sq(f, dt));
            const double ng = std::sqrt(l2_norm_sq(g, dt));
            if (nf + ng > 0.0) total += std::sqrt(l2_norm_sq(diff, dt)) / (nf + ng);
        }
    return total / (static_cast<double>(r) * r);
}

// ---------------------------------------------------------------------------
// k-means on projection rows
// ---------------------------------------------------------------------------

namespace {

double sq_dist(const double* a, const double* b, int dim) {
    double acc = 0.0;
    for (int t = 0; t < dim; ++t) {
        const double diff = a[t] - b[t];
        acc += diff * diff;
    }
    return acc;
}

struct KMeansRun {
    std::vector<int> assign;
    std::vector<double> centers;
    double inertia = 0.0;
};

KMeansRun kmeans_once(const std::vector<double>& rows, int n, int dim, int k, Rng& rng) {
    KMeansRun run;
    run.centers.assign(static_cast<std::size_t>(k) * dim, 0.0);
    run.assign.assign(n, 0);

    // kmeans++ seeding
    std::vector<double> d2(n, 0.0);
    int first = static_cast<int>(rng.below(n));
    std::copy_n(&rows[static_cast<std::size_t>(first) * dim], dim, run.centers.begin());
    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (int p = 0; p < n; ++p) {
            double best = sq_dist(&rows[static_cast<std::size_t>(p) * dim], &run.centers[0], dim);
            for (int cc = 1; cc < c; ++cc)
                best = std::min(best, sq_dist(&rows[static_cast<std::size_t>(p) * dim],
                                              &run.centers[static_cast<std::size_t>(cc) * dim],
                                              dim));
            d2[p] = best;
            total += best;
        }
        int pick;
        if (total > 0.0) {
            double threshold = rng.uniform() * total, cum = 0.0;
            pick = n - 1;
            for (int p = 0; p < n; ++p) {
                cum += d2[p];
                if (threshold < cum) {
                    pick = p;
                    break;
                }
            }
        } else {
            pick = static_cast<int>(rng.below(n));
        }
        std::copy_n(&rows[static_cast<std::size_t>(pick) * dim], dim,
                    run.centers.begin() + static_cast<std::size_t>(c) * dim);
    }

    std::vector<double> sums(static_cast<std::size_t>(k) * dim);
    std::vector<int> counts(k);
    for (int iter = 0; iter < 100; ++iter) {
        bool changed = false;
        for (int p = 0; p < n; ++p) {
            int best = 0;
            double bd = sq_dist(&rows[static_cast<std::size_t>(p) * dim], &run.centers[0], dim);
            for (int c = 1; c < k; ++c) {
                const double dd = sq_dist(&rows[static_cast<std::size_t>(p) * dim],
                                          &run.centers[static_cast<std::size_t>(c) * dim], dim);
                if (dd < bd) {
                    bd = dd;
                    best = c;
                }
            }
            if (run.assign[p] != best) {
                run.assign[p] = best;
                changed = true;
            }
        }
        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (int p = 0; p < n; ++p) {
            ++counts[run.assign[p]];
            const double* row = &rows[static_cast<std::size_t>(p) * dim];
            double* s = &sums[static_cast<std::size_t>(run.assign[p]) * dim];
            for (int t = 0; t < dim; ++t) s[t] += row[t];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                // re-seed the empty cluster at a random point
                const int pick = static_cast<int>(rng.below(n));
                std::copy_n(&rows[static_cast<std::size_t>(pick) * dim], dim,
                            run.centers.begin() + static_cast<std::size_t>(c) * dim);
                changed = true;
            } else {
                for (int t = 0; t < dim; ++t)
                    run.centers[static_cast<std::size_t>(c) * dim + t] = sums[c * dim + t] / counts[c];
            }
        }
        if (!changed && iter > 0) break;
    }
    run.inertia = 0.0;
    for (int p = 0; p < n; ++p)
        run.inertia += sq_dist(&rows[static_cast<std::size_t>(p) * dim],
                               &run.centers[static_cast<std::size_t>(run.assign[p]) * dim], dim);
    return run;
}

}  // namespace

GroupRecovery recover_groups(const LowRankModel& model, int restarts, std::uint64_t seed) {
    const int d = model.d;
    const int r = model.r;
    if (d < r) throw std::invalid_argument("recover_groups: fewer types than groups");
    std::vector<double> rows(static_cast<std::size_t>(d) * r);
    for (int u = 0; u < d; ++u)
        for (int i = 0; i < r; ++i) rows[static_cast<std::size_t>(u) * r + i] = model.p(u, i);

    Rng rng(derive_seed(seed, 0x6b6d));
    KMeansRun best;
    bool have = false;
    for (int s = 0; s < restarts; ++s) {
        KMeansRun run = kmeans_once(rows, d, r, r, rng);
        if (!have || run.inertia < best.inertia) {
            best = std::move(run);
            have = true;
        }
    }
    GroupRecovery rec;
    rec.assignment = std::move(best.assign);
    rec.centers = std::move(best.centers);
    rec.inertia = best.inertia;
    return rec;
}

KernelFn model_group_kernels(const LowRankModel& model, const Hyperparams& hp,
                             const std::vector<double>& centers) {
    const int r = model.r;
    return [model, hp, centers, r](int a, int b, double t) {
        double acc = 0.0;
        for (int j = 0; j < r; ++j) {
            const double ca = centers[static_cast<std::size_t>(a) * r + j];
            if (ca == 0.0) continue;
            for (int i = 0; i < r; ++i)
                acc += ca * centers[static_cast<std::size_t>(b) * r + i] *
                       kernel_value(model, hp, j, i, t);
        }
        return acc;
    };
}

KernelFn synthetic_kernels(const SyntheticConfig& cfg) {
    return [cfg](int a, int b, double t) { return true_kernel(cfg, a, b, t); };
}

AlignedError aligned_kernel_error(const LowRankModel& model, const Hyperparams& hp,
                                  const GroupRecovery& rec, const SyntheticConfig& cfg,
                                  const EvalGrid& grid) {
    const int r = cfg.r_true;
    if (model.r != r)
        throw std::invalid_argument("aligned_kernel_error: fitted rank differs from true rank");
    if (r > 5) throw std::invalid_argument("aligned_kernel_error: permutation search capped at r=5");

    KernelFn truth = synthetic_kernels(cfg);
    std::vector<int> perm(r);
    std::iota(perm.begin(), perm.end(), 0);

    AlignedError out;
    out.error = std::numeric_limits<double>::infinity();
    do {
        std::vector<double> centers(static_cast<std::size_t>(r) * r);
        for (int g = 0; g < r; ++g)
            std::copy_n(&rec.centers[static_cast<std::size_t>(perm[g]) * r], r,
                        centers.begin() + static_cast<std::size_t>(g) * r);
        KernelFn fitted = model_group_kernels(model, hp, centers);
        const double err = normalized_l2_error(fitted, truth, r, grid);
        if (err < out.error) {
            out.error = err;
            out.permutation.assign(perm.begin(), perm.end());
        }
    } while (std::next_permutation(perm.begin(), perm.end()));

    out.assignment_exact = true;
    for (int u = 0; u < cfg.d; ++u)
        if (rec.assignment[u] != out.permutation[cfg.group_of[u]]) {
            out.assignment_exact = false;
            break;
        }
    return out;
}

double type_level_l2_error(const LowRankModel& model, const Hyperparams& hp,
                           const SyntheticConfig& cfg, const EvalGrid& grid) {
    const int d = cfg.d;
    const double dt = grid.t_max / (grid.n_points - 1);
    const int r_fit = model.r;

    // evaluate the fitted and true group kernels once per pair of groups
    std::vector<std::vector<double>> fit_curves(static_cast<std::size_t>(r_fit) * r_fit),
        true_curves(static_cast<std::size_t>(cfg.r_true) * cfg.r_true);
    for (int j = 0; j < r_fit; ++j)
        for (int i = 0; i < r_fit; ++i) {
            auto& c = fit_curves[static_cast<std::size_t>(j) * r_fit + i];
            c.resize(grid.n_points);
            for (int t = 0; t < grid.n_points; ++t)
                c[t] = kernel_value(model, hp, j, i, t * dt);
        }
    for (int a = 0; a < cfg.r_true; ++a)
        for (int b = 0; b < cfg.r_true; ++b) {
            auto& c = true_curves[static_cast<std::size_t>(a) * cfg.r_true + b];
            c.resize(grid.n_points);
            for (int t = 0; t < grid.n_points; ++t)
                c[t] = true_kernel(cfg, a, b, t * dt);
        }

    double total = 0.0;
    std::vector<double> fit_uv(grid.n_points), diff(grid.n_points);
    for (int v = 0; v < d; ++v)
        for (int u = 0; u < d; ++u) {
            std::fill(fit_uv.begin(), fit_uv.end(), 0.0);
            for (int j = 0; j < r_fit; ++j) {
                const double pvj = model.p(v, j);
                if (pvj == 0.0) continue;
                for (int i = 0; i < r_fit; ++i) {
                    const double w = pvj * model.p(u, i);
                    if (w == 0.0) continue;
                    const auto& c = fit_curves[static_cast<std::size_t>(j) * r_fit + i];
                    for (int t = 0; t < grid.n_points; ++t) fit_uv[t] += w * c[t];
                }
            }
            const auto& tc =
                true_curves[static_cast<std::size_t>(cfg.group_of[v]) * cfg.r_true +
                            cfg.group_of[u]];
            for (int t = 0; t < grid.n_points; ++t) diff[t] = fit_uv[t] - tc[t];
            const double nf = std::sqrt(l2_norm_sq(fit_uv, dt));
            const double ng = std::sqrt(l2_norm_sq(tc, dt));
            if (nf + ng > 0.0) total += std::sqrt(l2_norm_sq(diff, dt)) / (nf + ng);
        }
    return total / (static_cast<double>(d) * d);
}

// ---------------------------------------------------------------------------
// Prediction
// ---------------------------------------------------------------------------

std::vector<double> predict_scores(const LowRankModel& model, const Hyperparams& hp,
                                   const EventHistory& history, const Network& net, int h,
                                   double t) {
    return intensity(model, hp, history, net, h, t);
}

double auc(const std::vector<std::vector<double>>& scores, const std::vector<int>& true_types) {
    if (scores.empty() || scores.size() != true_types.size())
        throw std::invalid_argument("auc: need matching, non-empty scores and labels");
    double total = 0.0;
    for (std::size_t e = 0; e < scores.size(); ++e) {
        const auto& s = scores[e];
        const double st = s[true_types[e]];
        int below = 0, ties = 0;
        for (std::size_t u = 0; u < s.size(); ++u) {
            if (static_cast<int>(u) == true_types[e]) continue;
            if (s[u] < st)
                ++below;
            else if (s[u] == st)
                ++ties;
        }
        total += (below + 0.5 * ties) / static_cast<double>(s.size() - 1);
    }
    return total / static_cast<double>(scores.size());
}

double accuracy_at(const std::vector<std::vector<double>>& scores,
                   const std::vector<int>& true_types, double fraction) {
    if (scores.empty() || scores.size() != true_types.size())
        throw std::invalid_argument("accuracy_at: need matching, non-empty scores and labels");
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw std::invalid_argument("accuracy_at: fraction must lie in (0,1]");
    const int d = static_cast<int>(scores.front().size());
    const int top = static_cast<int>(std::ceil(fraction * d));
    std::size_t hits = 0;
    for (std::size_t e = 0; e < scores.size(); ++e) {
        const auto& s = scores[e];
        const int truth = true_types[e];
        const double st = s[truth];
        int rank = 0;  // candidates strictly ahead under (score desc, index asc)
        for (int u = 0; u < d; ++u) {
            if (u == truth) continue;
            if (s[u] > st || (s[u] == st && u < truth)) ++rank;
        }
        if (rank < top) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(scores.size());
}

std::vector<double> naive_baseline(const EventHistory& train, int d) {
    std::vector<double> counts(d, 0.0);
    for (const auto& re : train.realizations)
        for (const auto& ev : re.events) counts[ev.type] += 1.0;
    return counts;
}

PredictionEval evaluate_prediction(const LowRankModel& model, const Hyperparams& hp,
                                   const EventHistory& test, const Network& net, double fraction,
                                   int threads) {
    const int H = static_cast<int>(test.realizations.size());
    std::vector<std::vector<std::vector<double>>> per_h(H);
    parallel_chunks(
        static_cast<std::size_t>(H), threads,
        [&](std::size_t, std::size_t begin, std::size_t end) {
            for (std::size_t h = begin; h < end; ++h) {
                const auto& re = test.realizations[h];
                per_h[h].reserve(re.events.size());
                for (const auto& ev : re.events)
                    per_h[h].push_back(
                        intensity(model, hp, test, net, static_cast<int>(h), ev.time));
            }
        },
        /*chunk=*/4);

    std::vector<std::vector<double>> scores;
    std::vector<int> truths;
    for (int h = 0; h < H; ++h) {
        const auto& re = test.realizations[h];
        for (std::size_t m = 0; m < re.events.size(); ++m) {
            scores.push_back(std::move(per_h[h][m]));
            truths.push_back(re.events[m].type);
        }
    }
    PredictionEval out;
    out.n_events = scores.size();
    if (!scores.empty()) {
        out.auc = auc(scores, truths);
        out.accuracy = accuracy_at(scores, truths, fraction);
    }
    return out;
}

PredictionEval evaluate_static_scores(const std::vector<double>& static_scores,
                                      const EventHistory& test, double fraction) {
    std::vector<std::vector<double>> scores;
    std::vector<int> truths;
    for (const auto& re : test.realizations)
        for (const auto& ev : re.events) {
            scores.push_back(static_scores);
            truths.push_back(ev.type);
        }
    PredictionEval out;
    out.n_events = scores.size();
    if (!scores.empty()) {
        out.auc = auc(scores, truths);
        out.accuracy = accuracy_at(scores, truths, fraction);
    }
    return out;
}

std::pair<EventHistory, EventHistory> split_holdout(const EventHistory& history,
                                                    double test_fraction) {
    if (!(test_fraction >= 0.0 && test_fraction < 1.0))
        throw std::invalid_argument("split_holdout: fraction must lie in [0,1)");
    const std::size_t H = history.realizations.size();
    const std::size_t n_test = static_cast<std::size_t>(test_fraction * H);
    EventHistory train, test;
    train.realizations.assign(history.realizations.begin(),
                              history.realizations.end() - n_test);
    test.realizations.assign(history.realizations.end() - n_test, history.realizations.end());
    return {std::move(train), std::move(test)};
}

}  // namespace lrhawkes
