#include "lrhawkes/optimize_alpha.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>

#include "lrhawkes/parallel.hpp"

namespace lrhawkes {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kArmijo = 0.01;
constexpr double kShrink = 0.5;

enum class Mode { Value, Grad, GradDiag, Hess };

struct Partial {
    bool feasible = true;
    double value = 0.0;
    VectorXd grad;
    VectorXd hdiag;  // negated Hessian diagonal (curvature magnitudes)
    MatrixXd hess;   // lower triangle
};

// Accumulates one event's contribution. Returns false on an infeasible log
// argument.
bool accumulate_event(const ProjectedStats& stats, const double* x, double epsilon, std::size_t e,
                      Mode mode, Partial& out, VectorXd& cvec, std::vector<double>& wbuf) {
    const int r = stats.r;
    const int K = stats.K;
    const int L = stats.block_len();
    const SuffStats& ts = *stats.ts;
    const auto& entry = ts.events[e];
    const double* prow = &stats.P[static_cast<std::size_t>(entry.type) * r];
    const double* qe = &stats.q[e * static_cast<std::size_t>(r) * K];
    const double* dvec = ts.event_baseline(e);

    // shared per-event vector: w = [ q (r*K) | baseline decay (K+1) ]
    double* w = wbuf.data();
    std::copy_n(qe, static_cast<std::size_t>(r) * K, w);
    std::copy_n(dvec, K + 1, w + static_cast<std::size_t>(r) * K);

    double s = 0.0;
    double base_arg[64];  // r <= 63 in practice; guarded by caller
    for (int i = 0; i < r; ++i) {
        const double* blk = x + static_cast<std::size_t>(i) * L;
        double inner = 0.0;
        for (int t = 0; t < L; ++t) inner += blk[t] * w[t];
        double ab = 0.0;
        for (int k = 0; k <= K; ++k) ab += blk[r * K + k] * dvec[k];
        base_arg[i] = ab;
        s += prow[i] * inner;
    }
    if (!(s > 0.0)) return false;
    out.value += std::log(s);

    if (mode != Mode::Value) {
        const double inv_s = 1.0 / s;
        for (int i = 0; i < r; ++i) {
            const double c = prow[i] * inv_s;
            if (c == 0.0) continue;
            double* gblk = out.grad.data() + static_cast<std::size_t>(i) * L;
            for (int t = 0; t < L; ++t) gblk[t] += c * w[t];
            if (mode == Mode::GradDiag) {
                double* dblk = out.hdiag.data() + static_cast<std::size_t>(i) * L;
                for (int t = 0; t < L; ++t) dblk[t] += (c * w[t]) * (c * w[t]);
            }
        }
        if (mode == Mode::Hess) {
            for (int i = 0; i < r; ++i) {
                double* cblk = cvec.data() + static_cast<std::size_t>(i) * L;
                for (int t = 0; t < L; ++t) cblk[t] = prow[i] * w[t];
            }
            out.hess.selfadjointView<Eigen::Lower>().rankUpdate(cvec, -inv_s * inv_s);
        }
    }

    if (epsilon > 0.0) {
        // baseline positivity rows, one per target group
        for (int i = 0; i < r; ++i) {
            const double a = base_arg[i];
            if (!(a > 0.0)) return false;
            out.value += epsilon * std::log(a);
            if (mode != Mode::Value) {
                const double c = epsilon / a;
                double* gblk = out.grad.data() + stats.base_index(i, 0);
                for (int k = 0; k <= K; ++k) gblk[k] += c * dvec[k];
                if (mode == Mode::GradDiag) {
                    double* dblk = out.hdiag.data() + stats.base_index(i, 0);
                    const double c2 = epsilon / (a * a);
                    for (int k = 0; k <= K; ++k) dblk[k] += c2 * dvec[k] * dvec[k];
                }
                if (mode == Mode::Hess) {
                    const double h = -epsilon / (a * a);
                    const int off = stats.base_index(i, 0);
                    for (int kb = 0; kb <= K; ++kb)
                        for (int ka = kb; ka <= K; ++ka)
                            out.hess(off + ka, off + kb) += h * dvec[ka] * dvec[kb];
                }
            }
        }
        // triggering positivity rows, one per (predecessor row, group pair)
        for (std::uint32_t ridx = entry.row_begin; ridx < entry.row_end; ++ridx) {
            const double* row = ts.row(ridx);
            for (int i = 0; i < r; ++i) {
                for (int j = 0; j < r; ++j) {
                    const int off = stats.trig_index(j, i, 1);
                    const double* blk = x + off;
                    double a = 0.0;
                    for (int k = 1; k <= K; ++k) a += blk[k - 1] * row[k];
                    if (!(a > 0.0)) return false;
                    out.value += epsilon * std::log(a);
                    if (mode != Mode::Value) {
                        const double c = epsilon / a;
                        double* gblk = out.grad.data() + off;
                        for (int k = 1; k <= K; ++k) gblk[k - 1] += c * row[k];
                        if (mode == Mode::GradDiag) {
                            double* dblk = out.hdiag.data() + off;
                            const double c2 = epsilon / (a * a);
                            for (int k = 1; k <= K; ++k) dblk[k - 1] += c2 * row[k] * row[k];
                        }
                        if (mode == Mode::Hess) {
                            const double h = -epsilon / (a * a);
                            for (int kb = 1; kb <= K; ++kb)
                                for (int ka = kb; ka <= K; ++ka)
                                    out.hess(off + ka - 1, off + kb - 1) +=
                                        h * row[ka] * row[kb];
                        }
                    }
                }
            }
        }
    }
    return true;
}

bool evaluate(const ProjectedStats& stats, const double* x, double epsilon, Mode mode,
              double& value, VectorXd* grad, MatrixXd* hess, int threads,
              VectorXd* hdiag = nullptr) {
    const int n = stats.n_params();
    const std::size_t n_events = stats.n_events();
    const std::size_t nchunks = chunk_count(n_events);
    std::vector<Partial> partials(nchunks);

    parallel_chunks(n_events, threads, [&](std::size_t c, std::size_t begin, std::size_t end) {
        Partial& p = partials[c];
        if (mode != Mode::Value) p.grad = VectorXd::Zero(n);
        if (mode == Mode::GradDiag) p.hdiag = VectorXd::Zero(n);
        if (mode == Mode::Hess) p.hess = MatrixXd::Zero(n, n);
        VectorXd cvec(n);
        std::vector<double> wbuf(stats.block_len());
        for (std::size_t e = begin; e < end; ++e) {
            if (!accumulate_event(stats, x, epsilon, e, mode, p, cvec, wbuf)) {
                p.feasible = false;
                return;
            }
        }
    });

    value = 0.0;
    if (grad) grad->setZero(n);
    if (hdiag) hdiag->setZero(n);
    if (hess) hess->setZero(n, n);
    for (std::size_t c = 0; c < nchunks; ++c) {
        if (!partials[c].feasible) return false;
        value += partials[c].value;
        if (grad) *grad += partials[c].grad;
        if (hdiag && partials[c].hdiag.size()) *hdiag += partials[c].hdiag;
        if (hess) *hess += partials[c].hess;
    }
    for (int t = 0; t < n; ++t) value -= stats.b[t] * x[t];
    if (grad)
        for (int t = 0; t < n; ++t) (*grad)[t] -= stats.b[t];
    if (hess) *hess = hess->selfadjointView<Eigen::Lower>();  // mirror
    return true;
}

// Largest step along dir keeping every log argument positive (exact scan of
// the same rows the objective visits); infinity when nothing caps it.
double max_feasible_step(const ProjectedStats& stats, const VectorXd& x, const VectorXd& dir,
                         double epsilon, int threads) {
    const int r = stats.r;
    const int K = stats.K;
    const int L = stats.block_len();
    const SuffStats& ts = *stats.ts;
    const std::size_t n_events = stats.n_events();
    const std::size_t nchunks = chunk_count(n_events);
    std::vector<double> partial(nchunks, std::numeric_limits<double>::infinity());
    parallel_chunks(n_events, threads, [&](std::size_t c, std::size_t begin, std::size_t end) {
        double tmax = std::numeric_limits<double>::infinity();
        auto cap = [&](double a, double slope) {
            if (slope < 0.0 && a > 0.0) tmax = std::min(tmax, a / -slope);
        };
        for (std::size_t e = begin; e < end; ++e) {
            const auto& entry = ts.events[e];
            const double* prow = &stats.P[static_cast<std::size_t>(entry.type) * r];
            const double* qe = &stats.q[e * static_cast<std::size_t>(r) * K];
            const double* dvec = ts.event_baseline(e);
            double s = 0.0, sd = 0.0;
            for (int i = 0; i < r; ++i) {
                const double* blk = x.data() + static_cast<std::size_t>(i) * L;
                const double* dblk = dir.data() + static_cast<std::size_t>(i) * L;
                double inner = 0.0, innerd = 0.0, ab = 0.0, abd = 0.0;
                for (int j = 0; j < r; ++j)
                    for (int k = 1; k <= K; ++k) {
                        const double q = qe[j * K + (k - 1)];
                        inner += blk[j * K + (k - 1)] * q;
                        innerd += dblk[j * K + (k - 1)] * q;
                    }
                for (int k = 0; k <= K; ++k) {
                    ab += blk[r * K + k] * dvec[k];
                    abd += dblk[r * K + k] * dvec[k];
                }
                if (epsilon > 0.0) cap(ab, abd);
                s += prow[i] * (inner + ab);
                sd += prow[i] * (innerd + abd);
            }
            cap(s, sd);
            if (epsilon > 0.0) {
                for (std::uint32_t ridx = entry.row_begin; ridx < entry.row_end; ++ridx) {
                    const double* row = ts.row(ridx);
                    for (int i = 0; i < r; ++i)
                        for (int j = 0; j < r; ++j) {
                            const int off = stats.trig_index(j, i, 1);
                            double a = 0.0, ad = 0.0;
                            for (int k = 1; k <= K; ++k) {
                                a += x[off + k - 1] * row[k];
                                ad += dir[off + k - 1] * row[k];
                            }
                            cap(a, ad);
                        }
                }
            }
        }
        partial[c] = tmax;
    });
    double tmax = std::numeric_limits<double>::infinity();
    for (double t : partial) tmax = std::min(tmax, t);
    return tmax;
}

struct ActiveMask {
    std::vector<std::uint8_t> active;
    bool everything = true;
};

ActiveMask make_mask(const ProjectedStats& stats) {
    ActiveMask mask;
    mask.active.assign(stats.n_params(), 1);
    if (stats.n_events() == 0) {
        std::fill(mask.active.begin(), mask.active.end(), 0);
        mask.everything = false;
    } else if (!stats.has_trigger_rows) {
        // no observed excitation anywhere: the triggering coefficients only
        // enter linearly and are pinned at zero
        for (int i = 0; i < stats.r; ++i)
            for (int j = 0; j < stats.r; ++j)
                for (int k = 1; k <= stats.K; ++k) mask.active[stats.trig_index(j, i, k)] = 0;
        mask.everything = false;
    }
    return mask;
}

void apply_mask(const ActiveMask& mask, VectorXd& x) {
    if (mask.everything) return;
    for (int t = 0; t < x.size(); ++t)
        if (!mask.active[t]) x[t] = 0.0;
}

// Backtracking with a feasibility pre-check; accepts the first step that both
// stays strictly feasible and satisfies the Armijo condition. Returns the
// accepted value, or the current one if the search stalls (t underflows).
bool line_search(const ProjectedStats& stats, double epsilon, int threads, const VectorXd& x,
                 const VectorXd& dir, double f0, double slope, VectorXd& x_out, double& f_out,
                 double t0 = 1.0) {
    double t = t0;
    VectorXd cand(x.size());
    for (int it = 0; it < 60; ++it) {
        cand = x + t * dir;
        double f = 0.0;
        if (evaluate(stats, cand.data(), epsilon, Mode::Value, f, nullptr, nullptr, threads) &&
            f >= f0 + kArmijo * t * slope) {
            x_out = cand;
            f_out = f;
            return true;
        }
        t *= kShrink;
    }
    return false;
}

AlphaResult solve_newton(const ProjectedStats& stats, double epsilon, const Hyperparams& hp,
                         const ActiveMask& mask, int threads, VectorXd& x) {
    AlphaResult res;
    const int n = stats.n_params();
    VectorXd grad(n);
    MatrixXd hess(n, n);
    double f = 0.0;

    for (int iter = 0; iter < hp.max_newton_iters; ++iter) {
        if (!evaluate(stats, x.data(), epsilon, Mode::Hess, f, &grad, &hess, threads))
            throw std::runtime_error("optimize_alpha: iterate left the feasible region");
        if (!mask.everything)
            for (int t = 0; t < n; ++t)
                if (!mask.active[t]) grad[t] = 0.0;

        MatrixXd A = -hess;
        if (!mask.everything)
            for (int t = 0; t < n; ++t)
                if (!mask.active[t]) {
                    A.row(t).setZero();
                    A.col(t).setZero();
                    A(t, t) = 1.0;
                }

        // factor with a growing ridge if the curvature is numerically flat
        double ridge = 0.0;
        Eigen::LLT<MatrixXd> llt;
        for (int attempt = 0; attempt < 12; ++attempt) {
            MatrixXd Ar = A;
            if (ridge > 0.0) Ar.diagonal().array() += ridge;
            llt.compute(Ar);
            if (llt.info() == Eigen::Success) break;
            ridge = (ridge == 0.0) ? 1e-10 * (1.0 + A.diagonal().maxCoeff()) : ridge * 10.0;
        }
        if (llt.info() != Eigen::Success) {
            res.warnings.push_back("newton: hessian factorization failed");
            break;
        }
        if (ridge > 0.0) res.warnings.push_back("newton: ridge " + std::to_string(ridge));

        VectorXd step = llt.solve(grad);
        const double decrement_sq = grad.dot(step);
        res.iterations = iter + 1;
        const double tol = std::max(1e-12, 0.01 * hp.rel_tol * (1.0 + std::abs(f)));
        if (decrement_sq * 0.5 <= tol) {
            res.converged = true;
            break;
        }
        double f_new = f;
        VectorXd x_new = x;
        const double tmax = max_feasible_step(stats, x, step, epsilon, threads);
        const double t0 = std::min(1.0, 0.995 * tmax);
        if (!line_search(stats, epsilon, threads, x, step, f, decrement_sq, x_new, f_new, t0)) {
            res.warnings.push_back("newton: line search stalled");
            break;
        }
        x = x_new;
        f = f_new;
    }
    res.objective = f;
    res.grad_norm = grad.norm();
    return res;
}

AlphaResult solve_lbfgs(const ProjectedStats& stats, double epsilon, const Hyperparams& hp,
                        const ActiveMask& mask, int threads, VectorXd& x) {
    AlphaResult res;
    const int n = stats.n_params();
    const int max_iters = std::max(1000, 20 * hp.max_newton_iters);
    const int memory = 10;

    std::deque<VectorXd> s_hist, y_hist;
    std::deque<double> rho_hist;

    VectorXd grad(n), grad_prev(n), hdiag(n);
    double f = 0.0;
    if (!evaluate(stats, x.data(), epsilon, Mode::GradDiag, f, &grad, nullptr, threads, &hdiag))
        throw std::runtime_error("optimize_alpha: iterate left the feasible region");
    int slow_steps = 0;
    for (int iter = 0; iter < max_iters; ++iter) {
        if (!mask.everything)
            for (int t = 0; t < n; ++t)
                if (!mask.active[t]) grad[t] = 0.0;

        // two-loop recursion with the diagonal curvature as the base metric
        VectorXd q = grad;
        std::vector<double> a(s_hist.size());
        for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
            a[i] = rho_hist[i] * s_hist[i].dot(q);
            q -= a[i] * y_hist[i];
        }
        const double dfloor = 1e-12 * (1.0 + hdiag.maxCoeff());
        for (int t = 0; t < n; ++t) q[t] /= std::max(hdiag[t], dfloor);
        if (!s_hist.empty()) {
            // classical curvature rescaling of the base metric
            const VectorXd& yv = y_hist.back();
            double ydy = 0.0;
            for (int t = 0; t < n; ++t) ydy += yv[t] * yv[t] / std::max(hdiag[t], dfloor);
            const double sy = s_hist.back().dot(yv);
            if (ydy > 0.0 && sy > 0.0) q *= sy / ydy;
        }
        for (std::size_t i = 0; i < s_hist.size(); ++i) {
            const double bcoef = rho_hist[i] * y_hist[i].dot(q);
            q += (a[i] - bcoef) * s_hist[i];
        }
        VectorXd dir = q;
        double slope = grad.dot(dir);
        if (slope <= 0.0) {  // fall back to steepest ascent
            dir = grad;
            slope = grad.squaredNorm();
        }
        // slope is the first-order predicted gain of a unit step; treat it
        // like a Newton decrement
        const double tol0 = std::max(1e-12, 0.01 * hp.rel_tol * (1.0 + std::abs(f)));
        if (0.5 * slope <= tol0) {
            res.converged = true;
            break;
        }

        double f_new = f;
        VectorXd x_new = x;
        res.iterations = iter + 1;
        const double tmax = max_feasible_step(stats, x, dir, epsilon, threads);
        const double t0 = std::min(1.0, 0.995 * tmax);
        if (!line_search(stats, epsilon, threads, x, dir, f, slope, x_new, f_new, t0)) {
            res.warnings.push_back("lbfgs: line search stalled");
            break;
        }
        grad_prev = grad;
        if (!evaluate(stats, x_new.data(), epsilon, Mode::GradDiag, f_new, &grad, nullptr,
                      threads, &hdiag))
            throw std::runtime_error("optimize_alpha: iterate left the feasible region");

        VectorXd sv = x_new - x;
        VectorXd yv = grad_prev - grad;  // = -(grad_new - grad_prev), curvature of -F
        const double sy = sv.dot(yv);
        if (sy > 1e-12 * sv.norm() * yv.norm()) {
            s_hist.push_back(std::move(sv));
            y_hist.push_back(std::move(yv));
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > memory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }
        const double tol = std::max(1e-12, 0.01 * hp.rel_tol * (1.0 + std::abs(f_new)));
        const double gain = f_new - f;
        x = std::move(x_new);
        f = f_new;
        // require persistent stalls before giving up; single short steps are
        // common while the curvature history warms up
        if (gain <= tol) {
            if (++slow_steps >= 8) {
                res.converged = true;
                break;
            }
        } else {
            slow_steps = 0;
        }
    }
    res.objective = f;
    res.grad_norm = grad.norm();
    return res;
}

}  // namespace

ProjectedStats project_tensors(const LowRankModel& model, const SuffStats& ts, int threads) {
    const int d = model.d;
    const int r = model.r;
    const int K = model.K;
    ProjectedStats stats;
    stats.d = d;
    stats.r = r;
    stats.K = K;
    stats.ts = &ts;
    stats.P.resize(static_cast<std::size_t>(d) * r);
    for (int u = 0; u < d; ++u)
        for (int i = 0; i < r; ++i) stats.P[static_cast<std::size_t>(u) * r + i] = model.p(u, i);

    const std::size_t n_events = ts.n_events();
    stats.q.assign(n_events * static_cast<std::size_t>(r) * K, 0.0);
    stats.has_trigger_rows = !ts.row_type.empty();

    parallel_chunks(n_events, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t e = begin; e < end; ++e) {
            const auto& entry = ts.events[e];
            double* qe = &stats.q[e * static_cast<std::size_t>(r) * K];
            for (std::uint32_t ridx = entry.row_begin; ridx < entry.row_end; ++ridx) {
                const int v = ts.row_type[ridx];
                const double* row = ts.row(ridx);
                for (int j = 0; j < r; ++j) {
                    const double pvj = stats.P[static_cast<std::size_t>(v) * r + j];
                    if (pvj == 0.0) continue;
                    for (int k = 1; k <= K; ++k) qe[j * K + (k - 1)] += pvj * row[k];
                }
            }
        }
    });

    // linear term: triggering part via aggregated integrals and out-neighbor
    // projections, baseline part via the window integrals
    stats.b.assign(stats.n_params(), 0.0);
    std::vector<double> colsum(r, 0.0);
    for (int u = 0; u < d; ++u)
        for (int i = 0; i < r; ++i) colsum[i] += stats.P[static_cast<std::size_t>(u) * r + i];
    for (int i = 0; i < r; ++i)
        for (int k = 0; k <= K; ++k) stats.b[stats.base_index(i, k)] = colsum[i] * ts.agg_window[k];
    for (int v = 0; v < d; ++v) {
        const double* w = &ts.agg_integ[static_cast<std::size_t>(v) * (K + 1)];
        if (ts.out_of[v].empty()) continue;
        double out_sum[64];
        for (int i = 0; i < r; ++i) {
            double acc = 0.0;
            for (int u : ts.out_of[v]) acc += stats.P[static_cast<std::size_t>(u) * r + i];
            out_sum[i] = acc;
        }
        for (int j = 0; j < r; ++j) {
            const double pvj = stats.P[static_cast<std::size_t>(v) * r + j];
            if (pvj == 0.0) continue;
            for (int i = 0; i < r; ++i) {
                const double scale = pvj * out_sum[i];
                if (scale == 0.0) continue;
                for (int k = 1; k <= K; ++k)
                    stats.b[stats.trig_index(j, i, k)] += scale * w[k];
            }
        }
    }
    return stats;
}

std::vector<double> pack_alpha(const LowRankModel& model) {
    const int r = model.r;
    const int K = model.K;
    const int L = r * K + (K + 1);
    std::vector<double> x(static_cast<std::size_t>(r) * L, 0.0);
    for (int i = 0; i < r; ++i) {
        for (int j = 0; j < r; ++j)
            for (int k = 1; k <= K; ++k) x[i * L + j * K + (k - 1)] = model.a(j, i, k);
        for (int k = 0; k <= K; ++k) x[i * L + r * K + k] = model.beta(i, k);
    }
    return x;
}

void unpack_alpha(const std::vector<double>& x, LowRankModel& model) {
    const int r = model.r;
    const int K = model.K;
    const int L = r * K + (K + 1);
    for (int i = 0; i < r; ++i) {
        for (int j = 0; j < r; ++j)
            for (int k = 1; k <= K; ++k) model.a(j, i, k) = x[i * L + j * K + (k - 1)];
        for (int k = 0; k <= K; ++k) model.beta(i, k) = x[i * L + r * K + k];
    }
    model.enforce_augmentation();
}

bool barrier_objective(const std::vector<double>& x, const ProjectedStats& stats, double epsilon,
                       double& value, std::vector<double>* grad, std::vector<double>* hess,
                       int threads) {
    if (static_cast<int>(x.size()) != stats.n_params())
        throw std::invalid_argument("barrier_objective: wrong parameter count");
    VectorXd g;
    MatrixXd H;
    const bool ok = evaluate(stats, x.data(), epsilon, hess ? Mode::Hess : (grad ? Mode::Grad : Mode::Value),
                             value, grad ? &g : nullptr, hess ? &H : nullptr, threads);
    if (!ok) return false;
    if (grad) grad->assign(g.data(), g.data() + g.size());
    if (hess) hess->assign(H.data(), H.data() + H.size());
    return true;
}

AlphaResult optimize_alpha(LowRankModel& model, const SuffStats& ts, const Hyperparams& hp,
                           const AlphaOptions& opts) {
    hp.validate();
    if (model.r > 63) throw std::invalid_argument("optimize_alpha: rank too large");
    ProjectedStats stats = project_tensors(model, ts, opts.threads);
    const int n = stats.n_params();
    const ActiveMask mask = make_mask(stats);

    VectorXd x = Eigen::Map<const VectorXd>(pack_alpha(model).data(), n);
    apply_mask(mask, x);

    if (stats.n_events() == 0) {
        // nothing observed: all coefficients rest at zero
        unpack_alpha(std::vector<double>(x.data(), x.data() + n), model);
        AlphaResult res;
        res.converged = true;
        return res;
    }

    // the warm start must be strictly feasible; fall back to a flat positive
    // start when it is not (can happen after a projection re-randomization)
    double f0 = 0.0;
    AlphaResult res;
    if (!evaluate(stats, x.data(), hp.epsilon, Mode::Value, f0, nullptr, nullptr, opts.threads)) {
        x.setConstant(0.1 / (hp.K * hp.r));
        apply_mask(mask, x);
        res.warnings.push_back("warm start infeasible; reset to flat positive values");
        if (!evaluate(stats, x.data(), hp.epsilon, Mode::Value, f0, nullptr, nullptr,
                      opts.threads))
            throw std::runtime_error(
                "optimize_alpha: no feasible start (some event type has an all-zero projection "
                "row)");
    }

    const bool newton = opts.solver == AlphaOptions::Solver::Newton ||
                        (opts.solver == AlphaOptions::Solver::Auto && n <= opts.dense_param_limit);

    auto run = [&](double eps) {
        AlphaResult r0 = newton ? solve_newton(stats, eps, hp, mask, opts.threads, x)
                                : solve_lbfgs(stats, eps, hp, mask, opts.threads, x);
        res.objective = r0.objective;
        res.grad_norm = r0.grad_norm;
        res.iterations += r0.iterations;
        res.converged = r0.converged;
        res.warnings.insert(res.warnings.end(), r0.warnings.begin(), r0.warnings.end());
    };
    run(hp.epsilon);
    if (hp.epsilon_decay_pass && hp.epsilon > 0.0) run(hp.epsilon / 10.0);

    unpack_alpha(std::vector<double>(x.data(), x.data() + n), model);
    return res;
}

}  // namespace lrhawkes
