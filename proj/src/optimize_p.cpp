#include "lrhawkes/optimize_p.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "lrhawkes/parallel.hpp"

namespace lrhawkes {

namespace {

constexpr double kPsiFloor = 1e-12;
constexpr double kQuadFloor = 1e-300;

inline double at(const std::vector<double>& p, int r, int u, int i) {
    return p[static_cast<std::size_t>(u) * (r + 1) + i];
}

// Unsymmetrized event form S_e(x, z) = sum over the event's stored entries of
// x[u_e,i] z[v,j] a(j,i,k) value[v,k]; the baseline slot pairs with row d of z.
double event_form(const QuadForms& quad, std::size_t e, const std::vector<double>& x,
                  const std::vector<double>& z) {
    const SuffStats& ts = *quad.ts;
    const int r = quad.r;
    const int K = quad.K;
    const auto& entry = ts.events[e];
    const double* dvec = ts.event_baseline(e);

    double out = 0.0;
    for (int i = 0; i <= r; ++i) {
        const double xi_u = at(x, r, entry.type, i);
        if (xi_u == 0.0) continue;
        double inner = 0.0;
        for (std::uint32_t ridx = entry.row_begin; ridx < entry.row_end; ++ridx) {
            const int v = ts.row_type[ridx];
            const double* row = ts.row(ridx);
            for (int j = 0; j <= r; ++j) {
                const double zv = at(z, r, v, j);
                if (zv == 0.0) continue;
                double dot = 0.0;
                for (int k = 1; k <= K; ++k) dot += quad.a(j, i, k) * row[k];
                inner += zv * dot;
            }
        }
        for (int j = 0; j <= r; ++j) {
            const double zd = at(z, r, quad.d, j);
            if (zd == 0.0) continue;
            double dot = 0.0;
            for (int k = 0; k <= K; ++k) dot += quad.a(j, i, k) * dvec[k];
            inner += zd * dot;
        }
        out += xi_u * inner;
    }
    return out;
}

// Compensator form SB(x, z) = sum_{u,i,v,j,k} x[u,i] z[v,j] a(j,i,k) B[u,v,k]
// through the aggregated integrals.
double compensator_form(const QuadForms& quad, const std::vector<double>& x,
                        const std::vector<double>& z) {
    const SuffStats& ts = *quad.ts;
    const int d = quad.d;
    const int r = quad.r;
    const int K = quad.K;
    const int stride = K + 1;

    double out = 0.0;
    // occurred types v, fanned out over their edges
    for (int v = 0; v < d; ++v) {
        const double* w = &ts.agg_integ[static_cast<std::size_t>(v) * stride];
        if (ts.out_of[v].empty()) continue;
        bool any = false;
        for (int k = 1; k <= K && !any; ++k) any = w[k] != 0.0;
        if (!any) continue;
        for (int i = 0; i <= r; ++i) {
            double xsum = 0.0;
            for (int u : ts.out_of[v]) xsum += at(x, r, u, i);
            if (xsum == 0.0) continue;
            double inner = 0.0;
            for (int j = 0; j <= r; ++j) {
                const double zv = at(z, r, v, j);
                if (zv == 0.0) continue;
                double dot = 0.0;
                for (int k = 1; k <= K; ++k) dot += quad.a(j, i, k) * w[k];
                inner += zv * dot;
            }
            out += xsum * inner;
        }
    }
    // window slot: every real type u against row d of z
    for (int i = 0; i <= r; ++i) {
        double xsum = 0.0;
        for (int u = 0; u < d; ++u) xsum += at(x, r, u, i);
        if (xsum == 0.0) continue;
        double inner = 0.0;
        for (int j = 0; j <= r; ++j) {
            const double zd = at(z, r, d, j);
            if (zd == 0.0) continue;
            double dot = 0.0;
            for (int k = 0; k <= K; ++k) dot += quad.a(j, i, k) * ts.agg_window[k];
            inner += zd * dot;
        }
        out += xsum * inner;
    }
    return out;
}

void check_projection_vector(const QuadForms& quad, const std::vector<double>& p) {
    const int d = quad.d;
    const int r = quad.r;
    if (p.size() != static_cast<std::size_t>(d + 1) * (r + 1))
        throw std::invalid_argument("projection vector has wrong size");
    for (int i = 0; i <= r; ++i)
        if (at(p, r, d, i) != (i == r ? 1.0 : 0.0))
            throw std::invalid_argument("projection vector: augmented row must be the unit slot");
    for (int u = 0; u < d; ++u)
        if (at(p, r, u, r) != 0.0)
            throw std::invalid_argument("projection vector: augmented column must be zero");
}

}  // namespace

QuadForms build_quadforms(const LowRankModel& model, const SuffStats& ts) {
    if (model.d != ts.d || model.K != ts.K)
        throw std::invalid_argument("build_quadforms: model and statistics disagree on dimensions");
    if (model.r > 63) throw std::invalid_argument("build_quadforms: rank too large");
    QuadForms quad;
    quad.d = model.d;
    quad.r = model.r;
    quad.K = model.K;
    quad.ts = &ts;
    quad.alpha = model.alpha;
    return quad;
}

double QuadForms::xi(int h, int m, int u, int i, int v, int j) const {
    double first = 0.0, second = 0.0;
    for (int k = 0; k <= K; ++k) {
        first += a(j, i, k) * ts->decay_at(h, m, u, v, k);
        second += a(i, j, k) * ts->decay_at(h, m, v, u, k);
    }
    return 0.5 * (first + second);
}

double QuadForms::psi(int u, int i, int v, int j) const {
    auto agg_integral = [&](int uu, int vv, int k) -> double {
        if (vv == d) return (uu < d) ? ts->agg_window[k] : 0.0;
        if (uu >= d || k == 0) return 0.0;
        if (!ts->edge(vv, uu)) return 0.0;
        return ts->agg_integ[static_cast<std::size_t>(vv) * (K + 1) + k];
    };
    double first = 0.0, second = 0.0;
    for (int k = 0; k <= K; ++k) {
        first += a(j, i, k) * agg_integral(u, v, k);
        second += a(i, j, k) * agg_integral(v, u, k);
    }
    return 0.5 * (first + second);
}

MMResult mm_update(std::vector<double>& p, const QuadForms& quad, int threads) {
    check_projection_vector(quad, p);
    const SuffStats& ts = *quad.ts;
    const int d = quad.d;
    const int r = quad.r;
    const int K = quad.K;
    const std::size_t n_events = ts.n_events();
    const std::size_t nchunks = chunk_count(n_events);

    // numerators sum_e (Xi_e p)_ui / (p^T Xi_e p) over free coordinates
    std::vector<std::vector<double>> partial_num(nchunks);
    std::vector<std::size_t> partial_skipped(nchunks, 0);

    parallel_chunks(n_events, threads, [&](std::size_t c, std::size_t begin, std::size_t end) {
        auto& num = partial_num[c];
        num.assign(static_cast<std::size_t>(d) * r, 0.0);
        std::vector<double> qt(static_cast<std::size_t>(r) * (K + 1));   // projected rows
        std::vector<double> w2(static_cast<std::size_t>(r) * (K + 1));   // reverse contraction
        for (std::size_t e = begin; e < end; ++e) {
            const auto& entry = ts.events[e];
            const double* dvec = ts.event_baseline(e);
            std::fill(qt.begin(), qt.end(), 0.0);
            for (std::uint32_t ridx = entry.row_begin; ridx < entry.row_end; ++ridx) {
                const int v = ts.row_type[ridx];
                const double* row = ts.row(ridx);
                for (int j = 0; j < r; ++j) {
                    const double pvj = at(p, r, v, j);
                    if (pvj == 0.0) continue;
                    for (int k = 1; k <= K; ++k) qt[j * (K + 1) + k] += pvj * row[k];
                }
            }
            // inner_i = sum_{j,k} a(j,i,k) qt[j,k] + sum_k beta(i,k) dvec[k]
            double quad_form = 0.0;
            double inner[64];
            for (int i = 0; i < r; ++i) {
                double acc = 0.0;
                for (int j = 0; j < r; ++j)
                    for (int k = 1; k <= K; ++k) acc += quad.a(j, i, k) * qt[j * (K + 1) + k];
                for (int k = 0; k <= K; ++k) acc += quad.a(r, i, k) * dvec[k];
                inner[i] = acc;
                quad_form += at(p, r, entry.type, i) * acc;
            }
            if (!(quad_form > kQuadFloor)) {
                ++partial_skipped[c];
                continue;
            }
            const double inv_q = 1.0 / quad_form;
            // (Xi p) restricted to the event row u_e ...
            for (int i = 0; i < r; ++i)
                num[static_cast<std::size_t>(entry.type) * r + i] += 0.5 * inner[i] * inv_q;
            // ... and to the predecessor rows
            for (int i = 0; i < r; ++i)
                for (int k = 1; k <= K; ++k) {
                    double acc = 0.0;
                    for (int j = 0; j < r; ++j) acc += quad.a(i, j, k) * at(p, r, entry.type, j);
                    w2[i * (K + 1) + k] = acc;
                }
            for (std::uint32_t ridx = entry.row_begin; ridx < entry.row_end; ++ridx) {
                const int v = ts.row_type[ridx];
                const double* row = ts.row(ridx);
                for (int i = 0; i < r; ++i) {
                    double acc = 0.0;
                    for (int k = 1; k <= K; ++k) acc += row[k] * w2[i * (K + 1) + k];
                    num[static_cast<std::size_t>(v) * r + i] += 0.5 * acc * inv_q;
                }
            }
        }
    });

    MMResult res;
    std::vector<double> num(static_cast<std::size_t>(d) * r, 0.0);
    for (std::size_t c = 0; c < nchunks; ++c) {
        res.skipped_events += partial_skipped[c];
        if (partial_num[c].empty()) continue;
        for (std::size_t t = 0; t < num.size(); ++t) num[t] += partial_num[c][t];
    }

    // denominators (Psi p)_ui through the aggregated integrals
    const int stride = K + 1;
    std::vector<double> m1(static_cast<std::size_t>(d) * r, 0.0);  // forward contraction per v
    for (int v = 0; v < d; ++v) {
        const double* w = &ts.agg_integ[static_cast<std::size_t>(v) * stride];
        for (int i = 0; i < r; ++i) {
            double acc = 0.0;
            for (int j = 0; j < r; ++j) {
                const double pvj = at(p, r, v, j);
                if (pvj == 0.0) continue;
                double dot = 0.0;
                for (int k = 1; k <= K; ++k) dot += quad.a(j, i, k) * w[k];
                acc += pvj * dot;
            }
            m1[static_cast<std::size_t>(v) * r + i] = acc;
        }
    }
    std::vector<double> window_part(r, 0.0);
    for (int i = 0; i < r; ++i) {
        double dot = 0.0;
        for (int k = 0; k <= K; ++k) dot += quad.a(r, i, k) * ts.agg_window[k];
        window_part[i] = dot;
    }
    std::vector<double> psi_p(static_cast<std::size_t>(d) * r, 0.0);
    for (int u = 0; u < d; ++u) {
        double pout[64] = {};
        for (int v : ts.out_of[u])
            for (int j = 0; j < r; ++j) pout[j] += at(p, r, v, j);
        const double* wu = &ts.agg_integ[static_cast<std::size_t>(u) * stride];
        for (int i = 0; i < r; ++i) {
            double acc = window_part[i];
            for (int v : ts.in_of[u]) acc += m1[static_cast<std::size_t>(v) * r + i];
            double back = 0.0;
            for (int j = 0; j < r; ++j) {
                if (pout[j] == 0.0) continue;
                double dot = 0.0;
                for (int k = 1; k <= K; ++k) dot += quad.a(i, j, k) * wu[k];
                back += pout[j] * dot;
            }
            psi_p[static_cast<std::size_t>(u) * r + i] = 0.5 * (acc + back);
        }
    }

    for (int u = 0; u < d; ++u)
        for (int i = 0; i < r; ++i) {
            const double den = psi_p[static_cast<std::size_t>(u) * r + i];
            double& coord = p[static_cast<std::size_t>(u) * (r + 1) + i];
            if (den <= kPsiFloor) {
                ++res.frozen_coords;
                continue;
            }
            coord *= std::sqrt(num[static_cast<std::size_t>(u) * r + i] / den);
        }
    return res;
}

double mm_objective(const std::vector<double>& p, const QuadForms& quad, int threads) {
    check_projection_vector(quad, p);
    const std::size_t n_events = quad.ts->n_events();
    const std::size_t nchunks = chunk_count(n_events);
    std::vector<double> partial(nchunks, 0.0);
    std::vector<char> ok(nchunks, 1);
    parallel_chunks(n_events, threads, [&](std::size_t c, std::size_t begin, std::size_t end) {
        double acc = 0.0;
        for (std::size_t e = begin; e < end; ++e) {
            const double s = event_form(quad, e, p, p);
            if (!(s > 0.0)) {
                ok[c] = 0;
                return;
            }
            acc -= std::log(s);
        }
        partial[c] = acc;
    });
    double f = 0.0;
    for (std::size_t c = 0; c < nchunks; ++c) {
        if (!ok[c]) return std::numeric_limits<double>::infinity();
        f += partial[c];
    }
    return f + compensator_form(quad, p, p);
}

double auxiliary_value(const std::vector<double>& p, const std::vector<double>& q,
                       const QuadForms& quad, int threads) {
    check_projection_vector(quad, p);
    check_projection_vector(quad, q);
    const int d = quad.d;
    const int r = quad.r;
    for (int u = 0; u < d; ++u)
        for (int i = 0; i < r; ++i) {
            if (!(at(p, r, u, i) > 0.0) || !(at(q, r, u, i) > 0.0))
                throw std::invalid_argument("auxiliary_value: free coordinates must be positive");
        }

    // y = q ln(p/q), z = p^2/q (coordinatewise; zero where the pattern is zero)
    std::vector<double> y(p.size(), 0.0), z(p.size(), 0.0);
    for (std::size_t t = 0; t < p.size(); ++t) {
        if (q[t] == 0.0) continue;
        y[t] = q[t] * std::log(p[t] / q[t]);
        z[t] = p[t] * p[t] / q[t];
    }

    const std::size_t n_events = quad.ts->n_events();
    const std::size_t nchunks = chunk_count(n_events);
    std::vector<double> partial(nchunks, 0.0);
    std::vector<char> ok(nchunks, 1);
    parallel_chunks(n_events, threads, [&](std::size_t c, std::size_t begin, std::size_t end) {
        double acc = 0.0;
        for (std::size_t e = begin; e < end; ++e) {
            const double qq = event_form(quad, e, q, q);
            if (!(qq > 0.0)) {
                ok[c] = 0;
                return;
            }
            const double qy = 0.5 * (event_form(quad, e, q, y) + event_form(quad, e, y, q));
            acc -= 2.0 * qy / qq + std::log(qq);
        }
        partial[c] = acc;
    });
    double g = 0.0;
    for (std::size_t c = 0; c < nchunks; ++c) {
        if (!ok[c]) throw std::runtime_error("auxiliary_value: non-positive event form at q");
        g += partial[c];
    }
    g += 0.5 * (compensator_form(quad, q, z) + compensator_form(quad, z, q));
    return g;
}

std::vector<double> projection_vector(const LowRankModel& model) {
    return model.P;
}

void set_projection(const std::vector<double>& p, LowRankModel& model) {
    if (p.size() != model.P.size())
        throw std::invalid_argument("set_projection: wrong size");
    model.P = p;
    model.enforce_augmentation();
}

}  // namespace lrhawkes
