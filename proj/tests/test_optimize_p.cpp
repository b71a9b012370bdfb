#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "lrhawkes/likelihood.hpp"
#include "lrhawkes/optimize_p.hpp"
#include "lrhawkes/rng.hpp"
#include "support/instances.hpp"

using namespace lrhawkes;
using lrhawkes::testing::make_instance;
using lrhawkes::testing::random_positive_model;

namespace {

// dense evaluation of f(p) from the entry accessors; the oracle for the
// implicit fast paths
double dense_objective(const QuadForms& quad, const std::vector<double>& p) {
    const int dim = (quad.d + 1) * (quad.r + 1);
    double f = 0.0;
    for (int h = 0; h < quad.ts->n_realizations(); ++h) {
        const int n_h =
            static_cast<int>(quad.ts->event_begin[h + 1] - quad.ts->event_begin[h]);
        for (int m = 0; m < n_h; ++m) {
            double s = 0.0;
            for (int a = 0; a < dim; ++a)
                for (int b = 0; b < dim; ++b) {
                    const double x =
                        quad.xi(h, m, a / (quad.r + 1), a % (quad.r + 1), b / (quad.r + 1),
                                b % (quad.r + 1));
                    if (x != 0.0) s += p[a] * x * p[b];
                }
            f -= std::log(s);
        }
    }
    for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b) {
            const double x = quad.psi(a / (quad.r + 1), a % (quad.r + 1), b / (quad.r + 1),
                                      b % (quad.r + 1));
            if (x != 0.0) f += p[a] * x * p[b];
        }
    return f;
}

std::vector<double> positive_projection(Rng& rng, int d, int r) {
    std::vector<double> p(static_cast<std::size_t>(d + 1) * (r + 1), 0.0);
    for (int u = 0; u < d; ++u)
        for (int i = 0; i < r; ++i) p[static_cast<std::size_t>(u) * (r + 1) + i] =
            rng.uniform(0.05, 1.5);
    p[static_cast<std::size_t>(d) * (r + 1) + r] = 1.0;
    return p;
}

}  // namespace

TEST_CASE("quadratic forms are symmetric and vanish with zero coefficients") {
    Rng rng(401);
    auto inst = make_instance(rng);
    while (inst.history.total_events() < 3) inst = make_instance(rng);
    LowRankModel model = random_positive_model(rng, inst.net.d, inst.hp);
    SuffStats ts = build_tensors(inst.history, inst.net, inst.hp);
    QuadForms quad = build_quadforms(model, ts);
    const int r1 = model.r + 1;
    for (int a = 0; a < (model.d + 1) * r1; ++a)
        for (int b = 0; b < (model.d + 1) * r1; ++b) {
            CHECK(quad.xi(0, 0, a / r1, a % r1, b / r1, b % r1) ==
                  doctest::Approx(quad.xi(0, 0, b / r1, b % r1, a / r1, a % r1)).epsilon(1e-12));
            CHECK(quad.psi(a / r1, a % r1, b / r1, b % r1) ==
                  doctest::Approx(quad.psi(b / r1, b % r1, a / r1, a % r1)).epsilon(1e-12));
        }
    LowRankModel zero = LowRankModel::zeros(model.d, model.r, model.K);
    QuadForms qz = build_quadforms(zero, ts);
    for (int a = 0; a < (model.d + 1) * r1; ++a)
        for (int b = 0; b < (model.d + 1) * r1; ++b) {
            CHECK(qz.xi(0, 0, a / r1, a % r1, b / r1, b % r1) == 0.0);
            CHECK(qz.psi(a / r1, a % r1, b / r1, b % r1) == 0.0);
        }
}

TEST_CASE("implicit objective equals the dense assembly") {
    Rng rng(411);
    for (int rep = 0; rep < 8; ++rep) {
        auto inst = make_instance(rng, [] {
            lrhawkes::testing::InstanceOptions o;
            o.max_d = 6;
            o.max_events = 25;
            return o;
        }());
        if (inst.history.total_events() == 0) continue;
        LowRankModel model = random_positive_model(rng, inst.net.d, inst.hp);
        SuffStats ts = build_tensors(inst.history, inst.net, inst.hp);
        QuadForms quad = build_quadforms(model, ts);
        std::vector<double> p = projection_vector(model);
        const double fast = mm_objective(p, quad);
        const double dense = dense_objective(quad, p);
        CHECK(fast == doctest::Approx(dense).epsilon(1e-9));
        // and f(p) is the negated tensor log-likelihood
        CHECK(fast == doctest::Approx(-log_likelihood_tensor(model, ts)).epsilon(1e-9));
    }
}

TEST_CASE("scalar self-excitation sweep lands on the analytic maximizer") {
    // one type, one realization, two events; zero baseline coefficients make
    // the first event degenerate (it is skipped) and leave a single scalar
    // coordinate with pure forms: maximizing ln(xi p^2) - psi p^2 gives
    // p* = 1/sqrt(psi).
    Hyperparams hp;
    hp.K = 1;
    hp.r = 1;
    hp.delta = 1.0;
    EventHistory hist;
    hist.realizations.push_back({0.0, 2.0, {{0.0, 0}, {1.0, 0}}});
    Network net = Network::complete(1, true);
    SuffStats ts = build_tensors(hist, net, hp);

    const double fT = 1.0 - std::exp(-2.0), ft = 1.0 - std::exp(-1.0);
    const double a = 1.0 / (fT + ft);  // makes psi exactly 1
    LowRankModel model = LowRankModel::zeros(1, 1, 1);
    model.p(0, 0) = 1.0;
    model.a(0, 0, 1) = a;
    QuadForms quad = build_quadforms(model, ts);
    CHECK(quad.psi(0, 0, 0, 0) == doctest::Approx(1.0).epsilon(1e-12));

    for (double start : {0.3, 1.0, 1.7, 5.0}) {
        std::vector<double> p = {start, 0.0, 0.0, 1.0};
        MMResult res = mm_update(p, quad);
        CHECK(res.skipped_events == 1);  // the first event has no intensity
        CHECK(p[0] == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("sweeps never decrease the likelihood") {
    Rng rng(421);
    int done = 0;
    while (done < 25) {
        auto inst = make_instance(rng);
        if (inst.history.total_events() < 2) continue;
        LowRankModel model = random_positive_model(rng, inst.net.d, inst.hp);
        SuffStats ts = build_tensors(inst.history, inst.net, inst.hp);
        QuadForms quad = build_quadforms(model, ts);
        std::vector<double> p = positive_projection(rng, model.d, model.r);
        double f = mm_objective(p, quad);
        for (int sweep = 0; sweep < 10; ++sweep) {
            mm_update(p, quad);
            const double f2 = mm_objective(p, quad);
            CHECK(f2 <= f + 1e-9 * std::abs(f));
            f = f2;
        }
        ++done;
    }
}

TEST_CASE("a fixed point stays fixed") {
    // the scalar instance has the exact maximizer p* = 1; the update applied
    // there must return it unchanged
    Hyperparams hp;
    hp.K = 1;
    hp.r = 1;
    hp.delta = 1.0;
    EventHistory hist;
    hist.realizations.push_back({0.0, 2.0, {{0.0, 0}, {1.0, 0}}});
    Network net = Network::complete(1, true);
    SuffStats ts = build_tensors(hist, net, hp);
    const double fT = 1.0 - std::exp(-2.0), ft = 1.0 - std::exp(-1.0);
    LowRankModel model = LowRankModel::zeros(1, 1, 1);
    model.p(0, 0) = 1.0;
    model.a(0, 0, 1) = 1.0 / (fT + ft);
    QuadForms quad = build_quadforms(model, ts);
    std::vector<double> p = {1.0, 0.0, 0.0, 1.0};
    mm_update(p, quad);
    CHECK(p[0] == doctest::Approx(1.0).epsilon(1e-14));
    mm_update(p, quad);
    CHECK(p[0] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("auxiliary function touches and dominates") {
    Rng rng(441);
    int done = 0;
    while (done < 10) {
        auto inst = make_instance(rng, [] {
            lrhawkes::testing::InstanceOptions o;
            o.max_d = 6;
            o.max_events = 30;
            return o;
        }());
        if (inst.history.total_events() < 2) continue;
        LowRankModel model = random_positive_model(rng, inst.net.d, inst.hp);
        SuffStats ts = build_tensors(inst.history, inst.net, inst.hp);
        QuadForms quad = build_quadforms(model, ts);
        for (int pair = 0; pair < 50; ++pair) {
            std::vector<double> p = positive_projection(rng, model.d, model.r);
            std::vector<double> q = positive_projection(rng, model.d, model.r);
            const double fp = mm_objective(p, quad);
            const double gpq = auxiliary_value(p, q, quad);
            CHECK(gpq >= fp - 1e-12 * std::max(1.0, std::abs(fp)));
            const double fq = mm_objective(q, quad);
            const double gqq = auxiliary_value(q, q, quad);
            CHECK(gqq == doctest::Approx(fq).epsilon(1e-12));
        }
        ++done;
    }
}

TEST_CASE("the sweep minimizes the auxiliary function") {
    Rng rng(451);
    auto inst = make_instance(rng, [] {
        lrhawkes::testing::InstanceOptions o;
        o.max_d = 5;
        o.max_events = 20;
        return o;
    }());
    while (inst.history.total_events() < 5) inst = make_instance(rng);
    LowRankModel model = random_positive_model(rng, inst.net.d, inst.hp);
    SuffStats ts = build_tensors(inst.history, inst.net, inst.hp);
    QuadForms quad = build_quadforms(model, ts);

    std::vector<double> q = positive_projection(rng, model.d, model.r);
    std::vector<double> p = q;
    MMResult res = mm_update(p, quad);
    REQUIRE(res.frozen_coords == 0);

    // finite-difference gradient of g(., q) at the updated point, free
    // coordinates only
    double norm = 0.0, base_norm = 0.0;
    for (int u = 0; u < model.d; ++u)
        for (int i = 0; i < model.r; ++i) {
            const std::size_t idx = static_cast<std::size_t>(u) * (model.r + 1) + i;
            const double h = 1e-5 * std::max(1.0, p[idx]);
            auto pp = p, pm = p;
            pp[idx] += h;
            pm[idx] -= h;
            const double grad =
                (auxiliary_value(pp, q, quad) - auxiliary_value(pm, q, quad)) / (2 * h);
            norm += grad * grad;
            auto qp = q, qm = q;
            qp[idx] += h;
            qm[idx] -= h;
            const double gq =
                (auxiliary_value(qp, q, quad) - auxiliary_value(qm, q, quad)) / (2 * h);
            base_norm += gq * gq;
        }
    norm = std::sqrt(norm);
    base_norm = std::sqrt(base_norm);
    CHECK(norm <= 1e-6 * std::max(1.0, base_norm));
}

TEST_CASE("degenerate compensator coordinates are frozen") {
    // a type with no out-edges and no occurrences has (Psi p) = 0 in its row
    Hyperparams hp;
    hp.K = 1;
    hp.r = 1;
    EventHistory hist;
    hist.realizations.push_back({0.0, 5.0, {{1.0, 0}, {2.0, 0}}});
    std::vector<std::uint8_t> adj = {1, 0, 0, 0};  // only 0 -> 0
    Network net = Network::from_adjacency(2, adj);
    SuffStats ts = build_tensors(hist, net, hp);
    Rng rng(7);
    LowRankModel model = random_positive_model(rng, 2, hp);
    // zero baselines so the window term cannot leak into every coordinate
    for (int k = 0; k <= hp.K; ++k) model.beta(0, k) = 0.0;
    QuadForms quad = build_quadforms(model, ts);
    std::vector<double> p = positive_projection(rng, 2, 1);
    const double before = p[1 * 2 + 0];
    MMResult res = mm_update(p, quad);
    CHECK(res.frozen_coords == 1);
    CHECK(p[1 * 2 + 0] == before);
}
