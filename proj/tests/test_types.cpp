#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lrhawkes/likelihood.hpp"
#include "lrhawkes/rng.hpp"
#include "lrhawkes/tensors.hpp"
#include "lrhawkes/types.hpp"
#include "support/instances.hpp"

using namespace lrhawkes;
using lrhawkes::testing::make_instance;
using lrhawkes::testing::random_positive_model;

TEST_CASE("exp_integral basics") {
    CHECK(exp_integral(0, 0.5, 3.0) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(std::abs(exp_integral(1, 1.0, 1e9) - 1.0) < 1e-12);
    CHECK(exp_integral(2, 0.5, 2.0) ==
          doctest::Approx((1.0 - std::exp(-2.0)) / 1.0).epsilon(1e-14));
    CHECK(exp_integral(3, 2.0, 0.0) == 0.0);
    CHECK_THROWS_AS(exp_integral(1, 1.0, -0.5), std::invalid_argument);
    CHECK_THROWS_AS(exp_integral(1, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(exp_integral(-1, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("exp_integral matches quadrature") {
    Rng rng(11);
    for (int rep = 0; rep < 200; ++rep) {
        const int k = static_cast<int>(rng.below(5));
        const double x = rng.uniform(0.05, 3.0);
        const double t = rng.uniform(0.0, 20.0);
        // Simpson's rule on a fine grid
        const int n = 20000;
        const double h = t / n;
        double integral = 0.0;
        for (int i = 0; i <= n; ++i) {
            const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            integral += w * std::exp(-static_cast<double>(k) * x * (i * h));
        }
        integral *= h / 3.0;
        CHECK(std::abs(exp_integral(k, x, t) - integral) < 1e-8);
        CHECK(exp_integral(k, x, t) >= 0.0);
        CHECK(exp_integral(k, x, t) <= t + 1e-15);
    }
}

TEST_CASE("kernel and baseline evaluators") {
    Hyperparams hp;
    hp.K = 1;
    hp.r = 1;
    hp.delta = 1.0;
    LowRankModel model = LowRankModel::zeros(3, 1, 1);

    SUBCASE("zero coefficients give zero") {
        for (double t : {0.0, 0.5, 4.0}) CHECK(kernel_value(model, hp, 0, 0, t) == 0.0);
    }
    SUBCASE("t=0 sums the coefficients") {
        model.a(0, 0, 1) = 0.7;
        CHECK(kernel_value(model, hp, 0, 0, 0.0) == doctest::Approx(0.7));
    }
    SUBCASE("single exponential at ln 2") {
        model.a(0, 0, 1) = 2.0;
        CHECK(kernel_value(model, hp, 0, 0, std::log(2.0)) == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("baseline constant term") {
        model.beta(0, 0) = 0.3;
        model.beta(0, 1) = 0.5;
        CHECK(baseline_value(model, hp, 0, 0.0) == doctest::Approx(0.8));
        // far out only the constant survives
        CHECK(baseline_value(model, hp, 0, 500.0) == doctest::Approx(0.3).epsilon(1e-12));
    }
    SUBCASE("index range is checked") {
        CHECK_THROWS_AS(kernel_value(model, hp, 1, 0, 0.0), std::out_of_range);
        CHECK_THROWS_AS(baseline_value(model, hp, -1, 0.0), std::out_of_range);
    }
}

TEST_CASE("network construction and degrees") {
    Network full = Network::complete(4, true);
    CHECK(full.max_out_degree == 4);
    Network noself = Network::complete(4, false);
    CHECK(noself.max_out_degree == 3);
    CHECK_FALSE(noself.edge(2, 2));

    std::vector<std::uint8_t> adj = {0, 1, 0, 0, 0, 1, 0, 0, 0};
    Network net = Network::from_adjacency(3, adj);
    CHECK(net.edge(0, 1));
    CHECK(net.edge(1, 2));
    CHECK(net.max_out_degree == 1);
    CHECK(net.max_in_degree == 1);

    adj[0] = 2;
    CHECK_THROWS_AS(Network::from_adjacency(3, adj), std::invalid_argument);
}

TEST_CASE("event history validation") {
    EventHistory h;
    h.realizations.push_back({0.0, 10.0, {{1.0, 0}, {2.0, 1}}});
    CHECK_NOTHROW(h.validate(2));
    CHECK(h.total_events() == 2);
    CHECK(h.max_distinct_types(2) == 2);

    SUBCASE("type out of range") {
        h.realizations[0].events[1].type = 5;
        CHECK_THROWS_WITH_AS(h.validate(2), doctest::Contains("type out of range"),
                             std::invalid_argument);
    }
    SUBCASE("non-monotone times") {
        h.realizations[0].events[1].time = 0.5;
        CHECK_THROWS_AS(h.validate(2), std::invalid_argument);
    }
    SUBCASE("event after window end") {
        h.realizations[0].events[1].time = 11.0;
        CHECK_THROWS_AS(h.validate(2), std::invalid_argument);
    }
    SUBCASE("event before window start") {
        h.realizations[0].events[0].time = -1.0;
        CHECK_THROWS_AS(h.validate(2), std::invalid_argument);
    }
}

TEST_CASE("model augmentation pattern") {
    LowRankModel model = LowRankModel::zeros(3, 2, 2);
    CHECK(model.p(3, 2) == 1.0);
    CHECK(model.p(3, 0) == 0.0);
    CHECK(model.p(1, 2) == 0.0);
    model.beta(0, 1) = 0.4;
    CHECK(model.a(2, 0, 1) == 0.4);
    CHECK_NOTHROW(model.validate());
    model.p(0, 2) = 0.3;
    CHECK_THROWS_AS(model.validate(), std::invalid_argument);
}

TEST_CASE("hyperparams validation") {
    Hyperparams hp;
    CHECK_NOTHROW(hp.validate());
    hp.gamma = 0.0;
    CHECK_THROWS_AS(hp.validate(), std::invalid_argument);
}

// Expanding the augmented bilinear form over the stored statistics must
// reproduce the direct intensity at every event.
TEST_CASE("augmentation identity on random instances") {
    Rng rng(202);
    for (int rep = 0; rep < 25; ++rep) {
        auto inst = make_instance(rng);
        LowRankModel model = random_positive_model(rng, inst.net.d, inst.hp);
        SuffStats ts = build_tensors(inst.history, inst.net, inst.hp);
        const int d = inst.net.d;
        const int r = inst.hp.r;
        const int K = inst.hp.K;
        for (int h = 0; h < ts.n_realizations(); ++h) {
            const auto& re = inst.history.realizations[h];
            const int n_h = static_cast<int>(re.events.size());
            for (int m = 0; m < n_h; ++m) {
                double s = 0.0;
                for (int u = 0; u <= d; ++u)
                    for (int v = 0; v <= d; ++v)
                        for (int i = 0; i <= r; ++i)
                            for (int j = 0; j <= r; ++j)
                                for (int k = 0; k <= K; ++k)
                                    s += model.p(u, i) * model.p(v, j) * model.a(j, i, k) *
                                         ts.decay_at(h, m, u, v, k);
                // direct evaluation just after... at the event time, events at
                // strictly earlier times only
                const auto lam =
                    intensity(model, inst.hp, inst.history, inst.net, h, re.events[m].time);
                CHECK(s == doctest::Approx(lam[re.events[m].type]).epsilon(1e-9));
            }
        }
    }
}
