#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lrhawkes/rng.hpp"
#include "lrhawkes/tensors.hpp"
#include "support/instances.hpp"

using namespace lrhawkes;
using lrhawkes::testing::make_instance;
using lrhawkes::testing::max_tensor_diff;

TEST_CASE("streaming matches brute force on random instances") {
    Rng rng(31);
    for (int rep = 0; rep < 40; ++rep) {
        auto inst = make_instance(rng);
        SuffStats fast = build_tensors(inst.history, inst.net, inst.hp);
        SuffStats slow = build_tensors_bruteforce(inst.history, inst.net, inst.hp);
        CHECK(max_tensor_diff(fast, slow) < 1e-12);
    }
}

TEST_CASE("single event has only the baseline row") {
    Hyperparams hp;
    hp.K = 3;
    hp.gamma = 0.7;
    EventHistory h;
    h.realizations.push_back({1.0, 9.0, {{3.5, 1}}});
    Network net = Network::complete(2, true);
    SuffStats ts = build_tensors(h, net, hp);
    CHECK(ts.events.size() == 1);
    CHECK(ts.events[0].row_begin == ts.events[0].row_end);  // no predecessors
    for (int k = 0; k <= 3; ++k)
        CHECK(ts.decay_at(0, 0, 1, 2, k) ==
              doctest::Approx(std::exp(-k * 0.7 * (3.5 - 1.0))).epsilon(1e-14));
}

TEST_CASE("same-type pair at unit lag") {
    Hyperparams hp;
    hp.K = 3;
    hp.delta = 1.0;
    EventHistory h;
    h.realizations.push_back({0.0, 5.0, {{0.0, 0}, {1.0, 0}}});
    Network net = Network::complete(1, true);
    SuffStats ts = build_tensors(h, net, hp);
    for (int k = 1; k <= 3; ++k)
        CHECK(ts.decay_at(0, 1, 0, 0, k) ==
              doctest::Approx(std::exp(-static_cast<double>(k))).epsilon(1e-13));
}

TEST_CASE("empty adjacency leaves only baseline entries") {
    Rng rng(77);
    auto inst = make_instance(rng);
    Network none = Network::from_adjacency(
        inst.net.d, std::vector<std::uint8_t>(static_cast<std::size_t>(inst.net.d) * inst.net.d, 0));
    SuffStats ts = build_tensors(inst.history, none, inst.hp);
    CHECK(ts.row_type.empty());
    CHECK(ts.integ_type.size() > 0);  // integral rows exist but mask to zero
    for (int h = 0; h < ts.n_realizations(); ++h)
        for (int u = 0; u < ts.d; ++u)
            for (int v = 0; v < ts.d; ++v)
                for (int k = 0; k <= ts.K; ++k) CHECK(ts.integral_at(h, u, v, k) == 0.0);
}

TEST_CASE("empty history") {
    Hyperparams hp;
    hp.K = 2;
    hp.gamma = 0.5;
    EventHistory h;
    h.realizations.push_back({0.0, 4.0, {}});
    Network net = Network::complete(3, true);
    SuffStats ts = build_tensors(h, net, hp);
    CHECK(ts.n_events() == 0);
    for (int k = 0; k <= 2; ++k)
        CHECK(ts.integral_at(0, 0, 3, k) == doctest::Approx(exp_integral(k, 0.5, 4.0)));
    SuffStats slow = build_tensors_bruteforce(h, net, hp);
    CHECK(max_tensor_diff(ts, slow) == 0.0);
}

TEST_CASE("realizations are independent blocks") {
    Rng rng(99);
    auto inst = make_instance(rng);
    while (inst.history.realizations.size() < 2) inst = make_instance(rng);
    EventHistory swapped = inst.history;
    std::swap(swapped.realizations[0], swapped.realizations[1]);
    SuffStats a = build_tensors(inst.history, inst.net, inst.hp);
    SuffStats b = build_tensors(swapped, inst.net, inst.hp);
    // realization 0 of the original equals realization 1 of the swapped
    const int n0 = static_cast<int>(a.event_begin[1] - a.event_begin[0]);
    REQUIRE(n0 == static_cast<int>(b.event_begin[2] - b.event_begin[1]));
    for (int m = 0; m < n0; ++m)
        for (int v = 0; v <= a.d; ++v)
            for (int k = 0; k <= a.K; ++k) {
                const int u = a.events[a.event_begin[0] + m].type;
                CHECK(a.decay_at(0, m, u, v, k) == b.decay_at(1, m, u, v, k));
            }
}

TEST_CASE("simultaneous events do not excite each other") {
    Hyperparams hp;
    hp.K = 2;
    EventHistory h;
    h.realizations.push_back({0.0, 5.0, {{1.0, 0}, {1.0, 1}, {2.0, 0}}});
    Network net = Network::complete(2, true);
    SuffStats ts = build_tensors(h, net, hp);
    // second event: the tied first event is not a predecessor
    CHECK(ts.decay_at(0, 1, 1, 0, 1) == 0.0);
    // third event sees both, at lag 1
    CHECK(ts.decay_at(0, 2, 0, 0, 1) == doctest::Approx(std::exp(-1.0)));
    CHECK(ts.decay_at(0, 2, 0, 1, 1) == doctest::Approx(std::exp(-1.0)));
}

TEST_CASE("threaded build is identical to sequential") {
    Rng rng(123);
    auto inst = make_instance(rng);
    SuffStats one = build_tensors(inst.history, inst.net, inst.hp, 1);
    SuffStats four = build_tensors(inst.history, inst.net, inst.hp, 4);
    CHECK(one.row_vals == four.row_vals);
    CHECK(one.baseline_decay == four.baseline_decay);
    CHECK(one.integ_vals == four.integ_vals);
    CHECK(one.agg_integ == four.agg_integ);
}

TEST_CASE("sparsity and value bounds on generated instances") {
    Rng rng(555);
    for (int rep = 0; rep < 20; ++rep) {
        auto inst = make_instance(rng);
        SuffStats ts = build_tensors(inst.history, inst.net, inst.hp);
        const int sigma = inst.history.max_distinct_types(inst.net.d);
        // per-event predecessor rows are capped by in-degree and by the
        // distinct types of the realization
        for (std::size_t e = 0; e < ts.events.size(); ++e) {
            const auto& entry = ts.events[e];
            const int rows = static_cast<int>(entry.row_end - entry.row_begin);
            CHECK(rows <= std::min(static_cast<int>(inst.net.in_of[entry.type].size()), sigma));
        }
        CHECK(ts.row_type.size() <=
              ts.n_events() * static_cast<std::size_t>(
                                  std::min(inst.net.max_in_degree + 1, sigma + 1)));
        for (double v : ts.row_vals) {
            CHECK(v >= 0.0);
            CHECK(v <= static_cast<double>(ts.n_events()));
        }
        // every stored integral value is a sum of per-event terms, each below
        // both the window length and 1/(k delta)
        for (int h = 0; h < ts.n_realizations(); ++h) {
            const auto& re = inst.history.realizations[h];
            std::vector<int> counts(inst.net.d, 0);
            for (const auto& ev : re.events) ++counts[ev.type];
            for (std::uint32_t ridx = ts.integ_begin[h]; ridx < ts.integ_begin[h + 1]; ++ridx) {
                const int v = ts.integ_type[ridx];
                for (int k = 1; k <= ts.K; ++k) {
                    const double cap = counts[v] * std::min(re.t_plus - re.t_minus,
                                                            1.0 / (k * inst.hp.delta));
                    CHECK(ts.integ_row(ridx)[k] >= 0.0);
                    CHECK(ts.integ_row(ridx)[k] <= cap * (1.0 + 1e-12));
                }
            }
        }
    }
}

TEST_CASE("brute force skips events correctly under ties at window start") {
    // regression guard for the pending-flush logic: many ties in a row
    Hyperparams hp;
    hp.K = 2;
    EventHistory h;
    h.realizations.push_back(
        {0.0, 3.0, {{0.5, 0}, {0.5, 1}, {0.5, 0}, {1.5, 1}, {1.5, 0}, {3.0, 1}}});
    Network net = Network::complete(2, true);
    SuffStats fast = build_tensors(h, net, hp);
    SuffStats slow = build_tensors_bruteforce(h, net, hp);
    CHECK(max_tensor_diff(fast, slow) < 1e-14);
}
