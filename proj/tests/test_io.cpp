#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "lrhawkes/io.hpp"
#include "lrhawkes/likelihood.hpp"
#include "lrhawkes/rng.hpp"
#include "support/instances.hpp"

using namespace lrhawkes;
using lrhawkes::testing::make_instance;
using lrhawkes::testing::random_positive_model;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("lrh_io_test_" + std::to_string(std::rand()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const char* name) const { return (path / name).string(); }
};

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
    std::ofstream out(path);
    for (const auto& l : lines) out << l << '\n';
}

}  // namespace

TEST_CASE("event round trip") {
    TempDir dir;
    Rng rng(601);
    auto inst = make_instance(rng);
    save_events(inst.history, dir.file("e.csv"), dir.file("w.csv"));
    EventHistory loaded = load_events(dir.file("e.csv"), dir.file("w.csv"), inst.net.d);
    REQUIRE(loaded.realizations.size() == inst.history.realizations.size());
    for (std::size_t h = 0; h < loaded.realizations.size(); ++h) {
        CHECK(loaded.realizations[h].t_minus == inst.history.realizations[h].t_minus);
        CHECK(loaded.realizations[h].t_plus == inst.history.realizations[h].t_plus);
        REQUIRE(loaded.realizations[h].events.size() ==
                inst.history.realizations[h].events.size());
        for (std::size_t m = 0; m < loaded.realizations[h].events.size(); ++m) {
            CHECK(loaded.realizations[h].events[m].time ==
                  inst.history.realizations[h].events[m].time);
            CHECK(loaded.realizations[h].events[m].type ==
                  inst.history.realizations[h].events[m].type);
        }
    }
}

TEST_CASE("empty events file with windows is a valid empty history") {
    TempDir dir;
    write_lines(dir.file("w.csv"), {"#lrhawkes-windows-v1", "realization,t_minus,t_plus", "0,0,10"});
    write_lines(dir.file("e.csv"), {"#lrhawkes-events-v1", "realization,type,time"});
    EventHistory h = load_events(dir.file("e.csv"), dir.file("w.csv"), 3);
    CHECK(h.realizations.size() == 1);
    CHECK(h.total_events() == 0);
}

TEST_CASE("loader errors carry codes and line numbers") {
    TempDir dir;
    write_lines(dir.file("w.csv"), {"#lrhawkes-windows-v1", "realization,t_minus,t_plus", "0,0,10"});

    SUBCASE("type out of range") {
        write_lines(dir.file("e.csv"), {"#lrhawkes-events-v1", "realization,type,time", "0,7,1.0"});
        try {
            load_events(dir.file("e.csv"), dir.file("w.csv"), 3);
            FAIL("expected a throw");
        } catch (const IoError& e) {
            CHECK(e.code == "type-out-of-range");
            CHECK(e.line == 3);
        }
    }
    SUBCASE("event outside the window") {
        write_lines(dir.file("e.csv"), {"#lrhawkes-events-v1", "realization,type,time", "0,1,11.5"});
        try {
            load_events(dir.file("e.csv"), dir.file("w.csv"), 3);
            FAIL("expected a throw");
        } catch (const IoError& e) {
            CHECK(e.code == "time-outside-window");
            CHECK(e.line == 3);
        }
    }
    SUBCASE("unknown realization") {
        write_lines(dir.file("e.csv"), {"#lrhawkes-events-v1", "realization,type,time", "4,1,1.0"});
        CHECK_THROWS_AS(load_events(dir.file("e.csv"), dir.file("w.csv"), 3), IoError);
    }
    SUBCASE("non-monotone times") {
        write_lines(dir.file("e.csv"),
                    {"#lrhawkes-events-v1", "realization,type,time", "0,1,5.0", "0,1,4.0"});
        try {
            load_events(dir.file("e.csv"), dir.file("w.csv"), 3);
            FAIL("expected a throw");
        } catch (const IoError& e) {
            CHECK(e.code == "non-monotone-time");
            CHECK(e.line == 4);
        }
    }
    SUBCASE("malformed row") {
        write_lines(dir.file("e.csv"), {"#lrhawkes-events-v1", "realization,type,time", "0,x,1.0"});
        CHECK_THROWS_AS(load_events(dir.file("e.csv"), dir.file("w.csv"), 3), IoError);
    }
    SUBCASE("wrong format tag") {
        write_lines(dir.file("e.csv"), {"#something-else", "realization,type,time"});
        try {
            load_events(dir.file("e.csv"), dir.file("w.csv"), 3);
            FAIL("expected a throw");
        } catch (const IoError& e) {
            CHECK(e.code == "bad-format");
        }
    }
}

TEST_CASE("network round trip, duplicates, and unknown nodes") {
    TempDir dir;
    Rng rng(611);
    auto inst = make_instance(rng);
    save_network(inst.net, dir.file("n.csv"));
    Network loaded = load_network(dir.file("n.csv"), inst.net.d);
    CHECK(loaded.adj == inst.net.adj);

    SUBCASE("duplicate edges collapse with a warning") {
        write_lines(dir.file("dup.csv"), {"#lrhawkes-network-v1", "src,dst", "0,1", "0,1", "1,1"});
        std::vector<std::string> warnings;
        Network net = load_network(dir.file("dup.csv"), 3, &warnings);
        CHECK(net.edge(0, 1));
        CHECK(net.edge(1, 1));
        REQUIRE(warnings.size() == 1);
        CHECK(warnings[0].find("1 duplicate") != std::string::npos);
    }
    SUBCASE("unknown node id is named") {
        write_lines(dir.file("bad.csv"), {"#lrhawkes-network-v1", "src,dst", "0,9"});
        try {
            load_network(dir.file("bad.csv"), 3);
            FAIL("expected a throw");
        } catch (const IoError& e) {
            CHECK(e.code == "unknown-node");
            CHECK(std::string(e.what()).find("9") != std::string::npos);
        }
    }
    SUBCASE("empty edge list gives an empty adjacency") {
        write_lines(dir.file("none.csv"), {"#lrhawkes-network-v1", "src,dst"});
        Network net = load_network(dir.file("none.csv"), 3);
        CHECK(net.max_out_degree == 0);
    }
}

TEST_CASE("model round trip reproduces the likelihood bit for bit") {
    TempDir dir;
    Rng rng(621);
    auto inst = make_instance(rng);
    while (inst.history.total_events() < 5) inst = make_instance(rng);
    LowRankModel model = random_positive_model(rng, inst.net.d, inst.hp);
    // perturb into full double precision territory
    for (auto& v : model.alpha) v *= 1.0 + 1e-13;
    model.enforce_augmentation();
    SuffStats ts = build_tensors(inst.history, inst.net, inst.hp);
    const double before = log_likelihood_tensor(model, ts);

    save_model(model, inst.hp, dir.file("m.json"));
    auto [loaded, hp2] = load_model(dir.file("m.json"));
    CHECK(loaded.P == model.P);
    CHECK(loaded.alpha == model.alpha);
    CHECK(hp2.gamma == inst.hp.gamma);
    CHECK(hp2.delta == inst.hp.delta);
    const double after = log_likelihood_tensor(loaded, ts);
    CHECK(before == after);  // exact
}

TEST_CASE("truth config round trip") {
    TempDir dir;
    SyntheticConfig cfg;
    cfg.d = 4;
    cfg.erdos_p = 0.3;
    cfg.r_true = 2;
    cfg.omega = {1.5, 2.5, 3.5, 9.5};
    cfg.nu = {0.01, 0.02, 0.0, 0.005};
    cfg.mu_true = {0.001, 0.01};
    cfg.group_of = {0, 1, 1, 0};
    cfg.seed = 42;
    save_truth(cfg, dir.file("t.json"));
    SyntheticConfig loaded = load_truth(dir.file("t.json"));
    CHECK(loaded.omega == cfg.omega);
    CHECK(loaded.nu == cfg.nu);
    CHECK(loaded.group_of == cfg.group_of);
    CHECK(loaded.seed == 42);
}

TEST_CASE("table writers start with their format tag") {
    TempDir dir;
    save_metrics({{"auc", 0.5}}, dir.file("m.csv"));
    std::ifstream in(dir.file("m.csv"));
    std::string first;
    std::getline(in, first);
    CHECK(first == "#lrhawkes-metrics-v1");
}
