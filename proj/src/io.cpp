#include "lrhawkes/io.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>

#include <json.hpp>

#include "lrhawkes/tensors.hpp"

namespace lrhawkes {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr const char* kEventsTag = "#lrhawkes-events-v1";
constexpr const char* kWindowsTag = "#lrhawkes-windows-v1";
constexpr const char* kNetworkTag = "#lrhawkes-network-v1";
constexpr const char* kMetricsTag = "#lrhawkes-metrics-v1";
constexpr const char* kScoresTag = "#lrhawkes-scores-v1";
constexpr const char* kCurvesTag = "#lrhawkes-curves-v1";
constexpr const char* kTensorsTag = "#lrhawkes-tensors-v1";

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot-open", path, 0, "cannot open for writing");
    return out;
}

struct CsvReader {
    std::string path;
    std::ifstream in;
    long line_no = 0;

    explicit CsvReader(const std::string& p, const char* tag, const char* header) : path(p), in(p) {
        if (!in) throw IoError("cannot-open", path, 0, "cannot open for reading");
        expect_line(tag, "format-version");
        expect_line(header, "header");
    }

    void expect_line(const std::string& want, const char* what) {
        std::string got;
        if (!std::getline(in, got)) throw IoError("truncated", path, line_no + 1, "missing " + std::string(what));
        ++line_no;
        if (!got.empty() && got.back() == '\r') got.pop_back();
        if (got != want)
            throw IoError("bad-format", path, line_no,
                          std::string("expected ") + what + " '" + want + "', found '" + got + "'");
    }

    bool next(std::vector<std::string>& fields) {
        std::string row;
        while (std::getline(in, row)) {
            ++line_no;
            if (!row.empty() && row.back() == '\r') row.pop_back();
            if (row.empty()) continue;
            fields.clear();
            std::size_t start = 0;
            for (;;) {
                const std::size_t comma = row.find(',', start);
                if (comma == std::string::npos) {
                    fields.push_back(row.substr(start));
                    break;
                }
                fields.push_back(row.substr(start, comma - start));
                start = comma + 1;
            }
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& code, const std::string& msg) const {
        throw IoError(code, path, line_no, msg);
    }

    long parse_int(const std::string& s, const char* what) {
        char* end = nullptr;
        const long v = std::strtol(s.c_str(), &end, 10);
        if (end == s.c_str() || *end != '\0') fail("malformed-row", std::string("bad ") + what + " '" + s + "'");
        return v;
    }

    double parse_double(const std::string& s, const char* what) {
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (end == s.c_str() || *end != '\0' || !std::isfinite(v))
            fail("malformed-row", std::string("bad ") + what + " '" + s + "'");
        return v;
    }
};

}  // namespace

std::string fmt_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// events
// ---------------------------------------------------------------------------

void save_events(const EventHistory& history, const std::string& events_path,
                 const std::string& windows_path) {
    {
        auto out = open_out(windows_path);
        out << kWindowsTag << "\nrealization,t_minus,t_plus\n";
        for (std::size_t h = 0; h < history.realizations.size(); ++h) {
            const auto& re = history.realizations[h];
            out << h << ',' << fmt_double(re.t_minus) << ',' << fmt_double(re.t_plus) << '\n';
        }
    }
    auto out = open_out(events_path);
    out << kEventsTag << "\nrealization,type,time\n";
    for (std::size_t h = 0; h < history.realizations.size(); ++h)
        for (const auto& ev : history.realizations[h].events)
            out << h << ',' << ev.type << ',' << fmt_double(ev.time) << '\n';
}

EventHistory load_events(const std::string& events_path, const std::string& windows_path, int d) {
    EventHistory history;
    {
        CsvReader rd(windows_path, kWindowsTag, "realization,t_minus,t_plus");
        std::vector<std::string> f;
        long expected = 0;
        while (rd.next(f)) {
            if (f.size() != 3) rd.fail("malformed-row", "expected 3 fields");
            const long h = rd.parse_int(f[0], "realization");
            if (h != expected)
                rd.fail("bad-realization-order", "realization ids must be 0,1,2,... in order");
            ++expected;
            Realization re;
            re.t_minus = rd.parse_double(f[1], "t_minus");
            re.t_plus = rd.parse_double(f[2], "t_plus");
            if (!(re.t_minus <= re.t_plus)) rd.fail("bad-window", "t_plus before t_minus");
            history.realizations.push_back(re);
        }
    }
    CsvReader rd(events_path, kEventsTag, "realization,type,time");
    std::vector<std::string> f;
    const long H = static_cast<long>(history.realizations.size());
    while (rd.next(f)) {
        if (f.size() != 3) rd.fail("malformed-row", "expected 3 fields");
        const long h = rd.parse_int(f[0], "realization");
        if (h < 0 || h >= H)
            rd.fail("unknown-realization", "realization " + f[0] + " has no window row");
        const long type = rd.parse_int(f[1], "type");
        if (type < 0 || type >= d)
            rd.fail("type-out-of-range",
                    "type " + f[1] + " outside [0," + std::to_string(d) + ")");
        const double time = rd.parse_double(f[2], "time");
        auto& re = history.realizations[h];
        if (time < re.t_minus || time > re.t_plus)
            rd.fail("time-outside-window", "event at " + f[2] + " outside realization " + f[0] +
                                               "'s window");
        if (!re.events.empty() && time < re.events.back().time)
            rd.fail("non-monotone-time",
                    "event times within a realization must be non-decreasing");
        re.events.push_back({time, static_cast<int>(type)});
    }
    history.validate(d);
    return history;
}

// ---------------------------------------------------------------------------
// network
// ---------------------------------------------------------------------------

void save_network(const Network& net, const std::string& path) {
    auto out = open_out(path);
    out << kNetworkTag << "\nsrc,dst\n";
    for (int v = 0; v < net.d; ++v)
        for (int u : net.out_of[v]) out << v << ',' << u << '\n';
}

Network load_network(const std::string& path, int d, std::vector<std::string>* warnings) {
    CsvReader rd(path, kNetworkTag, "src,dst");
    std::vector<std::uint8_t> adj(static_cast<std::size_t>(d) * d, 0);
    std::vector<std::string> f;
    std::size_t duplicates = 0;
    while (rd.next(f)) {
        if (f.size() != 2) rd.fail("malformed-row", "expected 2 fields");
        const long v = rd.parse_int(f[0], "src");
        const long u = rd.parse_int(f[1], "dst");
        if (v < 0 || v >= d) rd.fail("unknown-node", "src node " + f[0] + " outside [0," + std::to_string(d) + ")");
        if (u < 0 || u >= d) rd.fail("unknown-node", "dst node " + f[1] + " outside [0," + std::to_string(d) + ")");
        auto& cell = adj[static_cast<std::size_t>(v) * d + u];
        if (cell) ++duplicates;
        cell = 1;
    }
    if (duplicates && warnings)
        warnings->push_back(std::to_string(duplicates) + " duplicate edges collapsed");
    return Network::from_adjacency(d, std::move(adj));
}

// ---------------------------------------------------------------------------
// model / truth / report (JSON)
// ---------------------------------------------------------------------------

namespace {

ordered_json load_json(const std::string& path, const char* format_tag) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot-open", path, 0, "cannot open for reading");
    ordered_json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw IoError("bad-json", path, 0, e.what());
    }
    if (!j.contains("format") || j["format"] != format_tag)
        throw IoError("bad-format", path, 0, std::string("expected format tag ") + format_tag);
    return j;
}

}  // namespace

void save_model(const LowRankModel& model, const Hyperparams& hp, const std::string& path) {
    ordered_json j;
    j["format"] = "lrhawkes-model-v1";
    j["d"] = model.d;
    j["r"] = model.r;
    j["K"] = model.K;
    j["gamma"] = hp.gamma;
    j["delta"] = hp.delta;
    j["epsilon"] = hp.epsilon;
    std::vector<double> P_free;
    P_free.reserve(static_cast<std::size_t>(model.d) * model.r);
    for (int u = 0; u < model.d; ++u)
        for (int i = 0; i < model.r; ++i) P_free.push_back(model.p(u, i));
    j["P"] = P_free;
    std::vector<double> trig;
    trig.reserve(static_cast<std::size_t>(model.r) * model.r * model.K);
    for (int jj = 0; jj < model.r; ++jj)
        for (int i = 0; i < model.r; ++i)
            for (int k = 1; k <= model.K; ++k) trig.push_back(model.a(jj, i, k));
    j["alpha"] = trig;
    std::vector<double> base;
    base.reserve(static_cast<std::size_t>(model.r) * (model.K + 1));
    for (int i = 0; i < model.r; ++i)
        for (int k = 0; k <= model.K; ++k) base.push_back(model.beta(i, k));
    j["beta"] = base;
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

std::pair<LowRankModel, Hyperparams> load_model(const std::string& path) {
    ordered_json j = load_json(path, "lrhawkes-model-v1");
    Hyperparams hp;
    const int d = j.at("d").get<int>();
    hp.r = j.at("r").get<int>();
    hp.K = j.at("K").get<int>();
    hp.gamma = j.at("gamma").get<double>();
    hp.delta = j.at("delta").get<double>();
    hp.epsilon = j.at("epsilon").get<double>();

    LowRankModel model = LowRankModel::zeros(d, hp.r, hp.K);
    const auto P_free = j.at("P").get<std::vector<double>>();
    const auto trig = j.at("alpha").get<std::vector<double>>();
    const auto base = j.at("beta").get<std::vector<double>>();
    if (P_free.size() != static_cast<std::size_t>(d) * hp.r ||
        trig.size() != static_cast<std::size_t>(hp.r) * hp.r * hp.K ||
        base.size() != static_cast<std::size_t>(hp.r) * (hp.K + 1))
        throw IoError("bad-model", path, 0, "array sizes do not match dims");
    std::size_t idx = 0;
    for (int u = 0; u < d; ++u)
        for (int i = 0; i < hp.r; ++i) model.p(u, i) = P_free[idx++];
    idx = 0;
    for (int jj = 0; jj < hp.r; ++jj)
        for (int i = 0; i < hp.r; ++i)
            for (int k = 1; k <= hp.K; ++k) model.a(jj, i, k) = trig[idx++];
    idx = 0;
    for (int i = 0; i < hp.r; ++i)
        for (int k = 0; k <= hp.K; ++k) model.beta(i, k) = base[idx++];
    model.enforce_augmentation();
    return {std::move(model), hp};
}

void save_truth(const SyntheticConfig& cfg, const std::string& path) {
    ordered_json j;
    j["format"] = "lrhawkes-truth-v1";
    j["d"] = cfg.d;
    j["erdos_p"] = cfg.erdos_p;
    j["r_true"] = cfg.r_true;
    j["omega"] = cfg.omega;
    j["nu"] = cfg.nu;
    j["mu_true"] = cfg.mu_true;
    j["group_of"] = cfg.group_of;
    j["seed"] = cfg.seed;
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

SyntheticConfig load_truth(const std::string& path) {
    ordered_json j = load_json(path, "lrhawkes-truth-v1");
    SyntheticConfig cfg;
    cfg.d = j.at("d").get<int>();
    cfg.erdos_p = j.at("erdos_p").get<double>();
    cfg.r_true = j.at("r_true").get<int>();
    cfg.omega = j.at("omega").get<std::vector<double>>();
    cfg.nu = j.at("nu").get<std::vector<double>>();
    cfg.mu_true = j.at("mu_true").get<std::vector<double>>();
    cfg.group_of = j.at("group_of").get<std::vector<int>>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.validate();
    return cfg;
}

void save_report(const FitReport& report, const std::string& path) {
    ordered_json j;
    j["format"] = "lrhawkes-report-v1";
    j["converged"] = report.converged;
    j["outer_iters_used"] = report.outer_iters_used;
    j["loglik_trace"] = report.loglik_trace;
    std::string steps;
    for (FitStep s : report.trace_steps) steps.push_back(static_cast<char>(s));
    j["trace_steps"] = steps;
    j["wall_times"] = {{"build_tensors_s", report.wall_times.build_tensors_s},
                       {"alpha_s", report.wall_times.alpha_s},
                       {"projection_s", report.wall_times.projection_s},
                       {"total_s", report.wall_times.total_s}};
    j["warnings"] = report.warnings;
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// metric / score / curve tables
// ---------------------------------------------------------------------------

void save_metrics(const std::vector<std::pair<std::string, double>>& metrics,
                  const std::string& path) {
    auto out = open_out(path);
    out << kMetricsTag << "\nmetric,value\n";
    for (const auto& [name, value] : metrics) out << name << ',' << fmt_double(value) << '\n';
}

void save_scores(const std::vector<std::vector<double>>& scores,
                 const std::vector<std::pair<int, int>>& event_ids,
                 const std::vector<int>& true_types, const std::string& path) {
    auto out = open_out(path);
    out << kScoresTag << "\nrealization,event,true_type,scores...\n";
    for (std::size_t e = 0; e < scores.size(); ++e) {
        out << event_ids[e].first << ',' << event_ids[e].second << ',' << true_types[e];
        for (double s : scores[e]) out << ',' << fmt_double(s);
        out << '\n';
    }
}

void save_curves(const std::vector<CurvePoint>& points, const std::string& path) {
    auto out = open_out(path);
    out << kCurvesTag << "\nkind,src,dst,t,truth,fitted\n";
    for (const auto& p : points) {
        out << p.kind << ',' << p.src << ',' << p.dst << ',' << fmt_double(p.t) << ','
            << (std::isnan(p.truth) ? std::string("") : fmt_double(p.truth)) << ','
            << fmt_double(p.fitted) << '\n';
    }
}

void save_tensor_dump(const SuffStats& ts, const std::string& path) {
    auto out = open_out(path);
    out << kTensorsTag << "\ntensor,h,m,v,k,value\n";
    const int H = ts.n_realizations();
    for (int h = 0; h < H; ++h) {
        for (std::uint32_t e = ts.event_begin[h]; e < ts.event_begin[h + 1]; ++e) {
            const int m = static_cast<int>(e - ts.event_begin[h]);
            const auto& entry = ts.events[e];
            for (std::uint32_t ridx = entry.row_begin; ridx < entry.row_end; ++ridx)
                for (int k = 1; k <= ts.K; ++k)
                    out << "decay," << h << ',' << m << ',' << ts.row_type[ridx] << ',' << k << ','
                        << fmt_double(ts.row(ridx)[k]) << '\n';
            for (int k = 0; k <= ts.K; ++k)
                out << "decay," << h << ',' << m << ',' << ts.d << ',' << k << ','
                    << fmt_double(ts.event_baseline(e)[k]) << '\n';
        }
        for (std::uint32_t ridx = ts.integ_begin[h]; ridx < ts.integ_begin[h + 1]; ++ridx)
            for (int k = 1; k <= ts.K; ++k)
                out << "integral," << h << ",-1," << ts.integ_type[ridx] << ',' << k << ','
                    << fmt_double(ts.integ_row(ridx)[k]) << '\n';
        for (int k = 0; k <= ts.K; ++k)
            out << "integral," << h << ",-1," << ts.d << ',' << k << ','
                << fmt_double(ts.window_integral[static_cast<std::size_t>(h) * (ts.K + 1) + k])
                << '\n';
    }
}

}  // namespace lrhawkes
