#include "lrhawkes/tensors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lrhawkes/parallel.hpp"

namespace lrhawkes {

namespace {

// Rows whose slowest term drops below this are removed from the active set;
// the values are indistinguishable from zero at every downstream use.
constexpr double kDecayFloor = 1e-300;

struct LocalBuild {
    std::vector<SuffStats::EventEntry> events;
    std::vector<double> baseline;
    std::vector<int> row_type;
    std::vector<double> row_vals;
    std::vector<int> integ_type;
    std::vector<double> integ_vals;
    std::vector<double> window;  // K+1
};

// Streaming scan of one realization. Maintains, for every type seen so far,
// the decayed sums C_v[k]; advancing time multiplies each by exp(-k delta dt).
// Events sharing a timestamp are parked in `pending` and only enter C once
// time moves, so simultaneous events never see each other.
void build_realization_streaming(const Realization& re, const Network& net,
                                 const Hyperparams& hp, LocalBuild& out) {
    const int d = net.d;
    const int K = hp.K;
    const int stride = K + 1;

    std::vector<int> slot_of(d, -1);
    std::vector<int> active;          // types with a live C row
    std::vector<double> C;            // active.size() x stride
    std::vector<int> pending;         // types at the current timestamp
    std::vector<int> integ_slot(d, -1);
    std::vector<int> integ_touched;

    out.window.assign(stride, 0.0);
    for (int k = 0; k <= K; ++k)
        out.window[k] = exp_integral(k, hp.gamma, re.t_plus - re.t_minus);
    out.events.reserve(re.events.size());
    out.baseline.reserve(re.events.size() * stride);

    double last_t = re.t_minus;
    for (const Event& ev : re.events) {
        if (ev.time > last_t) {
            for (int v : pending) {
                int s = slot_of[v];
                if (s < 0) {
                    s = static_cast<int>(active.size());
                    slot_of[v] = s;
                    active.push_back(v);
                    C.resize(C.size() + stride, 0.0);
                }
                double* row = &C[static_cast<std::size_t>(s) * stride];
                for (int k = 1; k <= K; ++k) row[k] += 1.0;
            }
            pending.clear();
            const double x = std::exp(-hp.delta * (ev.time - last_t));
            for (std::size_t s = 0; s < active.size();) {
                double* row = &C[s * stride];
                double pw = 1.0;
                for (int k = 1; k <= K; ++k) {
                    pw *= x;
                    row[k] *= pw;
                }
                if (row[1] < kDecayFloor) {
                    // swap-remove the dead row
                    const std::size_t last = active.size() - 1;
                    slot_of[active[s]] = -1;
                    if (s != last) {
                        active[s] = active[last];
                        slot_of[active[s]] = static_cast<int>(s);
                        std::copy_n(&C[last * stride], stride, &C[s * stride]);
                    }
                    active.pop_back();
                    C.resize(C.size() - stride);
                } else {
                    ++s;
                }
            }
            last_t = ev.time;
        }

        SuffStats::EventEntry entry;
        entry.type = ev.type;
        entry.row_begin = static_cast<std::uint32_t>(out.row_type.size());
        // predecessor rows, in increasing type order
        static thread_local std::vector<int> matched;
        matched.clear();
        for (int v : active)
            if (net.edge(v, ev.type)) matched.push_back(v);
        std::sort(matched.begin(), matched.end());
        for (int v : matched) {
            const double* row = &C[static_cast<std::size_t>(slot_of[v]) * stride];
            out.row_type.push_back(v);
            out.row_vals.push_back(0.0);
            for (int k = 1; k <= K; ++k) out.row_vals.push_back(row[k]);
        }
        entry.row_end = static_cast<std::uint32_t>(out.row_type.size());
        out.events.push_back(entry);

        const double y = std::exp(-hp.gamma * (ev.time - re.t_minus));
        double pw = 1.0;
        out.baseline.push_back(1.0);
        for (int k = 1; k <= K; ++k) {
            pw *= y;
            out.baseline.push_back(pw);
        }

        // integrated-basis accumulation for the compensator side
        int is = integ_slot[ev.type];
        if (is < 0) {
            is = static_cast<int>(integ_touched.size());
            integ_slot[ev.type] = is;
            integ_touched.push_back(ev.type);
            out.integ_vals.resize(out.integ_vals.size() + stride, 0.0);
        }
        {
            const double span = re.t_plus - ev.time;
            const double z = std::exp(-hp.delta * span);
            double* w = &out.integ_vals[static_cast<std::size_t>(is) * stride];
            double zk = 1.0;
            for (int k = 1; k <= K; ++k) {
                zk *= z;
                w[k] += (1.0 - zk) / (k * hp.delta);
            }
        }
        pending.push_back(ev.type);
    }

    // emit integral rows sorted by type
    std::vector<int> order(integ_touched.begin(), integ_touched.end());
    std::sort(order.begin(), order.end());
    std::vector<double> sorted_vals;
    sorted_vals.reserve(order.size() * stride);
    for (int v : order) {
        const double* w = &out.integ_vals[static_cast<std::size_t>(integ_slot[v]) * stride];
        sorted_vals.insert(sorted_vals.end(), w, w + stride);
        out.integ_type.push_back(v);
    }
    out.integ_vals = std::move(sorted_vals);
}

void build_realization_bruteforce(const Realization& re, const Network& net,
                                  const Hyperparams& hp, LocalBuild& out) {
    const int d = net.d;
    const int K = hp.K;
    const int stride = K + 1;

    out.window.assign(stride, 0.0);
    for (int k = 0; k <= K; ++k)
        out.window[k] = exp_integral(k, hp.gamma, re.t_plus - re.t_minus);

    std::vector<double> scratch(static_cast<std::size_t>(d) * stride);
    for (std::size_t m = 0; m < re.events.size(); ++m) {
        const Event& ev = re.events[m];
        std::fill(scratch.begin(), scratch.end(), 0.0);
        std::vector<int> touched;
        for (std::size_t l = 0; l < m; ++l) {
            const Event& pred = re.events[l];
            if (!(pred.time < ev.time)) continue;
            if (!net.edge(pred.type, ev.type)) continue;
            double* row = &scratch[static_cast<std::size_t>(pred.type) * stride];
            if (row[0] == 0.0) {
                touched.push_back(pred.type);
                row[0] = 1.0;  // occupancy mark, cleared below
            }
            for (int k = 1; k <= K; ++k)
                row[k] += std::exp(-k * hp.delta * (ev.time - pred.time));
        }
        std::sort(touched.begin(), touched.end());

        SuffStats::EventEntry entry;
        entry.type = ev.type;
        entry.row_begin = static_cast<std::uint32_t>(out.row_type.size());
        for (int v : touched) {
            double* row = &scratch[static_cast<std::size_t>(v) * stride];
            if (row[1] < kDecayFloor) continue;
            out.row_type.push_back(v);
            out.row_vals.push_back(0.0);
            for (int k = 1; k <= K; ++k) out.row_vals.push_back(row[k]);
        }
        entry.row_end = static_cast<std::uint32_t>(out.row_type.size());
        out.events.push_back(entry);

        for (int k = 0; k <= K; ++k)
            out.baseline.push_back(std::exp(-k * hp.gamma * (ev.time - re.t_minus)));
    }

    for (int v = 0; v < d; ++v) {
        std::vector<double> w(stride, 0.0);
        bool occurred = false;
        for (const Event& ev : re.events) {
            if (ev.type != v) continue;
            occurred = true;
            for (int k = 1; k <= K; ++k) w[k] += exp_integral(k, hp.delta, re.t_plus - ev.time);
        }
        if (occurred) {
            out.integ_type.push_back(v);
            out.integ_vals.insert(out.integ_vals.end(), w.begin(), w.end());
        }
    }
}

SuffStats merge_locals(const EventHistory& history, const Hyperparams& hp, const Network& net,
                       std::vector<LocalBuild>& locals) {
    const int d = net.d;
    const int K = hp.K;
    const int stride = K + 1;
    const int H = static_cast<int>(history.realizations.size());

    SuffStats ts;
    ts.d = d;
    ts.K = K;
    ts.gamma = hp.gamma;
    ts.delta = hp.delta;
    ts.out_of = net.out_of;
    ts.in_of = net.in_of;
    ts.event_begin.assign(H + 1, 0);
    ts.integ_begin.assign(H + 1, 0);
    ts.window_integral.assign(static_cast<std::size_t>(H) * stride, 0.0);

    std::size_t n_events = 0, n_rows = 0, n_integ = 0;
    for (const auto& lb : locals) {
        n_events += lb.events.size();
        n_rows += lb.row_type.size();
        n_integ += lb.integ_type.size();
    }
    ts.events.reserve(n_events);
    ts.baseline_decay.reserve(n_events * stride);
    ts.row_type.reserve(n_rows);
    ts.row_vals.reserve(n_rows * stride);
    ts.integ_type.reserve(n_integ);
    ts.integ_vals.reserve(n_integ * stride);

    for (int h = 0; h < H; ++h) {
        LocalBuild& lb = locals[h];
        const std::uint32_t row_off = static_cast<std::uint32_t>(ts.row_type.size());
        for (auto e : lb.events) {
            e.row_begin += row_off;
            e.row_end += row_off;
            ts.events.push_back(e);
        }
        ts.baseline_decay.insert(ts.baseline_decay.end(), lb.baseline.begin(), lb.baseline.end());
        ts.row_type.insert(ts.row_type.end(), lb.row_type.begin(), lb.row_type.end());
        ts.row_vals.insert(ts.row_vals.end(), lb.row_vals.begin(), lb.row_vals.end());
        ts.integ_type.insert(ts.integ_type.end(), lb.integ_type.begin(), lb.integ_type.end());
        ts.integ_vals.insert(ts.integ_vals.end(), lb.integ_vals.begin(), lb.integ_vals.end());
        std::copy(lb.window.begin(), lb.window.end(),
                  ts.window_integral.begin() + static_cast<std::size_t>(h) * stride);
        ts.event_begin[h + 1] = static_cast<std::uint32_t>(ts.events.size());
        ts.integ_begin[h + 1] = static_cast<std::uint32_t>(ts.integ_type.size());
        lb = LocalBuild{};  // release early
    }

    ts.agg_integ.assign(static_cast<std::size_t>(d) * stride, 0.0);
    ts.agg_window.assign(stride, 0.0);
    for (std::size_t ridx = 0; ridx < ts.integ_type.size(); ++ridx) {
        const double* w = ts.integ_row(static_cast<std::uint32_t>(ridx));
        double* acc = &ts.agg_integ[static_cast<std::size_t>(ts.integ_type[ridx]) * stride];
        for (int k = 0; k <= K; ++k) acc[k] += w[k];
    }
    for (int h = 0; h < H; ++h)
        for (int k = 0; k <= K; ++k)
            ts.agg_window[k] += ts.window_integral[static_cast<std::size_t>(h) * stride + k];
    return ts;
}

}  // namespace

SuffStats build_tensors(const EventHistory& history, const Network& net, const Hyperparams& hp,
                        int threads) {
    hp.validate();
    history.validate(net.d);
    const int H = static_cast<int>(history.realizations.size());
    std::vector<LocalBuild> locals(H);
    parallel_chunks(
        static_cast<std::size_t>(H), threads,
        [&](std::size_t, std::size_t begin, std::size_t end) {
            for (std::size_t h = begin; h < end; ++h)
                build_realization_streaming(history.realizations[h], net, hp, locals[h]);
        },
        /*chunk=*/1);
    return merge_locals(history, hp, net, locals);
}

SuffStats build_tensors_bruteforce(const EventHistory& history, const Network& net,
                                   const Hyperparams& hp) {
    hp.validate();
    history.validate(net.d);
    const int H = static_cast<int>(history.realizations.size());
    std::vector<LocalBuild> locals(H);
    for (int h = 0; h < H; ++h)
        build_realization_bruteforce(history.realizations[h], net, hp, locals[h]);
    return merge_locals(history, hp, net, locals);
}

std::size_t SuffStats::nnz_decay() const {
    return row_type.size() * K + events.size() * (K + 1);
}

std::size_t SuffStats::nnz_integral() const {
    return integ_type.size() * K + (event_begin.size() - 1) * (K + 1);
}

double SuffStats::decay_at(int h, int m, int u, int v, int k) const {
    const std::size_t e = event_begin[h] + m;
    if (e >= event_begin[h + 1]) throw std::out_of_range("decay_at: event index");
    const EventEntry& entry = events[e];
    if (u != entry.type) return 0.0;
    if (v == d) return baseline_decay[e * (K + 1) + k];
    if (v < 0 || v > d || k < 0 || k > K) throw std::out_of_range("decay_at: index");
    if (k == 0) return 0.0;
    for (std::uint32_t ridx = entry.row_begin; ridx < entry.row_end; ++ridx)
        if (row_type[ridx] == v) return row(ridx)[k];
    return 0.0;
}

bool SuffStats::edge(int v, int u) const {
    const auto& outs = out_of[v];
    return std::binary_search(outs.begin(), outs.end(), u);
}

double SuffStats::integral_at(int h, int u, int v, int k) const {
    if (u < 0 || u >= d) return 0.0;
    if (v == d) return window_integral[static_cast<std::size_t>(h) * (K + 1) + k];
    if (v < 0 || v > d || k < 0 || k > K) throw std::out_of_range("integral_at: index");
    if (k == 0 || !edge(v, u)) return 0.0;
    for (std::uint32_t ridx = integ_begin[h]; ridx < integ_begin[h + 1]; ++ridx)
        if (integ_type[ridx] == v) return integ_row(ridx)[k];
    return 0.0;
}

}  // namespace lrhawkes
