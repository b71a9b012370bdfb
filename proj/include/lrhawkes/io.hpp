#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lrhawkes/simulate.hpp"
#include "lrhawkes/tensors.hpp"
#include "lrhawkes/types.hpp"

namespace lrhawkes {

// Parse/validation failure with a stable error code and, when applicable, the
// offending line.
struct IoError : std::runtime_error {
    IoError(std::string code_, const std::string& file, long line_, const std::string& what_)
        : std::runtime_error(file + (line_ > 0 ? ":" + std::to_string(line_) : "") + ": [" +
                             code_ + "] " + what_),
          code(std::move(code_)),
          line(line_) {}
    std::string code;
    long line = 0;
};

// All files start with a #lrhawkes-<kind>-v1 tag line. CSV columns use 0-based
// type/realization indices; doubles are written with 17 significant digits so
// that values round-trip exactly.

void save_events(const EventHistory& history, const std::string& events_path,
                 const std::string& windows_path);
EventHistory load_events(const std::string& events_path, const std::string& windows_path, int d);

void save_network(const Network& net, const std::string& path);
// Duplicate edges are collapsed (reported through *warnings when given).
Network load_network(const std::string& path, int d, std::vector<std::string>* warnings = nullptr);

void save_model(const LowRankModel& model, const Hyperparams& hp, const std::string& path);
std::pair<LowRankModel, Hyperparams> load_model(const std::string& path);

void save_truth(const SyntheticConfig& cfg, const std::string& path);
SyntheticConfig load_truth(const std::string& path);

void save_report(const FitReport& report, const std::string& path);

void save_metrics(const std::vector<std::pair<std::string, double>>& metrics,
                  const std::string& path);

// One row per event: realization, event index, true type, then d scores.
void save_scores(const std::vector<std::vector<double>>& scores,
                 const std::vector<std::pair<int, int>>& event_ids,
                 const std::vector<int>& true_types, const std::string& path);

struct CurvePoint {
    std::string kind;  // "kernel" or "baseline"
    int src = -1;      // -1 for baseline rows
    int dst = 0;
    double t = 0.0;
    double truth = 0.0;  // NaN when unknown
    double fitted = 0.0;
};
void save_curves(const std::vector<CurvePoint>& points, const std::string& path);

// Debug dump of the sparse statistics: rows (h,m,v,k,value) for the decayed
// sums, rows (h,-1,v,k,value) for the integrated basis.
void save_tensor_dump(const SuffStats& ts, const std::string& path);

std::string fmt_double(double v);

}  // namespace lrhawkes
