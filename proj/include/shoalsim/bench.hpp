#pragma once

#include <string>
#include <vector>

#include "shoalsim/config_io.hpp"
#include "shoalsim/metrics.hpp"

namespace shoalsim {

/**
 * Execute one configured run and persist it under out_dir:
 *
 *   config.json    effective config after defaults and overrides
 *   metrics.json   reduced metrics (schema 1)
 *   timeline.csv   per-commit latency series
 *   trace/         full per-validator logs, see trace_io
 *
 * Returns the metrics. Throws on config or IO errors.
 */
Metrics run_experiment(const BenchConfig& cfg, const std::string& out_dir);

// Comparison of N metrics files against the first one.
struct ComparisonRow {
    std::string file;
    std::vector<double> values;     // one per metric column
    std::vector<double> delta_pct;  // percent vs the first row; zeros there
};

struct Comparison {
    std::vector<std::string> metrics;  // column names
    std::vector<ComparisonRow> rows;
};

/// Load ≥ 2 metrics files and tabulate percent deltas relative to the first.
/// Propagates read_metrics_json errors (schema mismatches name the file).
Comparison compare_metrics(const std::vector<std::string>& paths);

std::string comparison_text(const Comparison& c);
std::string comparison_csv(const Comparison& c);

}  // namespace shoalsim
