#pragma once

#include <string>

#include "shoalsim/metrics.hpp"
#include "shoalsim/sim.hpp"

namespace shoalsim {

/**
 * Persist a run under `dir`:
 *
 *   summary.json       counts, horizon, per-validator final state
 *   vertices.csv       one row per vertex ever built, with ordering columns
 *   commits_<v>.csv    one row per commit of validator v
 *   decisions_<v>.csv  anchor decisions in decision order
 *   rounds_<v>.csv     round entries with gate and fallback flag
 *
 * Bytes are deterministic for a given trace. All times are integer
 * microseconds, so nothing is lost to formatting.
 */
void write_trace_dir(const RunTrace& trace, const std::string& dir,
                     LatencyConvention convention = LatencyConvention::FirstOrderer);

/// Reload the reduction rows from a trace directory. reduce_metrics over
/// the result reproduces the original metrics byte for byte.
MetricsInput read_trace_metrics_input(const std::string& dir);

}  // namespace shoalsim
