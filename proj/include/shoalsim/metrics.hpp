#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "shoalsim/sim.hpp"

namespace shoalsim {

// Which ordering instant defines a vertex's latency when validators decide
// at different times. FirstOrderer is the default and what the acceptance
// numbers use; MeanOrderer averages the decision time across validators.
enum class LatencyConvention { FirstOrderer, MeanOrderer };

const char* latency_convention_name(LatencyConvention c);
LatencyConvention parse_latency_convention(const std::string& s);

// One commit of the timeline validator: when it decided and the mean
// creation-to-decision latency of the newly ordered slice.
struct TimelinePoint {
    double time_ms = 0.0;
    double latency_ms = 0.0;

    friend bool operator==(const TimelinePoint& a, const TimelinePoint& b) {
        return a.time_ms == b.time_ms && a.latency_ms == b.latency_ms;
    }
};

struct Metrics {
    LatencyConvention convention = LatencyConvention::FirstOrderer;

    double throughput_tps = 0.0;  // ordered transactions per virtual second
    double latency_avg_ms = 0.0;  // creation to ordering, all ordered vertices
    double latency_p50_ms = 0.0;
    double latency_p90_ms = 0.0;

    // Non-anchor vertices split by round parity: even rounds carry anchor
    // candidates under the initial cadence, odd rounds carry the votes.
    double latency_vote_round_ms = 0.0;
    double latency_anchor_round_ms = 0.0;

    // rounds between a vertex's round and the round whose anchor ordered it,
    // inclusive of the vote round (anchor itself counts 2).
    std::map<std::uint32_t, std::uint64_t> rounds_to_commit;

    std::uint64_t anchors_ordered = 0;
    std::uint64_t anchors_skipped = 0;
    std::uint64_t ordered_vertices = 0;
    std::uint64_t total_vertices = 0;
    std::uint64_t fallback_activations = 0;

    ValidatorId timeline_validator = 0;
    std::vector<TimelinePoint> timeline;
};

// -- reduction inputs ---------------------------------------------------------
// The trace store keeps exactly these rows, so metrics recomputed from disk
// go through the same arithmetic, in the same order, as the in-memory path.

// Per ordered vertex, aggregated across every validator that ordered it.
struct OrderedVertexStat {
    VertexId id;
    Round commit_anchor_round = 0;  // round of the anchor whose slice held it
    bool is_anchor = false;
    SimTime created_at = 0;
    SimTime first_at = 0;           // earliest decision across validators
    SimTime at_sum = 0;             // sum of decision times
    std::uint32_t orderers = 0;     // validators that ordered it
    std::uint32_t tx_count = 0;
};

// Per commit of one validator: slice latency aggregate in integer microseconds.
struct CommitStat {
    Round anchor_round = 0;
    ValidatorId anchor_author = 0;
    std::uint64_t epoch_tag = 0;
    SimTime decided_at = 0;
    std::uint32_t slice_size = 0;
    SimTime latency_sum = 0;  // sum over slice of decided_at - created_at
};

struct MetricsInput {
    LatencyConvention convention = LatencyConvention::FirstOrderer;
    SimTime horizon = 0;
    std::uint64_t total_vertices = 0;
    std::uint64_t anchors_ordered = 0;
    std::uint64_t anchors_skipped = 0;
    std::uint64_t fallback_activations = 0;
    ValidatorId timeline_validator = 0;
    std::vector<OrderedVertexStat> vertices;  // sorted by (round, author)
    std::vector<CommitStat> timeline;         // timeline validator, commit order
};

/// Shared reduction: both compute_metrics and the trace-directory reload
/// funnel through this, which is what makes recomputation byte-exact.
Metrics reduce_metrics(const MetricsInput& in);

/// Flatten a trace into reduction rows under the given latency convention.
MetricsInput metrics_input(const RunTrace& trace, LatencyConvention convention);

/// Lowest validator id that never crashes; 0 if every validator crashes.
ValidatorId timeline_source(const RunTrace& trace);

/// Reduce a trace to metrics. Pure: same trace, same metrics.
Metrics compute_metrics(const RunTrace& trace,
                        LatencyConvention convention = LatencyConvention::FirstOrderer);

/// Serialize to versioned JSON (schema 1). Byte-deterministic.
void write_metrics_json(const Metrics& m, const std::string& path);

/// Parse a metrics file. Throws std::runtime_error naming the file on a
/// missing or mismatched schema field, or unreadable input.
Metrics read_metrics_json(const std::string& path);

/// time_ms,latency_ms rows, fixed three-decimal precision.
void write_timeline_csv(const Metrics& m, const std::string& path);

}  // namespace shoalsim
