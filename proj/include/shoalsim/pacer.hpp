#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "shoalsim/dag.hpp"
#include "shoalsim/types.hpp"

namespace shoalsim {

enum class PacerKind {
    VanillaBullshark,      // anchor + vote timeouts
    VanillaNoVoteTimeout,  // anchor timeout only
    Baseline,              // pure n-f quorum, no timeouts
    BaselineWithFallback,  // baseline until skips pile up, then vanilla rules
};

struct PacerPolicy {
    PacerKind kind = PacerKind::Baseline;
    SimTime timeout = 1000 * 1000;    // 1000 ms
    std::uint32_t fallback_k = 10;    // consecutive skips arming the fallback
};

struct PacerState {
    Round current_round = 0;
    SimTime round_entered_at = 0;
    std::uint32_t consecutive_skipped_anchors = 0;
    bool fallback_active = false;
};

enum class AnchorOutcome { Ordered, Skipped };

// What the round looks like under the caller's active anchor schedule:
// the current round's anchor if one is scheduled, and the previous round's
// anchor when the current round is its vote round.
struct RoundContext {
    std::optional<VertexId> anchor_of_round;
    std::optional<VertexId> prev_round_anchor;
};

// Why an advancement fired (or what it is waiting for); recorded in traces.
enum class AdvanceGate {
    Quorum,          // n-f vertices in the round, nothing else required
    AnchorDelivered,
    AnchorTimeout,
    VoteQuorum,      // 2f+1 vertices voting for the previous anchor
    VoteTimeout,
};

struct ReadyCheck {
    bool ready = false;
    AdvanceGate gate = AdvanceGate::Quorum;
    // Quorum satisfied but a timeout still pending: worth arming a timer at
    // round_entered_at + timeout.
    bool awaiting_timeout = false;
};

/// Full gate evaluation for leaving state.current_round.
ReadyCheck evaluate_advance(const PacerState& state, const LocalDag& dag,
                            const RoundContext& ctx, SimTime now,
                            const PacerPolicy& policy);

/// Convenience predicate over evaluate_advance.
bool ready_to_advance(const PacerState& state, const LocalDag& dag,
                      const RoundContext& ctx, SimTime now, const PacerPolicy& policy);

/// Assemble the vertex for `round`: strong links to every round-1 vertex in
/// the dag (or the caller-supplied subset when an adversary trims it), plus
/// one weak link per validator whose newest delivered vertex the strong
/// closure of those parents misses. Throws if round-1 holds fewer than n-f
/// vertices.
Vertex build_vertex(ValidatorId author, const LocalDag& dag, Round round, SimTime now,
                    const PayloadMeta& payload,
                    const std::vector<VertexId>* strong_override = nullptr);

/// Feed one anchor decision into the skip counter. Ordered resets the
/// counter and disarms the fallback; Skipped increments it and, under
/// BaselineWithFallback, arms the fallback once fallback_k is reached.
void note_anchor_outcome(PacerState& state, AnchorOutcome outcome, const PacerPolicy& policy);

const char* pacer_kind_name(PacerKind kind);
std::optional<PacerKind> parse_pacer_kind(const std::string& name);
const char* advance_gate_name(AdvanceGate gate);

}  // namespace shoalsim
