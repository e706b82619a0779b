#include "shoalsim/pacer.hpp"

#include <algorithm>
#include <stdexcept>

namespace shoalsim {

ReadyCheck evaluate_advance(const PacerState& state, const LocalDag& dag,
                            const RoundContext& ctx, SimTime now,
                            const PacerPolicy& policy) {
    ReadyCheck out;
    const std::uint32_t n = dag.n();
    const std::uint32_t f = dag.f();
    const bool quorum = dag.round_size(state.current_round) >= n - f;
    if (!quorum) return out;  // never leave a round below n-f

    PacerKind kind = policy.kind;
    if (kind == PacerKind::BaselineWithFallback) {
        kind = state.fallback_active ? PacerKind::VanillaBullshark : PacerKind::Baseline;
    }
    if (kind == PacerKind::Baseline) {
        out.ready = true;
        out.gate = AdvanceGate::Quorum;
        return out;
    }

    const bool timed_out = now - state.round_entered_at >= policy.timeout;
    if (ctx.anchor_of_round) {
        // Anchor round: hold for the anchor itself, bounded by the timeout.
        if (dag.contains(*ctx.anchor_of_round)) {
            out.ready = true;
            out.gate = AdvanceGate::AnchorDelivered;
        } else if (timed_out) {
            out.ready = true;
            out.gate = AdvanceGate::AnchorTimeout;
        } else {
            out.awaiting_timeout = true;
        }
        return out;
    }
    if (ctx.prev_round_anchor && kind == PacerKind::VanillaBullshark) {
        // Vote round: hold for 2f+1 round vertices voting for the anchor.
        const std::uint32_t votes = dag.contains(*ctx.prev_round_anchor)
                                        ? dag.count_anchor_votes(*ctx.prev_round_anchor)
                                        : 0;
        if (votes >= 2 * f + 1) {
            out.ready = true;
            out.gate = AdvanceGate::VoteQuorum;
        } else if (timed_out) {
            out.ready = true;
            out.gate = AdvanceGate::VoteTimeout;
        } else {
            out.awaiting_timeout = true;
        }
        return out;
    }
    // No anchor scheduled in sight of this round: plain quorum rule.
    out.ready = true;
    out.gate = AdvanceGate::Quorum;
    return out;
}

bool ready_to_advance(const PacerState& state, const LocalDag& dag,
                      const RoundContext& ctx, SimTime now, const PacerPolicy& policy) {
    return evaluate_advance(state, dag, ctx, now, policy).ready;
}

Vertex build_vertex(ValidatorId author, const LocalDag& dag, Round round, SimTime now,
                    const PayloadMeta& payload,
                    const std::vector<VertexId>* strong_override) {
    Vertex v;
    v.id = VertexId{round, author};
    v.payload = payload;
    v.created_at = now;
    if (round == 0) return v;

    if (strong_override) {
        v.strong_parents = *strong_override;
    } else {
        for (const auto& p : dag.vertices_in_round(round - 1)) {
            v.strong_parents.push_back(p->id);
        }
    }
    if (v.strong_parents.size() < dag.n() - dag.f()) {
        throw std::logic_error("build_vertex: round " + std::to_string(round - 1) +
                               " holds fewer than n-f vertices");
    }

    // Weak links: pick up each validator's newest vertex that the strong
    // closure of the chosen parents cannot reach, so slow vertices still
    // enter causal histories.
    std::vector<Round> cov;
    if (strong_override && strong_override->size() != dag.round_size(round - 1)) {
        // Coverage of a trimmed parent set. Exact per-parent probing; trims
        // only occur for configured withholders, so this path stays cold.
        cov.assign(dag.n(), -1);
        for (ValidatorId q = 0; q < dag.n(); ++q) {
            const Round latest = dag.latest_round_of(q);
            if (latest < 0) continue;
            const VertexId target{latest, q};
            for (const auto& pid : *strong_override) {
                if (cov[q] >= latest) break;
                if (dag.strong_path_exists(pid, target)) cov[q] = latest;
            }
        }
    } else {
        cov = dag.strong_coverage_of_round(round - 1);
    }
    for (ValidatorId q = 0; q < dag.n(); ++q) {
        const Round latest = dag.latest_round_of(q);
        if (latest >= 0 && latest < round - 1 && latest > cov[q]) {
            v.weak_parents.push_back(VertexId{latest, q});
        }
    }
    std::sort(v.weak_parents.begin(), v.weak_parents.end());
    return v;
}

void note_anchor_outcome(PacerState& state, AnchorOutcome outcome, const PacerPolicy& policy) {
    if (outcome == AnchorOutcome::Ordered) {
        state.consecutive_skipped_anchors = 0;
        state.fallback_active = false;
        return;
    }
    ++state.consecutive_skipped_anchors;
    if (policy.kind == PacerKind::BaselineWithFallback &&
        state.consecutive_skipped_anchors >= policy.fallback_k) {
        state.fallback_active = true;
    }
}

const char* pacer_kind_name(PacerKind kind) {
    switch (kind) {
        case PacerKind::VanillaBullshark: return "vanilla";
        case PacerKind::VanillaNoVoteTimeout: return "vanilla-no-vote-timeout";
        case PacerKind::Baseline: return "baseline";
        case PacerKind::BaselineWithFallback: return "baseline-fallback";
    }
    return "?";
}

std::optional<PacerKind> parse_pacer_kind(const std::string& name) {
    if (name == "vanilla") return PacerKind::VanillaBullshark;
    if (name == "vanilla-no-vote-timeout") return PacerKind::VanillaNoVoteTimeout;
    if (name == "baseline") return PacerKind::Baseline;
    if (name == "baseline-fallback") return PacerKind::BaselineWithFallback;
    return std::nullopt;
}

const char* advance_gate_name(AdvanceGate gate) {
    switch (gate) {
        case AdvanceGate::Quorum: return "quorum";
        case AdvanceGate::AnchorDelivered: return "anchor-delivered";
        case AdvanceGate::AnchorTimeout: return "anchor-timeout";
        case AdvanceGate::VoteQuorum: return "vote-quorum";
        case AdvanceGate::VoteTimeout: return "vote-timeout";
    }
    return "?";
}

}  // namespace shoalsim
