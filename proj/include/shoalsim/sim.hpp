#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "shoalsim/bullshark.hpp"
#include "shoalsim/pacer.hpp"
#include "shoalsim/shoal.hpp"
#include "shoalsim/types.hpp"

namespace shoalsim {

inline constexpr SimTime kNeverCrashes = std::numeric_limits<SimTime>::max();

/**
 * One seeded experiment. Everything the run does is a pure function of this
 * struct; see README "Determinism".
 *
 * region_of / latency_ms / delay_mult may be left empty: normalization fills
 * a single region, a uniform 50 ms one-way delay, and 1.0 multipliers.
 */
struct SimConfig {
    std::uint32_t n = 4;
    std::vector<std::uint32_t> region_of;         // per validator
    std::vector<std::vector<double>> latency_ms;  // one-way, region x region
    double jitter_frac = 0.1;                     // uniform +-10% of base delay
    std::vector<double> delay_mult;               // per validator, >= 1.0 slows
    std::vector<std::pair<ValidatorId, SimTime>> crashes;  // fail-stop (id, time us)
    std::vector<ValidatorId> withholders;         // drop the anchor link when legal
    Round duration_rounds = 100;
    std::uint64_t seed = 1;
    PacerPolicy pacer;
    ShoalConfig shoal;
    std::uint32_t batch_tx = 5000;
    std::uint32_t tx_bytes = 270;
    bool record_deliveries = false;  // keep validator 0's acceptance log

    std::uint32_t f() const { return (n - 1) / 3; }
};

/// Fill defaulted fields (regions, latency, multipliers) for n validators.
SimConfig normalized(SimConfig cfg);

/// Throws std::invalid_argument naming the offending field. Expects a
/// normalized config.
void validate_config(const SimConfig& cfg);

// -- trace ------------------------------------------------------------------

// One row per round a validator entered: when, through which gate it left
// the previous round, and whether timeout fallback governed the new round.
struct RoundEntry {
    Round round = 0;
    SimTime entered_at = 0;
    AdvanceGate gate = AdvanceGate::Quorum;
    bool fallback_active = false;
};

struct DecisionEntry {
    VertexId anchor;
    Decision decision = Decision::Undecided;
    std::uint64_t epoch_tag = 0;
    SimTime at = 0;
};

struct FallbackEvent {
    ValidatorId validator = 0;
    SimTime at = 0;
    Round round = 0;     // pacer round when the flip happened
    bool active = false; // new state
    std::uint32_t counter = 0;
};

struct RunTrace {
    std::uint32_t n = 0;
    std::uint32_t f = 0;
    SimTime horizon = 0;  // virtual time at stop
    SimConfig config;     // normalized copy the run used

    std::vector<std::vector<CommitRecord>> commits;     // per validator
    std::vector<std::vector<DecisionEntry>> decisions;  // per validator
    std::vector<std::vector<RoundEntry>> rounds;        // per validator
    std::vector<FallbackEvent> fallback_events;
    std::vector<Round> final_round;    // per validator
    std::vector<SimTime> crashed_at;   // per validator, kNeverCrashes if live

    // Every vertex ever built, keyed by packed id: payload and created_at
    // for latency/throughput math.
    std::map<std::uint64_t, VertexPtr> vertices;

    // Validator 0's acceptance sequence (opt-in via record_deliveries).
    std::vector<std::pair<SimTime, VertexId>> deliveries0;
};

/// Execute the experiment. Deterministic: identical configs produce
/// identical traces.
RunTrace run(const SimConfig& cfg);

/// Withholding adversary: drop `anchor` from `parents` when at least n-f
/// parents remain, otherwise leave the set alone.
std::vector<VertexId> apply_adversary(std::vector<VertexId> parents, const VertexId& anchor,
                                      std::uint32_t n, std::uint32_t f);

/// Re-run the single-chain reference ordering over validator 0's recorded
/// acceptance sequence. Requires record_deliveries to have been set.
std::vector<CommitRecord> replay_classic_bullshark(const RunTrace& trace);

}  // namespace shoalsim
