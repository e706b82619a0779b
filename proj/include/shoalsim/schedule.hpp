#pragma once

#include <cstdint>
#include <vector>

#include "shoalsim/types.hpp"

namespace shoalsim {

enum class Score : std::uint8_t { High, Low };

// Per-validator standing used to bias future anchor assignment. Everyone
// starts High; a skipped anchor demotes its author, an ordered anchor
// restores it.
struct ReputationState {
    std::vector<Score> score_of;

    static ReputationState all_high(std::uint32_t n) {
        return ReputationState{std::vector<Score>(n, Score::High)};
    }
};

/**
 * Maps rounds to anchor authors for one protocol instance (epoch).
 *
 * Two flavours:
 *  - round-robin: leader_of(r) = r mod n. Used whenever reputation is off.
 *  - weighted: a stateless pseudo-random draw keyed by
 *    (epoch_seed, epoch_tag, round). Every validator derives the identical
 *    schedule from the agreed reputation state, so no coordination is
 *    needed. The draw is splitmix64-based and bit-exact across platforms;
 *    see README "Determinism" for the precise construction.
 */
struct AnchorSchedule {
    Round start_round = 0;
    std::uint64_t epoch_tag = 0;
    std::uint32_t n = 0;
    bool weighted = false;
    std::uint64_t seed = 0;
    std::vector<double> weights;  // per validator, only for weighted draws
    double total_weight = 0.0;

    ValidatorId leader_of(Round r) const;
};

/// Round-robin schedule for the first epoch.
AnchorSchedule initial_schedule(std::uint32_t n, std::uint64_t epoch_seed);

/// Weighted schedule for a follow-up epoch: High scores weigh w_high, Low
/// scores w_low. Requires w_low > 0 and w_high >= w_low so nobody is ever
/// fully excluded.
AnchorSchedule derive_schedule(const ReputationState& rep, double w_high, double w_low,
                               std::uint64_t epoch_seed, std::uint64_t epoch_tag,
                               Round start_round);

}  // namespace shoalsim
