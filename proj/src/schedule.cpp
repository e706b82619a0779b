#include "shoalsim/schedule.hpp"

#include <stdexcept>

#include "shoalsim/rng.hpp"

namespace shoalsim {

ValidatorId AnchorSchedule::leader_of(Round r) const {
    if (r < start_round) {
        throw std::invalid_argument("leader_of: round " + std::to_string(r) +
                                    " precedes epoch start " + std::to_string(start_round));
    }
    if (!weighted) {
        return static_cast<ValidatorId>(r % n);
    }
    // One draw per round: hash the key triple into [0, total_weight) and
    // walk the cumulative weights in validator order. Summation order is
    // fixed, so the result is identical wherever IEEE-754 doubles are.
    const std::uint64_t word = mix64(seed, epoch_tag, static_cast<std::uint64_t>(r));
    const double x = unit_double(word) * total_weight;
    double cum = 0.0;
    for (ValidatorId v = 0; v + 1 < n; ++v) {
        cum += weights[v];
        if (x < cum) return v;
    }
    return static_cast<ValidatorId>(n - 1);
}

AnchorSchedule initial_schedule(std::uint32_t n, std::uint64_t epoch_seed) {
    if (n < 4) {
        throw std::invalid_argument("initial_schedule: need n >= 4, got " + std::to_string(n));
    }
    AnchorSchedule s;
    s.start_round = 0;
    s.epoch_tag = 0;
    s.n = n;
    s.weighted = false;
    s.seed = epoch_seed;
    return s;
}

AnchorSchedule derive_schedule(const ReputationState& rep, double w_high, double w_low,
                               std::uint64_t epoch_seed, std::uint64_t epoch_tag,
                               Round start_round) {
    if (w_low <= 0.0 || w_high < w_low) {
        throw std::invalid_argument("derive_schedule: need w_high >= w_low > 0");
    }
    const std::uint32_t n = static_cast<std::uint32_t>(rep.score_of.size());
    if (n < 4) {
        throw std::invalid_argument("derive_schedule: need n >= 4");
    }
    AnchorSchedule s;
    s.start_round = start_round;
    s.epoch_tag = epoch_tag;
    s.n = n;
    s.weighted = true;
    s.seed = epoch_seed;
    s.weights.resize(n);
    for (std::uint32_t v = 0; v < n; ++v) {
        s.weights[v] = rep.score_of[v] == Score::High ? w_high : w_low;
        s.total_weight += s.weights[v];
    }
    return s;
}

}  // namespace shoalsim
