#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "shoalsim/bullshark.hpp"
#include "shoalsim/dag.hpp"
#include "shoalsim/schedule.hpp"
#include "shoalsim/types.hpp"

namespace shoalsim {

struct ShoalConfig {
    bool pipelining = true;
    bool leader_reputation = true;
    double w_high = 1.0;
    double w_low = 0.1;
    std::uint64_t epoch_seed = 0;
};

// Decisions of one resolved instance, wave-ascending: zero or more skips,
// then the ordered anchor. decided[w] is the wave-w anchor.
struct InstanceOutcome {
    std::uint64_t epoch_tag = 0;
    Round start_round = 0;
    std::vector<std::pair<VertexId, Decision>> decided;
};

// Everything one step() call produced. records[i] is the commit emitted by
// the instance described in instances[i]; both feed reputation and the
// fallback skip counter in decision order.
struct StepOutcome {
    std::vector<CommitRecord> records;
    std::vector<InstanceOutcome> instances;
};

/// Skipped authors drop to Low, ordered authors rise to High, everyone
/// else keeps their score.
ReputationState update_reputation(ReputationState rep,
                                  const std::vector<std::pair<VertexId, Decision>>& decided);

/**
 * Chains protocol instances at first-ordered-anchor boundaries.
 *
 * With pipelining the next instance starts one round above the ordered
 * anchor, so every round carries an anchor candidate. Without it the next
 * instance starts two rounds up, leaving the vote round anchor-free, which
 * reproduces the plain single-chain protocol exactly. Leader reputation
 * swaps the round-robin schedule for a score-weighted draw re-derived at
 * every instance boundary.
 */
class ShoalFrame {
  public:
    ShoalFrame(std::uint32_t n, std::uint32_t f, const ShoalConfig& cfg);

    /// Account one accepted vertex (cheap, incremental).
    void on_vertex(const Vertex& v);

    /// Resolve as far as the dag allows, possibly across several instances.
    StepOutcome step(const LocalDag& dag, SimTime now);

    Round instance_start() const { return inst_.start_round; }
    const InstanceState& active_instance() const { return inst_; }
    const ReputationState& reputation() const { return rep_; }
    const std::vector<CommitRecord>& commit_log() const { return log_; }
    const EmittedSet& emitted() const { return emitted_; }

  private:
    void open_instance(const LocalDag* dag, Round start);

    std::uint32_t n_;
    std::uint32_t f_;
    ShoalConfig cfg_;
    ReputationState rep_;
    InstanceState inst_;
    EmittedSet emitted_;
    std::vector<CommitRecord> log_;
    std::uint64_t next_tag_ = 0;
};

}  // namespace shoalsim
