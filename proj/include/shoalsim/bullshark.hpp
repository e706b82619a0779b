#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "shoalsim/dag.hpp"
#include "shoalsim/schedule.hpp"
#include "shoalsim/types.hpp"

namespace shoalsim {

enum class Decision : std::uint8_t { Undecided, Ordered, Skipped };

// One ordering step: an anchor, everything it pulled into the total order
// (new causal history, anchor last), and when the deciding replica learned
// enough to commit.
struct CommitRecord {
    VertexId anchor;
    std::uint64_t epoch_tag = 0;
    std::vector<VertexId> ordered_vertices;
    SimTime decided_at = 0;
};

// Set of already-ordered vertex ids, dense per author. Rounds are compact,
// so a bitmap beats a hash set at every scale we run.
class EmittedSet {
  public:
    explicit EmittedSet(std::uint32_t n) : rounds_(n) {}

    bool contains(const VertexId& id) const {
        const auto& lane = rounds_[id.author];
        return static_cast<std::size_t>(id.round) < lane.size() &&
               lane[static_cast<std::size_t>(id.round)];
    }
    void add(const VertexId& id) {
        auto& lane = rounds_[id.author];
        if (lane.size() <= static_cast<std::size_t>(id.round)) {
            lane.resize(static_cast<std::size_t>(id.round) + 1, false);
        }
        lane[static_cast<std::size_t>(id.round)] = true;
    }

  private:
    std::vector<std::vector<bool>> rounds_;
};

/**
 * One protocol instance: anchors every two rounds from start_round under a
 * fixed schedule, until the first anchor of the instance is ordered.
 *
 * Vote counts and anchor arrivals are tracked incrementally as vertices are
 * accepted, so the per-delivery cost of "can anything resolve yet" is a
 * set lookup rather than a dag scan.
 */
struct InstanceState {
    AnchorSchedule schedule;
    Round start_round = 0;
    std::uint64_t epoch_tag = 0;

    struct WaveInfo {
        bool anchor_present = false;
        std::uint32_t votes = 0;
    };
    std::vector<WaveInfo> waves;
    std::set<std::uint32_t> direct_waves;  // anchor present and votes >= f+1
    std::map<std::uint32_t, Decision> decisions;

    InstanceState() = default;
    InstanceState(AnchorSchedule sched, Round start, std::uint64_t tag)
        : schedule(std::move(sched)), start_round(start), epoch_tag(tag) {}

    VertexId anchor_id(std::uint32_t wave) const {
        const Round r = start_round + 2 * static_cast<Round>(wave);
        return VertexId{r, schedule.leader_of(r)};
    }

    /// Account one accepted vertex. f+1 is the direct-order threshold.
    void on_vertex(const Vertex& v, std::uint32_t f);

    /// Account everything already in the dag from start_round upward;
    /// called when an instance opens over an existing dag.
    void scan_existing(const LocalDag& dag, std::uint32_t f);
};

struct Resolution {
    VertexId first_ordered;
    // Anchors below the first ordered one, all skipped, wave-ascending.
    std::vector<VertexId> skipped_before;
    // skipped_before plus the ordered anchor, wave-ascending: the exact
    // sequence reputation and fallback accounting consume.
    std::vector<std::pair<VertexId, Decision>> decided;
};

/// Decide the instance's first ordered anchor if the dag permits: find the
/// lowest wave whose anchor is present with >= f+1 votes from the next
/// round, then walk earlier waves downward, ordering any anchor the lowest
/// ordered one reaches by strong links and skipping the rest. Decisions
/// above the first ordered wave are discarded; the instance ends there.
std::optional<Resolution> try_resolve_first_anchor(const LocalDag& dag, InstanceState& inst);

/// New slice of the total order contributed by `anchor`: its causal history
/// minus everything already emitted, sorted by (round, author), anchor last.
std::vector<VertexId> linearize_causal_history(const LocalDag& dag, const VertexId& anchor,
                                               const EmittedSet& emitted);

/// Commit depth convention: an anchor ordered by next-round votes scores 2,
/// giving anchor.round + 2 - v.round for every v in the record.
Round rounds_to_commit(const VertexId& v, const CommitRecord& commit);

/**
 * Reference single-chain Bullshark: anchors on even rounds, round-robin,
 * no re-derivation, decisions advance monotonically through the waves.
 * Kept deliberately independent of the instance-chaining path so one can
 * be checked against the other on identical delivery sequences.
 */
class ClassicBullshark {
  public:
    ClassicBullshark(std::uint32_t n, std::uint32_t f);

    /// Account an accepted vertex, then emit every commit that follows.
    std::vector<CommitRecord> on_vertex(const LocalDag& dag, const Vertex& v, SimTime now);

    const std::vector<CommitRecord>& log() const { return log_; }

  private:
    VertexId anchor_of_wave(Round wave) const {
        const Round r = 2 * wave;
        return VertexId{r, static_cast<ValidatorId>(r % n_)};
    }

    std::uint32_t n_;
    std::uint32_t f_;
    Round next_wave_ = 0;  // lowest undecided wave
    std::map<Round, std::uint32_t> votes_;
    std::set<Round> anchors_present_;
    EmittedSet emitted_;
    std::vector<CommitRecord> log_;
};

// Experimental mode: treat every vertex as an anchor candidate in its own
// single-shot schedule and decide vertices in (round, author) order. Stops
// at the first vertex whose resolution the dag cannot decide yet.
struct MultiAnchorResult {
    std::vector<std::pair<VertexId, Decision>> decisions;  // in decision order
    std::vector<VertexId> ordered_stream;                  // concatenated slices
};

MultiAnchorResult multi_anchor_resolve(const LocalDag& dag, Round up_to_round);

}  // namespace shoalsim
