#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <unordered_map>
#include <vector>

#include "shoalsim/types.hpp"

namespace shoalsim {

enum class InsertOutcome {
    Accepted,      // vertex (and possibly buffered descendants) now in the DAG
    Buffered,      // parked until all parents arrive
    Duplicate,     // identical vertex already present; no-op
    Equivocation,  // same id, different content; a broadcast-layer violation
};

struct InsertResult {
    InsertOutcome outcome = InsertOutcome::Accepted;
    // Every vertex that became part of the DAG through this call, in
    // acceptance order (the offered vertex plus any unblocked buffered ones).
    std::vector<VertexId> accepted;
};

/**
 * One validator's local copy of the round-structured DAG.
 *
 * The broadcast layer below (here: the simulator) guarantees that every
 * delivered vertex eventually arrives with its full causal history, that no
 * two vertices share an id, and that all replicas converge on identical
 * histories. LocalDag enforces the local slice of those guarantees: a vertex
 * is only accepted once all of its parents are present, so accepted vertices
 * always have complete causal histories. Early arrivals sit in an unbounded
 * pending pool and are retried on every acceptance.
 */
class LocalDag {
  public:
    LocalDag(std::uint32_t n, std::uint32_t f);

    std::uint32_t n() const { return n_; }
    std::uint32_t f() const { return f_; }

    /// Offer a vertex. Structural violations (wrong parent rounds, fewer
    /// than n-f strong parents, out-of-range author) throw: the simulator
    /// never produces them, so they indicate a harness bug.
    InsertResult insert_vertex(VertexPtr v);

    bool contains(const VertexId& id) const;
    const Vertex& get(const VertexId& id) const;  // throws if absent
    VertexPtr get_ptr(const VertexId& id) const;  // nullptr if absent

    /// Number of vertices present in a round.
    std::uint32_t round_size(Round r) const;

    /// Highest round with at least one accepted vertex, -1 when empty.
    Round max_round() const { return max_round_; }

    /// Round of the newest accepted vertex from `author`, -1 if none.
    Round latest_round_of(ValidatorId author) const;

    /// Vertices of one round in author order.
    std::vector<VertexPtr> vertices_in_round(Round r) const;

    /// Transitive closure over strong and weak links, including `id` itself,
    /// sorted by (round, author). Throws if `id` is absent.
    std::vector<VertexId> causal_history(const VertexId& id) const;

    /// True iff `to` is reachable from `from` following strong links only.
    /// Reflexive. Throws if either endpoint is absent.
    bool strong_path_exists(const VertexId& from, const VertexId& to) const;

    /// Number of vertices in round anchor.round+1 whose strong parents
    /// include `anchor`. Counts only; no f+1 judgement here.
    std::uint32_t count_anchor_votes(const VertexId& anchor) const;

    /// For each author, the highest round of that author's vertex reachable
    /// from the full set of round-r vertices via strong links (-1 if none).
    /// This is exactly the coverage a builder linking all of round r needs
    /// when deciding weak links.
    std::vector<Round> strong_coverage_of_round(Round r) const;

    std::size_t pending_count() const { return pending_.size(); }
    std::size_t size() const { return size_; }

    /// Line-oriented dump: `round author strong:<csv> weak:<csv>` with
    /// parents rendered as round/author tokens.
    void dump(std::ostream& os) const;

  private:
    // Per-vertex strong-closure coverage, exception-compressed: every author
    // that appears among the vertex's strong parents is covered to round-1;
    // `below` lists the rest (value -1 = not covered at all). Own author is
    // implicitly covered to the vertex's own round.
    struct Cover {
        std::vector<std::pair<ValidatorId, Round>> below;  // sorted by author
    };

    void validate_structure(const Vertex& v) const;
    bool parents_present(const Vertex& v) const;
    void accept(VertexPtr v, std::vector<VertexId>& accepted);
    const Cover& cover_of(const VertexId& id) const;
    Round cover_lookup(const VertexId& id, const Cover& c, ValidatorId q) const;

    std::uint32_t n_;
    std::uint32_t f_;
    Round max_round_ = -1;
    std::size_t size_ = 0;

    // vertices_[author][round] — dense per author, null when absent.
    std::vector<std::vector<VertexPtr>> vertices_;
    std::vector<Round> latest_;            // per author
    std::vector<std::uint32_t> round_count_;

    // Early arrivals keyed by packed id; ordered so retries scan lower
    // rounds first and cascades resolve in one pass.
    std::map<std::uint64_t, VertexPtr> pending_;

    mutable std::unordered_map<std::uint64_t, Cover> covers_;
};

}  // namespace shoalsim
