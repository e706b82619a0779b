#include "shoalsim/bullshark.hpp"

#include <algorithm>
#include <stdexcept>

namespace shoalsim {

void InstanceState::on_vertex(const Vertex& v, std::uint32_t f) {
    const Round r = v.id.round;
    if (r < start_round) return;
    const Round offset = r - start_round;
    if (offset % 2 == 0) {
        const std::uint32_t wave = static_cast<std::uint32_t>(offset / 2);
        if (waves.size() <= wave) waves.resize(wave + 1);
        if (v.id.author == schedule.leader_of(r)) {
            waves[wave].anchor_present = true;
            if (waves[wave].votes >= f + 1) direct_waves.insert(wave);
        }
    } else {
        const std::uint32_t wave = static_cast<std::uint32_t>((offset - 1) / 2);
        if (waves.size() <= wave) waves.resize(wave + 1);
        const VertexId anchor = anchor_id(wave);
        if (std::binary_search(v.strong_parents.begin(), v.strong_parents.end(), anchor)) {
            ++waves[wave].votes;
            if (waves[wave].anchor_present && waves[wave].votes >= f + 1) {
                direct_waves.insert(wave);
            }
        }
    }
}

void InstanceState::scan_existing(const LocalDag& dag, std::uint32_t f) {
    for (Round r = start_round; r <= dag.max_round(); ++r) {
        for (const auto& v : dag.vertices_in_round(r)) {
            on_vertex(*v, f);
        }
    }
}

std::optional<Resolution> try_resolve_first_anchor(const LocalDag& dag, InstanceState& inst) {
    if (inst.direct_waves.empty()) return std::nullopt;
    const std::uint32_t k_star = *inst.direct_waves.begin();

    // Walk below the lowest directly-ordered wave. An earlier anchor is
    // ordered exactly when the lowest ordered anchor so far reaches it by
    // strong links; everything else is skipped.
    VertexId lowest = inst.anchor_id(k_star);
    std::uint32_t first_wave = k_star;
    std::vector<std::uint32_t> skipped;  // discovered top-down
    for (std::uint32_t j = k_star; j-- > 0;) {
        const VertexId aj = inst.anchor_id(j);
        if (dag.contains(aj) && dag.strong_path_exists(lowest, aj)) {
            lowest = aj;
            first_wave = j;
        } else {
            skipped.push_back(j);
        }
    }

    Resolution res;
    res.first_ordered = lowest;
    for (std::uint32_t j = 0; j <= first_wave; ++j) {
        const VertexId aj = inst.anchor_id(j);
        const Decision d = (j == first_wave) ? Decision::Ordered : Decision::Skipped;
        inst.decisions[j] = d;
        res.decided.emplace_back(aj, d);
        if (d == Decision::Skipped) res.skipped_before.push_back(aj);
    }
    return res;
}

std::vector<VertexId> linearize_causal_history(const LocalDag& dag, const VertexId& anchor,
                                               const EmittedSet& emitted) {
    if (!dag.contains(anchor)) {
        throw std::out_of_range("linearize: anchor not present: " + anchor.str());
    }
    if (emitted.contains(anchor)) {
        throw std::logic_error("linearize: anchor already emitted: " + anchor.str());
    }
    // Causal history minus the already-ordered prefix. Everything below an
    // emitted vertex is emitted too, so the walk prunes there.
    std::set<std::uint64_t> fresh;
    std::vector<VertexId> stack{anchor};
    fresh.insert(anchor.packed());
    while (!stack.empty()) {
        const Vertex& v = dag.get(stack.back());
        stack.pop_back();
        for (const auto* list : {&v.strong_parents, &v.weak_parents}) {
            for (const auto& p : *list) {
                if (emitted.contains(p)) continue;
                if (fresh.insert(p.packed()).second) stack.push_back(p);
            }
        }
    }
    std::vector<VertexId> out;
    out.reserve(fresh.size());
    for (std::uint64_t key : fresh) {
        const VertexId id = VertexId::unpack(key);
        if (id == anchor) continue;
        out.push_back(id);
    }
    out.push_back(anchor);  // highest (round, author) anyway; forced last
    return out;
}

Round rounds_to_commit(const VertexId& v, const CommitRecord& commit) {
    const bool member = std::find(commit.ordered_vertices.begin(),
                                  commit.ordered_vertices.end(), v) !=
                        commit.ordered_vertices.end();
    if (!member) {
        throw std::invalid_argument("rounds_to_commit: " + v.str() +
                                    " not ordered by anchor " + commit.anchor.str());
    }
    return commit.anchor.round + 2 - v.round;
}

ClassicBullshark::ClassicBullshark(std::uint32_t n, std::uint32_t f)
    : n_(n), f_(f), emitted_(n) {}

std::vector<CommitRecord> ClassicBullshark::on_vertex(const LocalDag& dag, const Vertex& v,
                                                      SimTime now) {
    const Round r = v.id.round;
    if (r % 2 == 0) {
        const Round wave = r / 2;
        if (wave >= next_wave_ && v.id.author == static_cast<ValidatorId>(r % n_)) {
            anchors_present_.insert(wave);
        }
    } else {
        const Round wave = (r - 1) / 2;
        if (wave >= next_wave_) {
            const VertexId anchor = anchor_of_wave(wave);
            if (std::binary_search(v.strong_parents.begin(), v.strong_parents.end(), anchor)) {
                ++votes_[wave];
            }
        }
    }

    std::vector<CommitRecord> out;
    for (;;) {
        // Lowest undecided wave whose anchor arrived and has f+1 votes.
        std::optional<Round> direct;
        for (Round wave : anchors_present_) {
            if (wave < next_wave_) continue;
            auto vote = votes_.find(wave);
            if (vote != votes_.end() && vote->second >= f_ + 1) {
                direct = wave;
                break;
            }
        }
        if (!direct) break;

        VertexId lowest = anchor_of_wave(*direct);
        std::vector<VertexId> chain{lowest};  // ordered anchors, top-down
        for (Round j = *direct - 1; j >= next_wave_; --j) {
            const VertexId aj = anchor_of_wave(j);
            if (dag.contains(aj) && dag.strong_path_exists(lowest, aj)) {
                lowest = aj;
                chain.push_back(aj);
            }
        }
        std::reverse(chain.begin(), chain.end());
        for (const auto& anchor : chain) {
            CommitRecord rec;
            rec.anchor = anchor;
            rec.epoch_tag = 0;
            rec.decided_at = now;
            rec.ordered_vertices = linearize_causal_history(dag, anchor, emitted_);
            for (const auto& id : rec.ordered_vertices) emitted_.add(id);
            log_.push_back(rec);
            out.push_back(rec);
        }
        next_wave_ = *direct + 1;
        anchors_present_.erase(anchors_present_.begin(),
                               anchors_present_.lower_bound(next_wave_));
        votes_.erase(votes_.begin(), votes_.lower_bound(next_wave_));
    }
    return out;
}

MultiAnchorResult multi_anchor_resolve(const LocalDag& dag, Round up_to_round) {
    const std::uint32_t n = dag.n();
    const std::uint32_t f = dag.f();
    MultiAnchorResult result;
    EmittedSet emitted(n);

    const Round limit = std::min(up_to_round, dag.max_round());
    for (Round r = 0; r <= limit; ++r) {
        for (ValidatorId k = 0; k < n; ++k) {
            // Single-shot schedule: slot owner leads round r, round-robin
            // above. Resolved the same way as a regular instance.
            const auto leader = [&](Round rr) -> ValidatorId {
                return rr == r ? k : static_cast<ValidatorId>(rr % n);
            };
            std::optional<std::uint32_t> direct;
            for (std::uint32_t w = 0; r + 2 * static_cast<Round>(w) <= dag.max_round(); ++w) {
                const Round ar = r + 2 * static_cast<Round>(w);
                const VertexId anchor{ar, leader(ar)};
                if (dag.contains(anchor) && dag.count_anchor_votes(anchor) >= f + 1) {
                    direct = w;
                    break;
                }
            }
            if (!direct) {
                // Undecidable with the current dag: everything after this
                // slot waits, matching the fixed decision order.
                return result;
            }
            VertexId lowest{r + 2 * static_cast<Round>(*direct),
                            leader(r + 2 * static_cast<Round>(*direct))};
            for (std::uint32_t j = *direct; j-- > 0;) {
                const Round ar = r + 2 * static_cast<Round>(j);
                const VertexId aj{ar, leader(ar)};
                if (dag.contains(aj) && dag.strong_path_exists(lowest, aj)) {
                    lowest = aj;
                }
            }
            const VertexId slot{r, k};
            if (lowest == slot) {
                result.decisions.emplace_back(slot, Decision::Ordered);
                for (const auto& id : linearize_causal_history(dag, slot, emitted)) {
                    emitted.add(id);
                    result.ordered_stream.push_back(id);
                }
            } else {
                result.decisions.emplace_back(slot, Decision::Skipped);
            }
        }
    }
    return result;
}

}  // namespace shoalsim
