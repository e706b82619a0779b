#include "shoalsim/dag.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>

namespace shoalsim {

namespace {

constexpr Round kCoverWindow = 256;  // rounds of coverage memo kept behind the tip

bool sorted_unique(const std::vector<VertexId>& ids) {
    for (std::size_t i = 1; i < ids.size(); ++i) {
        if (!(ids[i - 1] < ids[i])) return false;
    }
    return true;
}

bool has_parent_author(const Vertex& v, ValidatorId q) {
    // strong parents all live in round v.id.round-1 and are author-sorted
    const VertexId probe{v.id.round - 1, q};
    return std::binary_search(v.strong_parents.begin(), v.strong_parents.end(), probe);
}

}  // namespace

LocalDag::LocalDag(std::uint32_t n, std::uint32_t f) : n_(n), f_(f) {
    if (n < 3 * f + 1 || n == 0) {
        throw std::invalid_argument("LocalDag: need n >= 3f+1, got n=" +
                                    std::to_string(n) + " f=" + std::to_string(f));
    }
    vertices_.resize(n);
    latest_.assign(n, -1);
}

void LocalDag::validate_structure(const Vertex& v) const {
    if (v.id.author >= n_) {
        throw std::invalid_argument("vertex author out of range: " + v.id.str());
    }
    if (v.id.round < 0) {
        throw std::invalid_argument("vertex round negative: " + v.id.str());
    }
    if (v.id.round == 0) {
        if (!v.strong_parents.empty() || !v.weak_parents.empty()) {
            throw std::invalid_argument("round-0 vertex must have no parents: " + v.id.str());
        }
        return;
    }
    if (v.strong_parents.size() < n_ - f_) {
        throw std::invalid_argument("vertex " + v.id.str() + " has " +
                                    std::to_string(v.strong_parents.size()) +
                                    " strong parents, needs >= " +
                                    std::to_string(n_ - f_));
    }
    if (!sorted_unique(v.strong_parents) || !sorted_unique(v.weak_parents)) {
        throw std::invalid_argument("parent lists must be sorted and unique: " + v.id.str());
    }
    for (const auto& p : v.strong_parents) {
        if (p.round != v.id.round - 1 || p.author >= n_) {
            throw std::invalid_argument("strong parent " + p.str() +
                                        " not in round below " + v.id.str());
        }
    }
    for (const auto& p : v.weak_parents) {
        if (p.round >= v.id.round - 1 || p.round < 0 || p.author >= n_) {
            throw std::invalid_argument("weak parent " + p.str() +
                                        " must sit at least two rounds below " + v.id.str());
        }
    }
}

bool LocalDag::parents_present(const Vertex& v) const {
    for (const auto& p : v.strong_parents) {
        if (!contains(p)) return false;
    }
    for (const auto& p : v.weak_parents) {
        if (!contains(p)) return false;
    }
    return true;
}

InsertResult LocalDag::insert_vertex(VertexPtr v) {
    if (!v) throw std::invalid_argument("insert_vertex: null vertex");
    validate_structure(*v);

    if (VertexPtr existing = get_ptr(v->id)) {
        return {*existing == *v ? InsertOutcome::Duplicate : InsertOutcome::Equivocation, {}};
    }
    auto pend = pending_.find(v->id.packed());
    if (pend != pending_.end()) {
        return {*pend->second == *v ? InsertOutcome::Buffered : InsertOutcome::Equivocation, {}};
    }

    if (!parents_present(*v)) {
        pending_.emplace(v->id.packed(), std::move(v));
        return {InsertOutcome::Buffered, {}};
    }

    InsertResult result{InsertOutcome::Accepted, {}};
    accept(std::move(v), result.accepted);

    // Retry the pending pool until nothing else unblocks. The pool is keyed
    // by packed id, so lower rounds come first and a chain of buffered
    // vertices usually clears in one pass.
    bool progress = true;
    while (progress) {
        progress = false;
        for (auto it = pending_.begin(); it != pending_.end();) {
            if (parents_present(*it->second)) {
                accept(it->second, result.accepted);
                it = pending_.erase(it);
                progress = true;
            } else {
                ++it;
            }
        }
    }
    return result;
}

void LocalDag::accept(VertexPtr v, std::vector<VertexId>& accepted) {
    const VertexId id = v->id;
    auto& lane = vertices_[id.author];
    if (lane.size() <= static_cast<std::size_t>(id.round)) {
        lane.resize(static_cast<std::size_t>(id.round) + 1);
    }
    lane[static_cast<std::size_t>(id.round)] = std::move(v);

    if (round_count_.size() <= static_cast<std::size_t>(id.round)) {
        round_count_.resize(static_cast<std::size_t>(id.round) + 1, 0);
    }
    ++round_count_[static_cast<std::size_t>(id.round)];
    latest_[id.author] = std::max(latest_[id.author], id.round);
    ++size_;

    const Round prev_max = max_round_;
    max_round_ = std::max(max_round_, id.round);

    cover_of(id);  // memoize eagerly while parents' covers are warm
    accepted.push_back(id);

    // Occasionally drop coverage entries far behind the tip.
    if (max_round_ > prev_max && max_round_ % 64 == 0 && max_round_ > kCoverWindow) {
        const Round floor = max_round_ - kCoverWindow;
        for (auto it = covers_.begin(); it != covers_.end();) {
            if (VertexId::unpack(it->first).round < floor) {
                it = covers_.erase(it);
            } else {
                ++it;
            }
        }
    }
}

const LocalDag::Cover& LocalDag::cover_of(const VertexId& id) const {
    auto hit = covers_.find(id.packed());
    if (hit != covers_.end()) return hit->second;

    // Rebuild missing covers bottom-up. Only reachable when a vertex lags
    // the tip by more than the memo window, which normal delay settings
    // never produce.
    std::vector<VertexId> stack{id};
    while (!stack.empty()) {
        const VertexId cur = stack.back();
        if (covers_.count(cur.packed())) {
            stack.pop_back();
            continue;
        }
        const Vertex& v = get(cur);
        bool ready = true;
        for (const auto& p : v.strong_parents) {
            if (!covers_.count(p.packed())) {
                if (ready) ready = false;
                stack.push_back(p);
            }
        }
        if (!ready) continue;
        stack.pop_back();

        Cover c;
        const Round r = cur.round;
        // Authors absent from the strong parent set: their best coverage is
        // the max the parents carry. `below` lists exactly the authors that
        // are neither the vertex itself nor one of its parents, so a missing
        // entry in a parent's list means that parent links the author
        // directly at r-2.
        std::vector<Round> tmp;
        bool any_missing = false;
        for (ValidatorId q = 0; q < n_; ++q) {
            if (q == cur.author || (r > 0 && has_parent_author(v, q))) continue;
            if (!any_missing) {
                tmp.assign(n_, -2);  // -2 = not of interest
                any_missing = true;
            }
            tmp[q] = -1;
        }
        if (any_missing && r > 0) {
            for (const auto& pid : v.strong_parents) {
                const Cover& pc = covers_.at(pid.packed());
                // merge-join over authors of interest
                std::size_t bi = 0;
                for (ValidatorId q = 0; q < n_; ++q) {
                    while (bi < pc.below.size() && pc.below[bi].first < q) ++bi;
                    if (tmp[q] == -2) continue;
                    Round contrib;
                    if (q == pid.author) {
                        contrib = pid.round;
                    } else if (bi < pc.below.size() && pc.below[bi].first == q) {
                        contrib = pc.below[bi].second;
                    } else {
                        contrib = pid.round - 1;  // q is one of pid's parents
                    }
                    tmp[q] = std::max(tmp[q], contrib);
                }
            }
        }
        if (any_missing) {
            for (ValidatorId q = 0; q < n_; ++q) {
                if (tmp[q] != -2) c.below.emplace_back(q, tmp[q]);
            }
        }
        covers_.emplace(cur.packed(), std::move(c));
    }
    return covers_.at(id.packed());
}

Round LocalDag::cover_lookup(const VertexId& id, const Cover& c, ValidatorId q) const {
    if (q == id.author) return id.round;
    auto it = std::lower_bound(c.below.begin(), c.below.end(), q,
                               [](const auto& e, ValidatorId v) { return e.first < v; });
    if (it != c.below.end() && it->first == q) return it->second;
    return id.round - 1;  // q appears among the strong parents
}

bool LocalDag::contains(const VertexId& id) const {
    if (id.author >= n_ || id.round < 0) return false;
    const auto& lane = vertices_[id.author];
    return static_cast<std::size_t>(id.round) < lane.size() &&
           lane[static_cast<std::size_t>(id.round)] != nullptr;
}

VertexPtr LocalDag::get_ptr(const VertexId& id) const {
    if (!contains(id)) return nullptr;
    return vertices_[id.author][static_cast<std::size_t>(id.round)];
}

const Vertex& LocalDag::get(const VertexId& id) const {
    VertexPtr p = get_ptr(id);
    if (!p) throw std::out_of_range("vertex not present: " + id.str());
    return *p;
}

std::uint32_t LocalDag::round_size(Round r) const {
    if (r < 0 || static_cast<std::size_t>(r) >= round_count_.size()) return 0;
    return round_count_[static_cast<std::size_t>(r)];
}

Round LocalDag::latest_round_of(ValidatorId author) const {
    if (author >= n_) throw std::out_of_range("author out of range");
    return latest_[author];
}

std::vector<VertexPtr> LocalDag::vertices_in_round(Round r) const {
    std::vector<VertexPtr> out;
    if (r < 0) return out;
    for (ValidatorId a = 0; a < n_; ++a) {
        const auto& lane = vertices_[a];
        if (static_cast<std::size_t>(r) < lane.size() && lane[static_cast<std::size_t>(r)]) {
            out.push_back(lane[static_cast<std::size_t>(r)]);
        }
    }
    return out;
}

std::vector<VertexId> LocalDag::causal_history(const VertexId& id) const {
    if (!contains(id)) throw std::out_of_range("causal_history: vertex not present: " + id.str());
    std::set<std::uint64_t> seen;
    std::vector<VertexId> stack{id};
    seen.insert(id.packed());
    while (!stack.empty()) {
        const Vertex& v = get(stack.back());
        stack.pop_back();
        for (const auto& list : {&v.strong_parents, &v.weak_parents}) {
            for (const auto& p : *list) {
                if (seen.insert(p.packed()).second) stack.push_back(p);
            }
        }
    }
    std::vector<VertexId> out;
    out.reserve(seen.size());
    for (std::uint64_t key : seen) out.push_back(VertexId::unpack(key));
    return out;  // set order == (round, author) order by key construction
}

bool LocalDag::strong_path_exists(const VertexId& from, const VertexId& to) const {
    if (!contains(from)) throw std::out_of_range("strong_path_exists: absent: " + from.str());
    if (!contains(to)) throw std::out_of_range("strong_path_exists: absent: " + to.str());
    if (from == to) return true;
    if (from.round <= to.round) return false;

    // Strong links step down exactly one round, so reachability is a
    // level-by-level walk over author sets.
    std::vector<char> frontier(n_, 0);
    frontier[from.author] = 1;
    for (Round r = from.round; r > to.round; --r) {
        std::vector<char> next(n_, 0);
        bool any = false;
        for (ValidatorId a = 0; a < n_; ++a) {
            if (!frontier[a]) continue;
            const Vertex& v = get(VertexId{r, a});
            for (const auto& p : v.strong_parents) {
                next[p.author] = 1;
                any = true;
            }
        }
        if (!any) return false;
        frontier.swap(next);
    }
    return frontier[to.author] != 0;
}

std::uint32_t LocalDag::count_anchor_votes(const VertexId& anchor) const {
    std::uint32_t votes = 0;
    const Round r = anchor.round + 1;
    for (ValidatorId a = 0; a < n_; ++a) {
        const auto& lane = vertices_[a];
        if (static_cast<std::size_t>(r) < lane.size() && lane[static_cast<std::size_t>(r)]) {
            const Vertex& v = *lane[static_cast<std::size_t>(r)];
            if (std::binary_search(v.strong_parents.begin(), v.strong_parents.end(), anchor)) {
                ++votes;
            }
        }
    }
    return votes;
}

std::vector<Round> LocalDag::strong_coverage_of_round(Round r) const {
    std::vector<Round> cov(n_, -1);
    if (r < 0) return cov;
    std::vector<std::uint32_t> below_hits(n_, 0);
    std::uint32_t present = 0;
    for (ValidatorId a = 0; a < n_; ++a) {
        const auto& lane = vertices_[a];
        if (static_cast<std::size_t>(r) >= lane.size() || !lane[static_cast<std::size_t>(r)]) continue;
        ++present;
        cov[a] = std::max(cov[a], r);
        const Cover& c = cover_of(VertexId{r, a});
        for (const auto& [q, m] : c.below) {
            cov[q] = std::max(cov[q], m);
            ++below_hits[q];
        }
    }
    if (r > 0) {
        for (ValidatorId q = 0; q < n_; ++q) {
            // q missing from some vertex's `below` list (and not that vertex
            // itself) means that vertex links q directly in round r-1.
            const std::uint32_t own = cov[q] == r ? 1u : 0u;
            if (below_hits[q] + own < present) cov[q] = std::max(cov[q], r - 1);
        }
    }
    return cov;
}

void LocalDag::dump(std::ostream& os) const {
    for (Round r = 0; r <= max_round_; ++r) {
        for (ValidatorId a = 0; a < n_; ++a) {
            VertexPtr v = get_ptr(VertexId{r, a});
            if (!v) continue;
            os << r << ' ' << a << " strong:";
            for (std::size_t i = 0; i < v->strong_parents.size(); ++i) {
                if (i) os << ',';
                os << v->strong_parents[i].str();
            }
            os << " weak:";
            for (std::size_t i = 0; i < v->weak_parents.size(); ++i) {
                if (i) os << ',';
                os << v->weak_parents[i].str();
            }
            os << '\n';
        }
    }
}

}  // namespace shoalsim
