#include "shoalsim/shoal.hpp"

#include <stdexcept>

namespace shoalsim {

ReputationState update_reputation(ReputationState rep,
                                  const std::vector<std::pair<VertexId, Decision>>& decided) {
    for (const auto& [anchor, d] : decided) {
        if (anchor.author >= rep.score_of.size()) {
            throw std::out_of_range("update_reputation: author out of range");
        }
        if (d == Decision::Skipped) {
            rep.score_of[anchor.author] = Score::Low;
        } else if (d == Decision::Ordered) {
            rep.score_of[anchor.author] = Score::High;
        }
    }
    return rep;
}

ShoalFrame::ShoalFrame(std::uint32_t n, std::uint32_t f, const ShoalConfig& cfg)
    : n_(n), f_(f), cfg_(cfg), rep_(ReputationState::all_high(n)), emitted_(n) {
    if (cfg.leader_reputation && (cfg.w_low <= 0.0 || cfg.w_high < cfg.w_low)) {
        throw std::invalid_argument("shoal: weights require w_high >= w_low > 0");
    }
    // Epoch 0 is round-robin in every mode; weighted draws begin with the
    // first reputation-derived epoch.
    open_instance(nullptr, 0);
}

void ShoalFrame::on_vertex(const Vertex& v) {
    inst_.on_vertex(v, f_);
}

void ShoalFrame::open_instance(const LocalDag* dag, Round start) {
    const std::uint64_t tag = next_tag_++;
    AnchorSchedule sched;
    if (cfg_.leader_reputation && tag > 0) {
        sched = derive_schedule(rep_, cfg_.w_high, cfg_.w_low, cfg_.epoch_seed, tag, start);
    } else {
        sched = AnchorSchedule{start, tag, n_, false, cfg_.epoch_seed, {}, 0.0};
    }
    inst_ = InstanceState(std::move(sched), start, tag);
    if (dag != nullptr) inst_.scan_existing(*dag, f_);
}

StepOutcome ShoalFrame::step(const LocalDag& dag, SimTime now) {
    StepOutcome out;
    for (;;) {
        auto res = try_resolve_first_anchor(dag, inst_);
        if (!res) break;

        CommitRecord rec;
        rec.anchor = res->first_ordered;
        rec.epoch_tag = inst_.epoch_tag;
        rec.decided_at = now;
        rec.ordered_vertices = linearize_causal_history(dag, res->first_ordered, emitted_);
        for (const auto& id : rec.ordered_vertices) emitted_.add(id);
        log_.push_back(rec);
        out.records.push_back(std::move(rec));
        out.instances.push_back({inst_.epoch_tag, inst_.start_round, res->decided});

        if (cfg_.leader_reputation) rep_ = update_reputation(std::move(rep_), res->decided);

        const Round next = res->first_ordered.round + (cfg_.pipelining ? 1 : 2);
        open_instance(&dag, next);
    }
    return out;
}

}  // namespace shoalsim
