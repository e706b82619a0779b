#include "shoalsim/sim.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>

#include "shoalsim/rng.hpp"

namespace shoalsim {

SimConfig normalized(SimConfig cfg) {
    if (cfg.region_of.empty()) cfg.region_of.assign(cfg.n, 0);
    if (cfg.latency_ms.empty()) cfg.latency_ms = {{50.0}};
    if (cfg.delay_mult.empty()) cfg.delay_mult.assign(cfg.n, 1.0);
    return cfg;
}

void validate_config(const SimConfig& cfg) {
    const auto fail = [](const std::string& field, const std::string& why) {
        throw std::invalid_argument("config." + field + ": " + why);
    };
    if (cfg.n < 4) fail("n", "need at least 4 validators");
    const std::uint32_t f = cfg.f();
    if (cfg.region_of.size() != cfg.n) fail("region_of", "one region per validator required");
    const std::size_t regions = cfg.latency_ms.size();
    if (regions == 0) fail("latency_ms", "matrix is empty");
    for (const auto& row : cfg.latency_ms) {
        if (row.size() != regions) fail("latency_ms", "matrix is not square");
    }
    for (std::size_t a = 0; a < regions; ++a) {
        for (std::size_t b = 0; b < regions; ++b) {
            if (!(cfg.latency_ms[a][b] > 0.0)) fail("latency_ms", "entries must be positive");
            if (cfg.latency_ms[a][b] != cfg.latency_ms[b][a]) {
                fail("latency_ms", "matrix must be symmetric");
            }
        }
    }
    for (auto r : cfg.region_of) {
        if (r >= regions) fail("region_of", "region index out of range");
    }
    if (cfg.delay_mult.size() != cfg.n) fail("delay_mult", "one multiplier per validator");
    for (double m : cfg.delay_mult) {
        if (!(m > 0.0)) fail("delay_mult", "multipliers must be positive");
    }
    if (cfg.jitter_frac < 0.0 || cfg.jitter_frac >= 1.0) fail("jitter_frac", "must be in [0, 1)");
    std::set<ValidatorId> crashed;
    for (const auto& [id, t] : cfg.crashes) {
        if (id >= cfg.n) fail("crashes", "validator id out of range");
        if (t < 0) fail("crashes", "crash times must be >= 0");
        if (!crashed.insert(id).second) fail("crashes", "duplicate validator id");
    }
    std::set<ValidatorId> withhold;
    for (auto id : cfg.withholders) {
        if (id >= cfg.n) fail("withholders", "validator id out of range");
        if (!withhold.insert(id).second) fail("withholders", "duplicate validator id");
        if (crashed.count(id) != 0) fail("withholders", "validator also listed in crashes");
    }
    if (crashed.size() + withhold.size() > f) {
        fail("crashes", "|crashes| + |withholders| exceeds f = " + std::to_string(f));
    }
    if (cfg.duration_rounds < 1) fail("duration_rounds", "must be >= 1");
    if (cfg.pacer.kind != PacerKind::Baseline && cfg.pacer.timeout <= 0) {
        fail("pacer.timeout", "must be positive when timeouts can arm");
    }
    if (cfg.pacer.fallback_k < 1) fail("pacer.fallback_k", "must be >= 1");
    if (cfg.shoal.leader_reputation) {
        if (!(cfg.shoal.w_low > 0.0)) fail("shoal.w_low", "must be positive");
        if (cfg.shoal.w_high < cfg.shoal.w_low) fail("shoal.w_high", "must be >= w_low");
    }
    if (cfg.batch_tx == 0) fail("batch_tx", "must be positive");
}

std::vector<VertexId> apply_adversary(std::vector<VertexId> parents, const VertexId& anchor,
                                      std::uint32_t n, std::uint32_t f) {
    auto it = std::find(parents.begin(), parents.end(), anchor);
    if (it != parents.end() && parents.size() > static_cast<std::size_t>(n - f)) {
        parents.erase(it);
    }
    return parents;
}

namespace {

struct Event {
    SimTime at = 0;
    std::uint64_t seq = 0;
    enum class Kind : std::uint8_t { Delivery, Timer } kind = Kind::Delivery;
    ValidatorId to = 0;
    VertexPtr vertex;  // Delivery only
    Round round = -1;  // Timer only: the round the timer was armed for
};

struct EventAfter {
    bool operator()(const Event& a, const Event& b) const {
        if (a.at != b.at) return a.at > b.at;
        return a.seq > b.seq;
    }
};

struct SimValidator {
    SimValidator(ValidatorId id_, std::uint32_t n, std::uint32_t f, const ShoalConfig& shoal)
        : id(id_), dag(n, f), frame(n, f, shoal) {}

    ValidatorId id;
    LocalDag dag;
    ShoalFrame frame;
    PacerState pacer;
    bool withholder = false;
    SimTime crashed_at = kNeverCrashes;
    Round timer_armed_for = -1;
    // (epoch_tag, wave) pairs already fed to the skip counter, so a wave the
    // pacer saw pass unresolved is not double counted when its instance
    // finally resolves.
    std::map<std::uint64_t, std::set<std::uint32_t>> noted;
};

class Simulation {
  public:
    explicit Simulation(SimConfig cfg)
        : cfg_(std::move(cfg)), f_(cfg_.f()), rng_(cfg_.seed) {
        trace_.n = cfg_.n;
        trace_.f = f_;
        trace_.config = cfg_;
        trace_.commits.resize(cfg_.n);
        trace_.decisions.resize(cfg_.n);
        trace_.rounds.resize(cfg_.n);
        trace_.final_round.assign(cfg_.n, -1);
        trace_.crashed_at.assign(cfg_.n, kNeverCrashes);
        vals_.reserve(cfg_.n);
        for (ValidatorId i = 0; i < cfg_.n; ++i) {
            vals_.push_back(std::make_unique<SimValidator>(i, cfg_.n, f_, cfg_.shoal));
        }
        for (const auto& [id, t] : cfg_.crashes) {
            vals_[id]->crashed_at = t;
            trace_.crashed_at[id] = t;
        }
        for (auto id : cfg_.withholders) vals_[id]->withholder = true;
    }

    RunTrace take() {
        bootstrap();
        loop();
        trace_.horizon = now_;
        return std::move(trace_);
    }

  private:
    bool live(const SimValidator& v) const { return v.crashed_at > now_; }

    void bootstrap() {
        now_ = 0;
        for (auto& vp : vals_) {
            SimValidator& v = *vp;
            if (!live(v)) continue;
            advance_to_round_zero(v);
        }
        std::set<ValidatorId> dirty;
        for (auto& vp : vals_) {
            if (live(*vp)) dirty.insert(vp->id);
        }
        for (auto id : dirty) react(*vals_[id]);
    }

    void loop() {
        while (!queue_.empty()) {
            if (all_done()) break;
            now_ = queue_.top().at;
            std::set<ValidatorId> dirty;
            while (!queue_.empty() && queue_.top().at == now_) {
                Event e = queue_.top();
                queue_.pop();
                handle(e, dirty);
            }
            for (auto id : dirty) react(*vals_[id]);
        }
    }

    bool all_done() const {
        for (const auto& vp : vals_) {
            if (live(*vp) && vp->pacer.current_round < cfg_.duration_rounds) return false;
        }
        return true;
    }

    void handle(const Event& e, std::set<ValidatorId>& dirty) {
        SimValidator& v = *vals_[e.to];
        if (!live(v)) return;  // crashed recipients drop silently
        switch (e.kind) {
            case Event::Kind::Delivery:
                if (insert(v, e.vertex)) dirty.insert(v.id);
                break;
            case Event::Kind::Timer:
                if (v.pacer.current_round == e.round) dirty.insert(v.id);
                break;
        }
    }

    /// Offer a vertex to v's dag; feed every acceptance to the frame.
    /// Returns true when anything was accepted.
    bool insert(SimValidator& v, const VertexPtr& ptr) {
        InsertResult res = v.dag.insert_vertex(ptr);
        if (res.outcome == InsertOutcome::Equivocation) {
            throw std::logic_error("broadcast layer violated: equivocation at " + ptr->id.str());
        }
        for (const auto& id : res.accepted) {
            v.frame.on_vertex(v.dag.get(id));
            if (cfg_.record_deliveries && v.id == 0) {
                trace_.deliveries0.emplace_back(now_, id);
            }
        }
        return !res.accepted.empty();
    }

    void react(SimValidator& v) {
        if (!live(v)) return;
        for (;;) {
            bool progressed = false;
            StepOutcome so = v.frame.step(v.dag, now_);
            if (!so.records.empty()) {
                progressed = true;
                absorb(v, so);
            }
            while (pace_once(v)) progressed = true;
            if (!progressed) break;
        }
    }

    void absorb(SimValidator& v, const StepOutcome& so) {
        for (const auto& rec : so.records) trace_.commits[v.id].push_back(rec);
        for (const auto& io : so.instances) {
            for (std::uint32_t w = 0; w < io.decided.size(); ++w) {
                const auto& [anchor, d] = io.decided[w];
                trace_.decisions[v.id].push_back({anchor, d, io.epoch_tag, now_});
                if (d == Decision::Skipped) {
                    if (mark_noted(v, io.epoch_tag, w)) feed_note(v, AnchorOutcome::Skipped);
                } else {
                    feed_note(v, AnchorOutcome::Ordered);
                }
            }
        }
        // Instances below the active tag are closed; their note markers are dead.
        v.noted.erase(v.noted.begin(),
                      v.noted.lower_bound(v.frame.active_instance().epoch_tag));
    }

    bool mark_noted(SimValidator& v, std::uint64_t tag, std::uint32_t wave) {
        return v.noted[tag].insert(wave).second;
    }

    void feed_note(SimValidator& v, AnchorOutcome outcome) {
        const bool before = v.pacer.fallback_active;
        note_anchor_outcome(v.pacer, outcome, cfg_.pacer);
        if (v.pacer.fallback_active != before) {
            trace_.fallback_events.push_back({v.id, now_, v.pacer.current_round,
                                              v.pacer.fallback_active,
                                              v.pacer.consecutive_skipped_anchors});
        }
    }

    std::optional<VertexId> anchor_scheduled_at(const SimValidator& v, Round r) const {
        const InstanceState& inst = v.frame.active_instance();
        if (r < inst.start_round || (r - inst.start_round) % 2 != 0) return std::nullopt;
        return VertexId{r, inst.schedule.leader_of(r)};
    }

    bool pace_once(SimValidator& v) {
        RoundContext ctx;
        ctx.anchor_of_round = anchor_scheduled_at(v, v.pacer.current_round);
        ctx.prev_round_anchor = anchor_scheduled_at(v, v.pacer.current_round - 1);
        const ReadyCheck rc = evaluate_advance(v.pacer, v.dag, ctx, now_, cfg_.pacer);
        if (!rc.ready) {
            if (rc.awaiting_timeout && v.timer_armed_for != v.pacer.current_round) {
                v.timer_armed_for = v.pacer.current_round;
                const SimTime deadline =
                    std::max(v.pacer.round_entered_at + cfg_.pacer.timeout, now_ + 1);
                queue_.push({deadline, seq_++, Event::Kind::Timer, v.id, nullptr,
                             v.pacer.current_round});
            }
            return false;
        }
        advance(v, rc.gate);
        return true;
    }

    void advance_to_round_zero(SimValidator& v) {
        const PayloadMeta payload{VertexId{0, v.id}.packed(), cfg_.batch_tx,
                                  cfg_.batch_tx * cfg_.tx_bytes};
        Vertex built = build_vertex(v.id, v.dag, 0, now_, payload);
        publish(v, std::make_shared<const Vertex>(std::move(built)));
        trace_.rounds[v.id].push_back({0, now_, AdvanceGate::Quorum, false});
        trace_.final_round[v.id] = 0;
    }

    void advance(SimValidator& v, AdvanceGate gate) {
        const Round next = v.pacer.current_round + 1;
        const PayloadMeta payload{VertexId{next, v.id}.packed(), cfg_.batch_tx,
                                  cfg_.batch_tx * cfg_.tx_bytes};

        const std::vector<VertexId>* override = nullptr;
        std::vector<VertexId> trimmed;
        if (v.withholder) {
            const auto anchor = anchor_scheduled_at(v, next - 1);
            if (anchor && v.dag.contains(*anchor)) {
                std::vector<VertexId> parents;
                for (const auto& p : v.dag.vertices_in_round(next - 1)) {
                    parents.push_back(p->id);
                }
                const std::size_t before = parents.size();
                trimmed = apply_adversary(std::move(parents), *anchor, cfg_.n, f_);
                if (trimmed.size() != before) override = &trimmed;
            }
        }

        Vertex built = build_vertex(v.id, v.dag, next, now_, payload, override);
        publish(v, std::make_shared<const Vertex>(std::move(built)));

        v.pacer.current_round = next;
        v.pacer.round_entered_at = now_;
        v.timer_armed_for = -1;
        note_wave_passages(v);
        trace_.rounds[v.id].push_back({next, now_, gate, v.pacer.fallback_active});
        trace_.final_round[v.id] = next;
    }

    /// Self-deliver synchronously, register globally, schedule deliveries.
    void publish(SimValidator& v, VertexPtr ptr) {
        trace_.vertices.emplace(ptr->id.packed(), ptr);
        insert(v, ptr);
        const std::uint32_t my_region = cfg_.region_of[v.id];
        for (ValidatorId j = 0; j < cfg_.n; ++j) {
            if (j == v.id) continue;
            const double base = cfg_.latency_ms[my_region][cfg_.region_of[j]] *
                                std::max(cfg_.delay_mult[v.id], cfg_.delay_mult[j]);
            const double jit = 1.0 + cfg_.jitter_frac * (2.0 * rng_.next_unit() - 1.0);
            const auto delay =
                std::max<SimTime>(1, static_cast<SimTime>(std::llround(base * 1000.0 * jit)));
            queue_.push({now_ + delay, seq_++, Event::Kind::Delivery, j, ptr, -1});
        }
    }

    /// A wave both of whose rounds the pacer has moved past with no
    /// resolution counts as a skip for fallback purposes; the proper
    /// decision, when it finally lands, is deduplicated via `noted` (and an
    /// Ordered decision simply resets the counter).
    void note_wave_passages(SimValidator& v) {
        const InstanceState& inst = v.frame.active_instance();
        const Round r = v.pacer.current_round;
        for (std::uint32_t w = 0; inst.start_round + 2 * static_cast<Round>(w) + 1 < r; ++w) {
            if (mark_noted(v, inst.epoch_tag, w)) feed_note(v, AnchorOutcome::Skipped);
        }
    }

    SimConfig cfg_;
    std::uint32_t f_;
    Rng rng_;
    SimTime now_ = 0;
    std::uint64_t seq_ = 0;
    std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
    std::vector<std::unique_ptr<SimValidator>> vals_;
    RunTrace trace_;
};

}  // namespace

RunTrace run(const SimConfig& cfg) {
    SimConfig full = normalized(cfg);
    validate_config(full);
    return Simulation(std::move(full)).take();
}

std::vector<CommitRecord> replay_classic_bullshark(const RunTrace& trace) {
    if (!trace.config.record_deliveries) {
        throw std::invalid_argument("replay: trace has no acceptance log; "
                                    "set record_deliveries in the config");
    }
    LocalDag dag(trace.n, trace.f);
    ClassicBullshark classic(trace.n, trace.f);
    std::vector<CommitRecord> out;
    for (const auto& [at, id] : trace.deliveries0) {
        auto it = trace.vertices.find(id.packed());
        if (it == trace.vertices.end()) {
            throw std::logic_error("replay: vertex missing from registry: " + id.str());
        }
        // The log is in acceptance order, so parents always precede children
        // and every offer lands immediately.
        InsertResult res = dag.insert_vertex(it->second);
        for (const auto& aid : res.accepted) {
            auto recs = classic.on_vertex(dag, dag.get(aid), at);
            out.insert(out.end(), recs.begin(), recs.end());
        }
    }
    return out;
}

}  // namespace shoalsim
