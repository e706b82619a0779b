#include "shoalsim/trace_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace shoalsim {

namespace {

using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::ofstream open_out(const fs::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    return out;
}

std::ifstream open_in(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    return in;
}

}  // namespace

void write_trace_dir(const RunTrace& trace, const std::string& dir,
                     LatencyConvention convention) {
    fs::create_directories(dir);
    const fs::path root(dir);
    MetricsInput in = metrics_input(trace, convention);

    {
        ordered_json j;
        j["schema"] = 1;
        j["n"] = trace.n;
        j["f"] = trace.f;
        j["horizon_us"] = trace.horizon;
        j["latency_convention"] = latency_convention_name(convention);
        j["timeline_validator"] = in.timeline_validator;
        j["anchors_ordered"] = in.anchors_ordered;
        j["anchors_skipped"] = in.anchors_skipped;
        j["fallback_activations"] = in.fallback_activations;
        ordered_json finals = ordered_json::array();
        for (Round r : trace.final_round) finals.push_back(r);
        j["final_round"] = std::move(finals);
        ordered_json crashed = ordered_json::array();
        for (SimTime t : trace.crashed_at)
            crashed.push_back(t == kNeverCrashes ? ordered_json(nullptr) : ordered_json(t));
        j["crashed_at_us"] = std::move(crashed);
        ordered_json events = ordered_json::array();
        for (const FallbackEvent& e : trace.fallback_events) {
            ordered_json row;
            row["validator"] = e.validator;
            row["at_us"] = e.at;
            row["round"] = e.round;
            row["active"] = e.active;
            row["counter"] = e.counter;
            events.push_back(std::move(row));
        }
        j["fallback_events"] = std::move(events);
        open_out(root / "summary.json") << j.dump(2) << '\n';
    }

    {
        // Ordered-vertex rows carry the cross-validator aggregates; vertices
        // never ordered before the horizon keep orderers = 0.
        std::map<std::uint64_t, const OrderedVertexStat*> stat;
        for (const OrderedVertexStat& s : in.vertices) stat[s.id.packed()] = &s;
        auto out = open_out(root / "vertices.csv");
        out << "round,author,created_at_us,tx_count,byte_size,is_anchor,"
               "commit_anchor_round,first_at_us,at_sum_us,orderers\n";
        char buf[192];
        for (const auto& [packed, vx] : trace.vertices) {
            auto it = stat.find(packed);
            const OrderedVertexStat* s = it == stat.end() ? nullptr : it->second;
            std::snprintf(buf, sizeof buf,
                          "%" PRId64 ",%u,%" PRId64 ",%u,%u,%u,%" PRId64 ",%" PRId64 ",%" PRId64
                          ",%u\n",
                          vx->id.round, vx->id.author, vx->created_at, vx->payload.tx_count,
                          vx->payload.byte_size, s && s->is_anchor ? 1u : 0u,
                          s ? s->commit_anchor_round : Round{0}, s ? s->first_at : SimTime{0},
                          s ? s->at_sum : SimTime{0}, s ? s->orderers : 0u);
            out << buf;
        }
    }

    char buf[192];
    for (ValidatorId v = 0; v < trace.n; ++v) {
        auto out = open_out(root / ("commits_" + std::to_string(v) + ".csv"));
        out << "anchor_round,anchor_author,epoch_tag,decided_at_us,slice_size,latency_sum_us\n";
        for (const CommitRecord& rec : trace.commits[v]) {
            SimTime lat_sum = 0;
            for (const VertexId& vid : rec.ordered_vertices)
                lat_sum += rec.decided_at - trace.vertices.at(vid.packed())->created_at;
            std::snprintf(buf, sizeof buf,
                          "%" PRId64 ",%u,%" PRIu64 ",%" PRId64 ",%zu,%" PRId64 "\n",
                          rec.anchor.round, rec.anchor.author, rec.epoch_tag, rec.decided_at,
                          rec.ordered_vertices.size(), lat_sum);
            out << buf;
        }
    }

    for (ValidatorId v = 0; v < trace.n; ++v) {
        auto out = open_out(root / ("decisions_" + std::to_string(v) + ".csv"));
        out << "round,author,decision,epoch_tag,at_us\n";
        for (const DecisionEntry& d : trace.decisions[v]) {
            std::snprintf(buf, sizeof buf, "%" PRId64 ",%u,%s,%" PRIu64 ",%" PRId64 "\n",
                          d.anchor.round, d.anchor.author,
                          d.decision == Decision::Ordered ? "ordered" : "skipped", d.epoch_tag,
                          d.at);
            out << buf;
        }
    }

    for (ValidatorId v = 0; v < trace.n; ++v) {
        auto out = open_out(root / ("rounds_" + std::to_string(v) + ".csv"));
        out << "round,entered_at_us,gate,fallback_active\n";
        for (const RoundEntry& r : trace.rounds[v]) {
            std::snprintf(buf, sizeof buf, "%" PRId64 ",%" PRId64 ",%s,%u\n", r.round,
                          r.entered_at, advance_gate_name(r.gate), r.fallback_active ? 1u : 0u);
            out << buf;
        }
    }
}

MetricsInput read_trace_metrics_input(const std::string& dir) {
    const fs::path root(dir);
    MetricsInput in;

    {
        ordered_json j;
        try {
            open_in(root / "summary.json") >> j;
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error("malformed summary.json in " + dir + ": " + e.what());
        }
        if (!j.contains("schema") || j["schema"] != 1)
            throw std::runtime_error("schema mismatch in " + (root / "summary.json").string());
        in.convention = parse_latency_convention(j.at("latency_convention").get<std::string>());
        in.horizon = j.at("horizon_us").get<SimTime>();
        in.timeline_validator = j.at("timeline_validator").get<ValidatorId>();
        in.anchors_ordered = j.at("anchors_ordered").get<std::uint64_t>();
        in.anchors_skipped = j.at("anchors_skipped").get<std::uint64_t>();
        in.fallback_activations = j.at("fallback_activations").get<std::uint64_t>();
    }

    {
        auto file = open_in(root / "vertices.csv");
        std::string line;
        std::getline(file, line);  // header
        while (std::getline(file, line)) {
            OrderedVertexStat s;
            unsigned author = 0, tx = 0, bytes = 0, is_anchor = 0, orderers = 0;
            long long round = 0, car = 0, created = 0, first_at = 0, at_sum = 0;
            if (std::sscanf(line.c_str(), "%lld,%u,%lld,%u,%u,%u,%lld,%lld,%lld,%u", &round,
                            &author, &created, &tx, &bytes, &is_anchor, &car, &first_at, &at_sum,
                            &orderers) != 10)
                throw std::runtime_error("malformed row in " + (root / "vertices.csv").string() +
                                         ": " + line);
            ++in.total_vertices;
            if (orderers == 0) continue;
            s.id = VertexId{static_cast<Round>(round), static_cast<ValidatorId>(author)};
            s.created_at = created;
            s.tx_count = tx;
            s.is_anchor = is_anchor != 0;
            s.commit_anchor_round = car;
            s.first_at = first_at;
            s.at_sum = at_sum;
            s.orderers = orderers;
            in.vertices.push_back(s);
        }
    }

    {
        fs::path p = root / ("commits_" + std::to_string(in.timeline_validator) + ".csv");
        auto file = open_in(p);
        std::string line;
        std::getline(file, line);
        while (std::getline(file, line)) {
            CommitStat c;
            unsigned author = 0, slice = 0;
            unsigned long long tag = 0;
            long long round = 0, at = 0, lat_sum = 0;
            if (std::sscanf(line.c_str(), "%lld,%u,%llu,%lld,%u,%lld", &round, &author, &tag, &at,
                            &slice, &lat_sum) != 6)
                throw std::runtime_error("malformed row in " + p.string() + ": " + line);
            c.anchor_round = round;
            c.anchor_author = author;
            c.epoch_tag = tag;
            c.decided_at = at;
            c.slice_size = slice;
            c.latency_sum = lat_sum;
            in.timeline.push_back(c);
        }
    }
    return in;
}

}  // namespace shoalsim
