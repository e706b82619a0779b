#include "shoalsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace shoalsim {

namespace {

using ordered_json = nlohmann::ordered_json;

// Nearest-rank percentile over a sorted sample; empty samples report 0.
double percentile(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return 0.0;
    std::size_t rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size())));
    if (rank == 0) rank = 1;
    if (rank > sorted.size()) rank = sorted.size();
    return sorted[rank - 1];
}

double mean(const std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

}  // namespace

const char* latency_convention_name(LatencyConvention c) {
    return c == LatencyConvention::FirstOrderer ? "first-orderer" : "mean-orderer";
}

LatencyConvention parse_latency_convention(const std::string& s) {
    if (s == "first-orderer") return LatencyConvention::FirstOrderer;
    if (s == "mean-orderer") return LatencyConvention::MeanOrderer;
    throw std::invalid_argument("latency convention must be first-orderer or mean-orderer, got: " + s);
}

ValidatorId timeline_source(const RunTrace& trace) {
    for (ValidatorId v = 0; v < trace.n; ++v)
        if (trace.crashed_at[v] == kNeverCrashes) return v;
    return 0;
}

Metrics reduce_metrics(const MetricsInput& in) {
    Metrics m;
    m.convention = in.convention;
    m.total_vertices = in.total_vertices;
    m.ordered_vertices = in.vertices.size();
    m.anchors_ordered = in.anchors_ordered;
    m.anchors_skipped = in.anchors_skipped;
    m.fallback_activations = in.fallback_activations;
    m.timeline_validator = in.timeline_validator;

    std::vector<double> all_ms, vote_ms, anchor_ms;
    all_ms.reserve(in.vertices.size());
    std::uint64_t tx_total = 0;
    for (const OrderedVertexStat& v : in.vertices) {
        double at = in.convention == LatencyConvention::FirstOrderer
                        ? static_cast<double>(v.first_at)
                        : static_cast<double>(v.at_sum) / static_cast<double>(v.orderers);
        double lat_ms = (at - static_cast<double>(v.created_at)) / 1000.0;
        all_ms.push_back(lat_ms);
        if (!v.is_anchor) (v.id.round % 2 == 0 ? anchor_ms : vote_ms).push_back(lat_ms);
        m.rounds_to_commit[v.commit_anchor_round + 2 - v.id.round] += 1;
        tx_total += v.tx_count;
    }

    m.latency_avg_ms = mean(all_ms);
    m.latency_vote_round_ms = mean(vote_ms);
    m.latency_anchor_round_ms = mean(anchor_ms);
    std::sort(all_ms.begin(), all_ms.end());
    m.latency_p50_ms = percentile(all_ms, 0.5);
    m.latency_p90_ms = percentile(all_ms, 0.9);
    if (in.horizon > 0)
        m.throughput_tps = static_cast<double>(tx_total) / (static_cast<double>(in.horizon) / 1e6);

    for (const CommitStat& c : in.timeline) {
        if (c.slice_size == 0) continue;
        TimelinePoint p;
        p.time_ms = us_to_ms(c.decided_at);
        p.latency_ms =
            (static_cast<double>(c.latency_sum) / static_cast<double>(c.slice_size)) / 1000.0;
        m.timeline.push_back(p);
    }
    return m;
}

MetricsInput metrics_input(const RunTrace& trace, LatencyConvention convention) {
    MetricsInput in;
    in.convention = convention;
    in.horizon = trace.horizon;
    in.total_vertices = trace.vertices.size();
    in.timeline_validator = timeline_source(trace);

    // Fold every validator's commit log into one row per ordered vertex.
    // Validators agree on the committing anchor, so the first sighting of
    // it is as good as any.
    std::map<std::uint64_t, OrderedVertexStat> agg;
    for (ValidatorId v = 0; v < trace.n; ++v) {
        for (const CommitRecord& rec : trace.commits[v]) {
            for (const VertexId& vid : rec.ordered_vertices) {
                auto [it, fresh] = agg.try_emplace(vid.packed());
                OrderedVertexStat& a = it->second;
                if (fresh) {
                    const Vertex& vx = *trace.vertices.at(vid.packed());
                    a.id = vid;
                    a.commit_anchor_round = rec.anchor.round;
                    a.is_anchor = vid == rec.anchor;
                    a.created_at = vx.created_at;
                    a.tx_count = vx.payload.tx_count;
                    a.first_at = rec.decided_at;
                } else if (rec.decided_at < a.first_at) {
                    a.first_at = rec.decided_at;
                }
                a.at_sum += rec.decided_at;
                a.orderers += 1;
            }
        }
    }
    in.vertices.reserve(agg.size());
    for (auto& [packed, stat] : agg) in.vertices.push_back(stat);

    for (const DecisionEntry& d : trace.decisions[in.timeline_validator]) {
        if (d.decision == Decision::Ordered) ++in.anchors_ordered;
        if (d.decision == Decision::Skipped) ++in.anchors_skipped;
    }
    for (const FallbackEvent& e : trace.fallback_events)
        if (e.active) ++in.fallback_activations;

    for (const CommitRecord& rec : trace.commits[in.timeline_validator]) {
        CommitStat c;
        c.anchor_round = rec.anchor.round;
        c.anchor_author = rec.anchor.author;
        c.epoch_tag = rec.epoch_tag;
        c.decided_at = rec.decided_at;
        c.slice_size = static_cast<std::uint32_t>(rec.ordered_vertices.size());
        for (const VertexId& vid : rec.ordered_vertices)
            c.latency_sum += rec.decided_at - trace.vertices.at(vid.packed())->created_at;
        in.timeline.push_back(c);
    }
    return in;
}

Metrics compute_metrics(const RunTrace& trace, LatencyConvention convention) {
    return reduce_metrics(metrics_input(trace, convention));
}

void write_metrics_json(const Metrics& m, const std::string& path) {
    ordered_json j;
    j["schema"] = 1;
    j["latency_convention"] = latency_convention_name(m.convention);
    j["throughput_tps"] = m.throughput_tps;
    j["latency_avg_ms"] = m.latency_avg_ms;
    j["latency_p50_ms"] = m.latency_p50_ms;
    j["latency_p90_ms"] = m.latency_p90_ms;
    j["latency_vote_round_ms"] = m.latency_vote_round_ms;
    j["latency_anchor_round_ms"] = m.latency_anchor_round_ms;
    ordered_json hist = ordered_json::object();
    for (const auto& [rtc, count] : m.rounds_to_commit) hist[std::to_string(rtc)] = count;
    j["rounds_to_commit"] = std::move(hist);
    j["anchors_ordered"] = m.anchors_ordered;
    j["anchors_skipped"] = m.anchors_skipped;
    j["ordered_vertices"] = m.ordered_vertices;
    j["total_vertices"] = m.total_vertices;
    j["fallback_activations"] = m.fallback_activations;
    j["timeline_validator"] = m.timeline_validator;
    ordered_json tl = ordered_json::array();
    for (const TimelinePoint& p : m.timeline) tl.push_back({p.time_ms, p.latency_ms});
    j["timeline"] = std::move(tl);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << '\n';
}

Metrics read_metrics_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("malformed metrics file " + path + ": " + e.what());
    }
    if (!j.contains("schema") || !j["schema"].is_number_integer() || j["schema"] != 1)
        throw std::runtime_error("schema mismatch in " + path);

    Metrics m;
    try {
        m.convention = parse_latency_convention(j.at("latency_convention").get<std::string>());
        m.throughput_tps = j.at("throughput_tps").get<double>();
        m.latency_avg_ms = j.at("latency_avg_ms").get<double>();
        m.latency_p50_ms = j.at("latency_p50_ms").get<double>();
        m.latency_p90_ms = j.at("latency_p90_ms").get<double>();
        m.latency_vote_round_ms = j.at("latency_vote_round_ms").get<double>();
        m.latency_anchor_round_ms = j.at("latency_anchor_round_ms").get<double>();
        for (const auto& [key, val] : j.at("rounds_to_commit").items())
            m.rounds_to_commit[static_cast<std::uint32_t>(std::stoul(key))] =
                val.get<std::uint64_t>();
        m.anchors_ordered = j.at("anchors_ordered").get<std::uint64_t>();
        m.anchors_skipped = j.at("anchors_skipped").get<std::uint64_t>();
        m.ordered_vertices = j.at("ordered_vertices").get<std::uint64_t>();
        m.total_vertices = j.at("total_vertices").get<std::uint64_t>();
        m.fallback_activations = j.at("fallback_activations").get<std::uint64_t>();
        m.timeline_validator = j.at("timeline_validator").get<ValidatorId>();
        for (const auto& row : j.at("timeline"))
            m.timeline.push_back({row.at(0).get<double>(), row.at(1).get<double>()});
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("malformed metrics file " + path + ": " + e.what());
    }
    return m;
}

void write_timeline_csv(const Metrics& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "time_ms,latency_ms\n";
    char buf[96];
    for (const TimelinePoint& p : m.timeline) {
        std::snprintf(buf, sizeof buf, "%.3f,%.3f\n", p.time_ms, p.latency_ms);
        out << buf;
    }
}

}  // namespace shoalsim
