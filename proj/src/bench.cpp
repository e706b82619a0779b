#include "shoalsim/bench.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "shoalsim/trace_io.hpp"

namespace shoalsim {

namespace fs = std::filesystem;

Metrics run_experiment(const BenchConfig& cfg, const std::string& out_dir) {
    BenchConfig effective = cfg;
    effective.sim = normalized(cfg.sim);
    validate_config(effective.sim);

    fs::create_directories(out_dir);
    const fs::path root(out_dir);
    {
        std::ofstream out(root / "config.json", std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + (root / "config.json").string());
        out << config_to_json_text(effective);
    }

    RunTrace trace = run(effective.sim);
    Metrics m = compute_metrics(trace, effective.convention);
    write_metrics_json(m, (root / "metrics.json").string());
    write_timeline_csv(m, (root / "timeline.csv").string());
    write_trace_dir(trace, (root / "trace").string(), effective.convention);
    return m;
}

namespace {

const char* const kColumns[] = {
    "throughput_tps",      "latency_avg_ms",        "latency_p50_ms",
    "latency_p90_ms",      "latency_vote_round_ms", "latency_anchor_round_ms",
};

std::vector<double> column_values(const Metrics& m) {
    return {m.throughput_tps,      m.latency_avg_ms,        m.latency_p50_ms,
            m.latency_p90_ms,      m.latency_vote_round_ms, m.latency_anchor_round_ms};
}

}  // namespace

Comparison compare_metrics(const std::vector<std::string>& paths) {
    if (paths.size() < 2)
        throw std::invalid_argument("compare needs at least two metrics files");
    Comparison c;
    for (const char* name : kColumns) c.metrics.push_back(name);

    std::vector<double> ref;
    for (const std::string& path : paths) {
        Metrics m = read_metrics_json(path);
        ComparisonRow row;
        row.file = path;
        row.values = column_values(m);
        if (ref.empty()) {
            ref = row.values;
            row.delta_pct.assign(row.values.size(), 0.0);
        } else {
            for (std::size_t i = 0; i < row.values.size(); ++i) {
                double d;
                if (ref[i] != 0.0)
                    d = (row.values[i] - ref[i]) / ref[i] * 100.0;
                else
                    d = row.values[i] == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
                row.delta_pct.push_back(d);
            }
        }
        c.rows.push_back(std::move(row));
    }
    return c;
}

std::string comparison_text(const Comparison& c) {
    std::ostringstream out;
    char buf[64];
    std::size_t name_w = 4;
    for (const ComparisonRow& r : c.rows) name_w = std::max(name_w, r.file.size());

    out << std::string(name_w, ' ');
    for (const std::string& m : c.metrics) {
        std::snprintf(buf, sizeof buf, "  %24s", m.c_str());
        out << buf;
    }
    out << '\n';
    for (std::size_t i = 0; i < c.rows.size(); ++i) {
        const ComparisonRow& r = c.rows[i];
        out << r.file << std::string(name_w - r.file.size(), ' ');
        for (std::size_t k = 0; k < r.values.size(); ++k) {
            if (i == 0)
                std::snprintf(buf, sizeof buf, "  %24.3f", r.values[k]);
            else
                std::snprintf(buf, sizeof buf, "  %14.3f (%+6.2f%%)", r.values[k],
                              r.delta_pct[k]);
            out << buf;
        }
        out << '\n';
    }
    return out.str();
}

std::string comparison_csv(const Comparison& c) {
    std::ostringstream out;
    out << "file";
    for (const std::string& m : c.metrics) out << ',' << m << ',' << m << "_delta_pct";
    out << '\n';
    char buf[64];
    for (const ComparisonRow& r : c.rows) {
        out << r.file;
        for (std::size_t k = 0; k < r.values.size(); ++k) {
            std::snprintf(buf, sizeof buf, ",%.6f,%.4f", r.values[k], r.delta_pct[k]);
            out << buf;
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace shoalsim
