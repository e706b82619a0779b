#include "shoalsim/config_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace shoalsim {

namespace {

using ordered_json = nlohmann::ordered_json;

[[noreturn]] void bad_field(const std::string& key, const std::string& why) {
    throw std::invalid_argument("config." + key + ": " + why);
}

template <typename T>
T field_as(const ordered_json& j, const std::string& key) {
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        bad_field(key, "wrong type");
    }
}

const char* const kKnownKeys[] = {
    "n",           "mode",          "regions",    "latency_ms",        "jitter_frac",
    "delay_mult",  "crashes",       "withholders", "duration_rounds",  "seed",
    "timeout_ms",  "fallback_k",    "pipelining", "leader_reputation", "w_high",
    "w_low",       "epoch_seed",    "batch_tx",   "tx_bytes",          "latency_convention",
    "record_deliveries",
};

}  // namespace

const std::vector<std::string>& mode_names() {
    static const std::vector<std::string> names = {
        "vanilla", "vanilla-no-vote-timeout", "baseline", "baseline-fallback",
        "bullshark", "shoal", "shoal-pl", "shoal-lr",
    };
    return names;
}

bool apply_mode(SimConfig& cfg, const std::string& mode) {
    if (mode == "vanilla") {
        cfg.pacer.kind = PacerKind::VanillaBullshark;
    } else if (mode == "vanilla-no-vote-timeout") {
        cfg.pacer.kind = PacerKind::VanillaNoVoteTimeout;
    } else if (mode == "baseline" || mode == "bullshark") {
        cfg.pacer.kind = PacerKind::Baseline;
    } else if (mode == "baseline-fallback" || mode == "shoal" || mode == "shoal-pl" ||
               mode == "shoal-lr") {
        cfg.pacer.kind = PacerKind::BaselineWithFallback;
    } else {
        return false;
    }
    cfg.shoal.pipelining = mode == "shoal" || mode == "shoal-pl";
    cfg.shoal.leader_reputation = mode == "shoal" || mode == "shoal-lr";
    return true;
}

void apply_gcp3_topology(SimConfig& cfg) {
    cfg.region_of.resize(cfg.n);
    for (std::uint32_t i = 0; i < cfg.n; ++i) cfg.region_of[i] = i % 3;
    cfg.latency_ms = {{1.0, 66.5, 59.0}, {66.5, 1.0, 125.5}, {59.0, 125.5, 1.0}};
}

BenchConfig config_from_json_text(const std::string& text, const std::string& origin) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(origin + ": not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument(origin + ": top level must be an object");

    for (const auto& [key, val] : j.items()) {
        bool known = false;
        for (const char* k : kKnownKeys) known = known || key == k;
        if (!known) bad_field(key, "unknown field");
    }

    BenchConfig out;
    SimConfig& sim = out.sim;
    if (j.contains("n")) sim.n = field_as<std::uint32_t>(j, "n");
    if (j.contains("seed")) sim.seed = field_as<std::uint64_t>(j, "seed");
    sim.shoal.epoch_seed = sim.seed;

    if (j.contains("mode")) {
        out.mode = field_as<std::string>(j, "mode");
        if (!apply_mode(sim, out.mode)) bad_field("mode", "unknown mode " + out.mode);
    } else {
        apply_mode(sim, out.mode);
    }

    if (j.contains("regions")) sim.region_of = field_as<std::vector<std::uint32_t>>(j, "regions");
    if (j.contains("latency_ms"))
        sim.latency_ms = field_as<std::vector<std::vector<double>>>(j, "latency_ms");
    if (sim.region_of.empty() && sim.latency_ms.empty()) apply_gcp3_topology(sim);

    if (j.contains("jitter_frac")) sim.jitter_frac = field_as<double>(j, "jitter_frac");
    if (j.contains("delay_mult")) sim.delay_mult = field_as<std::vector<double>>(j, "delay_mult");
    if (j.contains("crashes")) {
        const auto& rows = j.at("crashes");
        if (!rows.is_array()) bad_field("crashes", "must be a list of [validator, at_us] pairs");
        for (const auto& row : rows) {
            if (!row.is_array() || row.size() != 2)
                bad_field("crashes", "must be a list of [validator, at_us] pairs");
            sim.crashes.emplace_back(row.at(0).get<ValidatorId>(), row.at(1).get<SimTime>());
        }
    }
    if (j.contains("withholders"))
        sim.withholders = field_as<std::vector<ValidatorId>>(j, "withholders");
    if (j.contains("duration_rounds")) sim.duration_rounds = field_as<Round>(j, "duration_rounds");
    if (j.contains("timeout_ms")) {
        double ms = field_as<double>(j, "timeout_ms");
        if (!(ms > 0)) bad_field("timeout_ms", "must be positive");
        sim.pacer.timeout = static_cast<SimTime>(std::llround(ms * 1000.0));
    }
    if (j.contains("fallback_k")) sim.pacer.fallback_k = field_as<std::uint32_t>(j, "fallback_k");
    if (j.contains("pipelining")) sim.shoal.pipelining = field_as<bool>(j, "pipelining");
    if (j.contains("leader_reputation"))
        sim.shoal.leader_reputation = field_as<bool>(j, "leader_reputation");
    if (j.contains("w_high")) sim.shoal.w_high = field_as<double>(j, "w_high");
    if (j.contains("w_low")) sim.shoal.w_low = field_as<double>(j, "w_low");
    if (j.contains("epoch_seed")) sim.shoal.epoch_seed = field_as<std::uint64_t>(j, "epoch_seed");
    if (j.contains("batch_tx")) sim.batch_tx = field_as<std::uint32_t>(j, "batch_tx");
    if (j.contains("tx_bytes")) sim.tx_bytes = field_as<std::uint32_t>(j, "tx_bytes");
    if (j.contains("record_deliveries"))
        sim.record_deliveries = field_as<bool>(j, "record_deliveries");
    if (j.contains("latency_convention")) {
        try {
            out.convention =
                parse_latency_convention(field_as<std::string>(j, "latency_convention"));
        } catch (const std::invalid_argument& e) {
            bad_field("latency_convention", e.what());
        }
    }
    return out;
}

BenchConfig config_from_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot read config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return config_from_json_text(buf.str(), path);
}

std::string config_to_json_text(const BenchConfig& cfg) {
    const SimConfig& sim = cfg.sim;
    ordered_json j;
    j["n"] = sim.n;
    j["mode"] = cfg.mode;
    j["regions"] = sim.region_of;
    j["latency_ms"] = sim.latency_ms;
    j["jitter_frac"] = sim.jitter_frac;
    j["delay_mult"] = sim.delay_mult;
    ordered_json crashes = ordered_json::array();
    for (const auto& [v, at] : sim.crashes) crashes.push_back({v, at});
    j["crashes"] = std::move(crashes);
    j["withholders"] = sim.withholders;
    j["duration_rounds"] = sim.duration_rounds;
    j["seed"] = sim.seed;
    j["timeout_ms"] = static_cast<double>(sim.pacer.timeout) / 1000.0;
    j["fallback_k"] = sim.pacer.fallback_k;
    j["pipelining"] = sim.shoal.pipelining;
    j["leader_reputation"] = sim.shoal.leader_reputation;
    j["w_high"] = sim.shoal.w_high;
    j["w_low"] = sim.shoal.w_low;
    j["epoch_seed"] = sim.shoal.epoch_seed;
    j["batch_tx"] = sim.batch_tx;
    j["tx_bytes"] = sim.tx_bytes;
    j["latency_convention"] = latency_convention_name(cfg.convention);
    return j.dump(2) + "\n";
}

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {
        "n10-nofail-baseline", "n10-nofail-shoal",   "n50-nofail-vanilla",
        "n50-nofail-baseline", "n50-nofail-shoal",   "n50-f8-vanilla",
        "n50-f8-baseline",     "n50-f8-shoal",       "fallback-adversarial",
    };
    return names;
}

std::optional<BenchConfig> preset_config(const std::string& name) {
    BenchConfig cfg;
    cfg.sim.seed = 42;
    cfg.sim.shoal.epoch_seed = 42;

    auto finish = [&](std::uint32_t n, const std::string& mode, Round rounds) {
        cfg.sim.n = n;
        cfg.mode = mode;
        apply_mode(cfg.sim, mode);
        cfg.sim.duration_rounds = rounds;
        apply_gcp3_topology(cfg.sim);
        return cfg;
    };
    // Single-region synchronous sanity runs: uniform delay, no jitter, so
    // every anchor is delivered everywhere and nothing ever skips.
    auto finish_lan = [&](std::uint32_t n, const std::string& mode, Round rounds) {
        cfg.sim.n = n;
        cfg.mode = mode;
        apply_mode(cfg.sim, mode);
        cfg.sim.duration_rounds = rounds;
        cfg.sim.jitter_frac = 0.0;
        cfg.sim.region_of.assign(n, 0);
        cfg.sim.latency_ms = {{1.0}};
        return cfg;
    };
    auto crash_first = [&](std::uint32_t k) {
        for (std::uint32_t v = 0; v < k; ++v) cfg.sim.crashes.emplace_back(v, 0);
    };

    if (name == "n10-nofail-baseline") return finish_lan(10, "baseline", 200);
    if (name == "n10-nofail-shoal") return finish_lan(10, "shoal", 200);
    if (name == "n50-nofail-vanilla") return finish(50, "vanilla", 300);
    if (name == "n50-nofail-baseline") return finish(50, "baseline", 300);
    if (name == "n50-nofail-shoal") return finish(50, "shoal", 300);
    if (name == "n50-f8-vanilla") {
        crash_first(8);
        return finish(50, "vanilla", 300);
    }
    if (name == "n50-f8-baseline") {
        crash_first(8);
        return finish(50, "baseline", 300);
    }
    if (name == "n50-f8-shoal") {
        crash_first(8);
        return finish(50, "shoal", 300);
    }
    if (name == "fallback-adversarial") {
        cfg.sim.crashes = {{0, 0}, {2, 0}};
        cfg.sim.pacer.fallback_k = 2;
        return finish(7, "shoal-pl", 40);
    }
    return std::nullopt;
}

}  // namespace shoalsim
