#pragma once

#include <optional>
#include <string>
#include <vector>

#include "shoalsim/metrics.hpp"
#include "shoalsim/sim.hpp"

namespace shoalsim {

// Everything one experiment needs: the simulation config plus the reporting
// convention. `mode` is the protocol variant string the CLI exposes.
struct BenchConfig {
    SimConfig sim;
    std::string mode = "baseline";
    LatencyConvention convention = LatencyConvention::FirstOrderer;
};

/// Mode strings accepted by --mode and the "mode" config field.
const std::vector<std::string>& mode_names();

/// Map a mode string onto pacer kind and frame switches:
///   vanilla                  anchor and vote timeouts, no Shoal features
///   vanilla-no-vote-timeout  anchor timeout only
///   baseline, bullshark      pure quorum pacing
///   baseline-fallback        quorum pacing with the timeout fallback armed
///   shoal                    fallback pacing, pipelining and reputation on
///   shoal-pl                 pipelining only
///   shoal-lr                 reputation only
/// Returns false on an unknown string.
bool apply_mode(SimConfig& cfg, const std::string& mode);

/// Stock wide-area topology: three regions assigned round-robin, one-way
/// delays of half the measured 118/251/133 ms round trips, 1 ms in-region.
void apply_gcp3_topology(SimConfig& cfg);

/// Parse a config document. Unknown keys, bad types and bad values all
/// throw std::invalid_argument naming the field. Fields omitted fall back
/// to defaults; a missing topology gets apply_gcp3_topology.
BenchConfig config_from_json_text(const std::string& text, const std::string& origin = "config");
BenchConfig config_from_json_file(const std::string& path);

/// Inverse of the parser, used to echo the effective config into run
/// directories. Byte-deterministic.
std::string config_to_json_text(const BenchConfig& cfg);

/// Canned experiments; preset_config returns nullopt for unknown names.
const std::vector<std::string>& preset_names();
std::optional<BenchConfig> preset_config(const std::string& name);

}  // namespace shoalsim
