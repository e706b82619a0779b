#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace shoalsim {

using ValidatorId = std::uint32_t;
using Round = std::int64_t;

// Virtual time, microseconds. Configs and reports use milliseconds;
// the simulator core never touches floating point time.
using SimTime = std::int64_t;

inline SimTime ms_to_us(double ms) {
    return static_cast<SimTime>(ms * 1000.0 + (ms >= 0 ? 0.5 : -0.5));
}

inline double us_to_ms(SimTime us) {
    return static_cast<double>(us) / 1000.0;
}

// Identity of a DAG vertex: one validator contributes at most one vertex
// per round, so (round, author) is a complete key.
struct VertexId {
    Round round = 0;
    ValidatorId author = 0;

    // Packed key preserving (round, author) order under integer compare.
    // Rounds stay far below 2^43 and validator counts below 2^20.
    std::uint64_t packed() const {
        return (static_cast<std::uint64_t>(round) << 20) |
               static_cast<std::uint64_t>(author);
    }
    static VertexId unpack(std::uint64_t key) {
        return VertexId{static_cast<Round>(key >> 20),
                        static_cast<ValidatorId>(key & 0xFFFFFu)};
    }

    friend bool operator==(const VertexId& a, const VertexId& b) {
        return a.round == b.round && a.author == b.author;
    }
    friend bool operator!=(const VertexId& a, const VertexId& b) { return !(a == b); }
    friend bool operator<(const VertexId& a, const VertexId& b) {
        return a.packed() < b.packed();
    }

    std::string str() const {
        return std::to_string(round) + "/" + std::to_string(author);
    }
};

// Synthetic transaction batch metadata. Transactions themselves are never
// materialized; only counts and sizes feed the throughput math.
struct PayloadMeta {
    std::uint64_t batch_id = 0;
    std::uint32_t tx_count = 0;
    std::uint32_t byte_size = 0;

    friend bool operator==(const PayloadMeta& a, const PayloadMeta& b) {
        return a.batch_id == b.batch_id && a.tx_count == b.tx_count &&
               a.byte_size == b.byte_size;
    }
};

// One validator's contribution to one round. Immutable after creation;
// strong parents live in round-1, weak parents strictly earlier.
struct Vertex {
    VertexId id;
    std::vector<VertexId> strong_parents;  // sorted by (round, author)
    std::vector<VertexId> weak_parents;    // sorted by (round, author)
    PayloadMeta payload;
    SimTime created_at = 0;

    friend bool operator==(const Vertex& a, const Vertex& b) {
        return a.id == b.id && a.strong_parents == b.strong_parents &&
               a.weak_parents == b.weak_parents && a.payload == b.payload &&
               a.created_at == b.created_at;
    }
};

using VertexPtr = std::shared_ptr<const Vertex>;

}  // namespace shoalsim
