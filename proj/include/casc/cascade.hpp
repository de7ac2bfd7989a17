#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "casc/events.hpp"
#include "casc/graph.hpp"

namespace casc {

struct Adopter {
    NodeId node = kNoNode;   // kNoNode when the uid is absent from the graph
    std::int64_t offset = 0; // seconds since the original post

    bool operator==(const Adopter&) const = default;
};

// Reconstructed adoption sequence for one item. adopters[0] is the
// originator at offset 0; offsets are non-decreasing and nodes distinct.
struct Cascade {
    std::string mid;
    std::vector<Adopter> adopters;

    std::size_t final_size() const { return adopters.size(); }
};

// Maps a grouped cascade onto graph nodes. Adopters whose uid is not a
// graph node are kept in sequence with node == kNoNode. Rootless groups are
// rejected unless allow_rootless (their earliest event plays originator).
Cascade build_cascade(const CascadeGroup& group, const InfluenceGraph& g,
                      bool allow_rootless = false);

enum class LambdaMode {
    recency, // fresh iff snapshot_time - exposure <= lambda
    absolute // fresh iff exposure <= lambda
};

struct SnapshotOptions {
    std::int64_t lambda = 1800;
    LambdaMode mode = LambdaMode::recency;
};

// State of a cascade when its m-th adopter arrived. The frontier F (nodes
// of g outside the adopter set with at least one adopter in-neighbor) is
// split by exposure freshness into lambda_frontiers and lambda_nonadopters.
struct CascadeSnapshot {
    std::string mid;
    std::size_t m = 0;
    std::int64_t snapshot_time = 0;
    std::vector<NodeId> adopters; // known adopters among the first m, sorted
    std::size_t unknown_adopter_count = 0;
    std::vector<NodeId> lambda_frontiers;   // sorted
    std::vector<NodeId> lambda_nonadopters; // sorted, disjoint from the above

    bool operator==(const CascadeSnapshot&) const = default;
};

// Reusable buffers; lets repeated snapshot calls avoid per-call O(|V|)
// initialization. A default-constructed instance works for any graph.
struct SnapshotScratch {
    std::vector<std::uint32_t> adopter_epoch;
    std::vector<std::uint32_t> exposure_epoch;
    std::vector<std::int64_t> exposure;
    std::uint32_t epoch = 0;
};

// Requires 1 <= m <= c.final_size(). Exposure of a frontier node is the
// smallest adoption offset among its adopter in-neighbors.
CascadeSnapshot snapshot(const Cascade& c, const InfluenceGraph& g, std::size_t m,
                         const SnapshotOptions& opts = {}, SnapshotScratch* scratch = nullptr);

// snapshot() for every size <= final_size, in the given order.
std::vector<CascadeSnapshot> snapshot_series(const Cascade& c, const InfluenceGraph& g,
                                             std::span<const std::size_t> sizes,
                                             const SnapshotOptions& opts = {},
                                             SnapshotScratch* scratch = nullptr);

} // namespace casc
