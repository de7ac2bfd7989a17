#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "casc/events.hpp"

namespace casc {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = static_cast<NodeId>(-1);

// Static directed influence graph in dual-direction CSR form. Edge (v,v')
// means v' reposted v at least once in the graph window. Immutable after
// build; safe for concurrent reads.
class InfluenceGraph {
public:
    InfluenceGraph() = default;

    // Takes external uids (index = node id) and a directed edge list.
    // Self-loops are dropped and duplicate edges collapsed.
    InfluenceGraph(std::vector<std::string> uids, std::vector<std::pair<NodeId, NodeId>> edges);

    // uid_index_ holds views into uids_, so copies must re-index. Moves are
    // fine as-is: the string buffers survive a vector move.
    InfluenceGraph(const InfluenceGraph& other);
    InfluenceGraph& operator=(const InfluenceGraph& other);
    InfluenceGraph(InfluenceGraph&&) = default;
    InfluenceGraph& operator=(InfluenceGraph&&) = default;

    std::size_t node_count() const { return uids_.size(); }
    std::size_t edge_count() const { return out_targets_.size(); }

    std::span<const NodeId> out_neighbors(NodeId v) const {
        check_node(v);
        return {out_targets_.data() + out_offsets_[v], out_targets_.data() + out_offsets_[v + 1]};
    }
    std::span<const NodeId> in_neighbors(NodeId v) const {
        check_node(v);
        return {in_targets_.data() + in_offsets_[v], in_targets_.data() + in_offsets_[v + 1]};
    }

    bool has_edge(NodeId from, NodeId to) const; // binary search on sorted list

    std::optional<NodeId> node_of(std::string_view uid) const;
    const std::string& uid_of(NodeId v) const {
        check_node(v);
        return uids_[v];
    }
    std::span<const std::string> uids() const { return uids_; }

    std::span<const std::uint64_t> out_offsets() const { return out_offsets_; }
    std::span<const NodeId> out_targets() const { return out_targets_; }
    std::span<const std::uint64_t> in_offsets() const { return in_offsets_; }
    std::span<const NodeId> in_targets() const { return in_targets_; }

    bool operator==(const InfluenceGraph& other) const {
        return uids_ == other.uids_ && out_offsets_ == other.out_offsets_ &&
               out_targets_ == other.out_targets_ && in_offsets_ == other.in_offsets_ &&
               in_targets_ == other.in_targets_;
    }

private:
    void check_node(NodeId v) const;
    void rebuild_uid_index();

    std::vector<std::string> uids_;
    std::unordered_map<std::string_view, NodeId> uid_index_; // views into uids_
    std::vector<std::uint64_t> out_offsets_, in_offsets_;    // size |V|+1
    std::vector<NodeId> out_targets_, in_targets_;           // sorted per node

    friend InfluenceGraph load_graph(const std::string& path);
};

enum class EdgeSource { parent, root };

struct BuildGraphStats {
    std::uint64_t events_seen = 0;
    std::uint64_t edges_resolved = 0;   // before dedup, after self-loop drop
    std::uint64_t self_loops_dropped = 0;
    std::uint64_t unresolved_reposts = 0; // no parent (in parent mode) and no root
};

// One edge per observed (influencer, reposter) pair. In parent mode the
// influencer is the repost's parent uid, falling back to the cascade root
// author when absent; in root mode it is always the root author.
InfluenceGraph build_graph(std::span<const CascadeGroup> groups, EdgeSource source,
                           BuildGraphStats* stats = nullptr);

struct GraphStatsReport {
    std::uint64_t nodes = 0;
    std::uint64_t edges = 0;
    std::uint64_t wcc_count = 0;
    // Mean local clustering coefficient on the undirected projection, over
    // nodes of undirected degree >= 2 (others have coefficient 0 and are
    // excluded from this denominator).
    double avg_clustering = 0.0;
    // Same sum divided by |V|, i.e. degree<2 nodes counted as zeros.
    double avg_clustering_all_nodes = 0.0;
    std::uint64_t clustering_eligible_nodes = 0;
    std::vector<std::uint64_t> in_degree_hist;  // index = degree
    std::vector<std::uint64_t> out_degree_hist;
};

GraphStatsReport graph_stats(const InfluenceGraph& g);

// Binary format: magic "CFG1", version u32, |V| u64, |E| u64, uid table
// (u32 length + UTF-8 bytes per node), out offsets (u64 * (|V|+1)),
// out targets (u32 * |E|), in offsets, in targets. Little-endian.
void save_graph(const InfluenceGraph& g, const std::string& path);
InfluenceGraph load_graph(const std::string& path);

} // namespace casc
