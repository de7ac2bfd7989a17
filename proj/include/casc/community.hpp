#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "casc/graph.hpp"

namespace casc {

struct CommunityPartition {
    // node index -> community id, dense ids 0..k-1, each id used at least
    // once. Ids are ordered by the smallest member node index.
    std::vector<std::uint32_t> assignment;
    std::uint32_t k = 0;
    double modularity = 0.0;
    // Modularity of the flattened assignment after each pass (one pass =
    // one local-move phase plus aggregation). Non-decreasing.
    std::vector<double> pass_q;
};

struct LouvainOptions {
    std::uint64_t seed = 0;
    double resolution = 1.0;
    std::uint32_t max_passes = 32;
    // Accept graphs with zero edges, producing the singleton partition.
    bool allow_edgeless = false;
};

// Louvain on the undirected weighted projection of g: each directed pair
// contributes weight 1, a reciprocal pair weight 2. Node visiting order is
// shuffled per pass from opts.seed; gain ties choose the lowest community
// id. Single-threaded and deterministic for fixed (g, seed, resolution).
CommunityPartition louvain(const InfluenceGraph& g, const LouvainOptions& opts = {});

// Modularity of an arbitrary assignment on the same projection.
double modularity(const InfluenceGraph& g, std::span<const std::uint32_t> assignment,
                  double resolution = 1.0);

std::uint32_t community_of(const CommunityPartition& p, NodeId v);
// Sorted distinct community ids touched by the node set.
std::vector<std::uint32_t> communities_of(const CommunityPartition& p,
                                          std::span<const NodeId> nodes);

// TSV `uid<TAB>community_id`, one line per node in node index order.
void save_partition(const CommunityPartition& p, const InfluenceGraph& g,
                    const std::string& path);
// Requires every graph node exactly once; unknown, missing or repeated
// uids are consistency errors. Labels are canonicalized to the dense
// smallest-member order (identity for files written by save_partition) and
// modularity is recomputed at resolution 1.
CommunityPartition load_partition(const std::string& path, const InfluenceGraph& g);

} // namespace casc
