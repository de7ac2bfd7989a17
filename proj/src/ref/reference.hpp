#pragma once

// Slow, obviously-correct reference implementations used to validate the
// optimized library code in tests and benchmarks. Everything here favors
// directness over speed: plain sets, nested loops, no shared state.

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "casc/cascade.hpp"
#include "casc/events.hpp"
#include "casc/features.hpp"
#include "casc/graph.hpp"

namespace casc::ref {

// Influencer/reposter uid pairs derived straight from the grouping rules,
// without interning or CSR construction.
std::set<std::pair<std::string, std::string>> edge_set(std::span<const CascadeGroup> groups,
                                                       EdgeSource source);

// Connected components of the undirected projection, by BFS.
std::uint64_t wcc_count(const InfluenceGraph& g);

// Per-node clustering coefficients from pairwise neighbor checks.
// Returns {mean over nodes with undirected degree >= 2, mean over all nodes}.
std::pair<double, double> avg_clustering(const InfluenceGraph& g);

// Modularity computed straight from the directed edge list (pair weight =
// number of directed edges between the endpoints).
double modularity_direct(const InfluenceGraph& g, std::span<const std::uint32_t> assignment,
                         double resolution);

// Maximum modularity over every partition, by restricted-growth-string
// enumeration. Only feasible for tiny graphs; refuses n > 12.
double max_modularity_exhaustive(const InfluenceGraph& g, double resolution);

// Maximum modularity for graphs whose nodes fall into interchangeable
// (twin) classes: nodes with identical weights to everyone else. Exact, and
// feasible well past 12 nodes when the class structure is coarse. Refuses
// graphs without uniform class-to-class weights.
double max_modularity_twins(const InfluenceGraph& g, double resolution);

// Snapshot computed by scanning every graph node and checking its
// in-neighbors against the adopter set directly.
CascadeSnapshot snapshot_full_scan(const Cascade& c, const InfluenceGraph& g, std::size_t m,
                                   const SnapshotOptions& opts);

// Measures computed from explicit std::set community memberships and plain
// accumulation loops, mirroring the definitions one to one.
MeasureSet measure_direct(const CascadeSnapshot& s, const Cascade& c,
                          const CommunityPartition& p);

// Adjusted Rand index between two labelings of the same node set.
double adjusted_rand_index(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b);

// Spearman rank correlation; average ranks on ties.
double spearman_rho(std::span<const double> x, std::span<const double> y);

} // namespace casc::ref
