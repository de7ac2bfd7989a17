#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "casc/events.hpp"
#include "casc/graph.hpp"

namespace casc {

struct SynthConfig {
    std::uint32_t communities = 20;
    std::uint32_t nodes_per_community = 500;
    double p_in = 0.02;   // directed edge probability within a community
    double p_out = 0.0005; // across communities
    std::uint64_t cascades = 4000;
    double beta = 0.065;        // per-edge transmission probability
    double gamma = 3.0;         // max cross-community boost for planted-viral
                                // cascades; each draws its own from [1, gamma]
    double viral_fraction = 0.02;
    double tau = 600.0;         // mean adoption delay, seconds
    std::uint64_t seed = 0;
};

void validate(const SynthConfig& cfg);

struct SbmResult {
    InfluenceGraph graph;
    std::vector<std::uint32_t> communities; // planted label per node
};

// Directed stochastic block model; rows are generated independently with
// per-row seeds, so the edge set is reproducible in parallel.
SbmResult gen_sbm(const SynthConfig& cfg);

struct CascadeTruth {
    std::string mid;
    bool planted = false;
    std::uint64_t final_size = 0;
};

struct SimAdopter {
    NodeId node = kNoNode;
    std::int64_t ts = 0;
    NodeId parent = kNoNode; // kNoNode for the original post

    bool operator==(const SimAdopter&) const = default;
};

struct SimResult {
    std::vector<RepostEvent> events; // sorted by (ts, mid, uid), ingest-ready
    std::vector<CascadeTruth> truth; // cascade order
    // the generator's own adopter record per cascade, ordered exactly like
    // the grouped-and-rebuilt cascade; oracle for round-trip tests
    std::vector<std::vector<SimAdopter>> adopters;
};

// Independent-cascade diffusion with exponential delays. A uniform seed
// node posts at the cascade base time; every adopter attempts each
// out-edge once with probability beta (cross-community edges are boosted
// by gamma for planted-viral cascades). Repost timestamps land strictly
// after the original post.
SimResult simulate_cascades(const InfluenceGraph& g, std::span<const std::uint32_t> communities,
                            const SynthConfig& cfg);

} // namespace casc
