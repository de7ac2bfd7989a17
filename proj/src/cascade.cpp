#include "casc/cascade.hpp"

#include <algorithm>
#include <limits>

#include "casc/errors.hpp"

namespace casc {

Cascade build_cascade(const CascadeGroup& group, const InfluenceGraph& g, bool allow_rootless) {
    if (group.events.empty()) throw data_error("cascade group has no events");
    if (!group.rooted && !allow_rootless)
        throw data_error("cascade " + group.mid + " has no original post");

    Cascade c;
    c.mid = group.mid;
    c.adopters.reserve(group.events.size());
    const std::int64_t t0 = group.events.front().ts;
    for (const auto& ev : group.events) {
        Adopter a;
        if (auto node = g.node_of(ev.uid)) a.node = *node;
        a.offset = ev.ts - t0;
        c.adopters.push_back(a);
    }
    return c;
}

namespace {

void prepare(SnapshotScratch& s, std::size_t n) {
    if (s.adopter_epoch.size() != n || s.epoch == std::numeric_limits<std::uint32_t>::max()) {
        s.adopter_epoch.assign(n, 0);
        s.exposure_epoch.assign(n, 0);
        s.exposure.assign(n, 0);
        s.epoch = 0;
    }
    ++s.epoch;
}

} // namespace

CascadeSnapshot snapshot(const Cascade& c, const InfluenceGraph& g, std::size_t m,
                         const SnapshotOptions& opts, SnapshotScratch* scratch) {
    if (m < 1) throw param_error("snapshot size must be at least 1");
    if (m > c.final_size())
        throw param_error("snapshot size " + std::to_string(m) + " exceeds cascade size " +
                          std::to_string(c.final_size()));
    if (opts.lambda < 0) throw param_error("lambda must be non-negative");

    SnapshotScratch local;
    SnapshotScratch& s = scratch ? *scratch : local;
    prepare(s, g.node_count());
    const std::uint32_t epoch = s.epoch;

    CascadeSnapshot snap;
    snap.mid = c.mid;
    snap.m = m;
    snap.snapshot_time = c.adopters[m - 1].offset;

    for (std::size_t i = 0; i < m; ++i) {
        NodeId v = c.adopters[i].node;
        if (v == kNoNode) {
            ++snap.unknown_adopter_count;
            continue;
        }
        s.adopter_epoch[v] = epoch;
        snap.adopters.push_back(v);
    }
    std::sort(snap.adopters.begin(), snap.adopters.end());

    // Offsets are non-decreasing, so the first adopter reaching a node
    // yields its minimum exposure.
    std::vector<NodeId> frontier;
    for (std::size_t i = 0; i < m; ++i) {
        NodeId u = c.adopters[i].node;
        if (u == kNoNode) continue;
        for (NodeId v : g.out_neighbors(u)) {
            if (s.adopter_epoch[v] == epoch) continue;
            if (s.exposure_epoch[v] == epoch) continue;
            s.exposure_epoch[v] = epoch;
            s.exposure[v] = c.adopters[i].offset;
            frontier.push_back(v);
        }
    }

    for (NodeId v : frontier) {
        bool fresh = opts.mode == LambdaMode::recency
                         ? snap.snapshot_time - s.exposure[v] <= opts.lambda
                         : s.exposure[v] <= opts.lambda;
        (fresh ? snap.lambda_frontiers : snap.lambda_nonadopters).push_back(v);
    }
    std::sort(snap.lambda_frontiers.begin(), snap.lambda_frontiers.end());
    std::sort(snap.lambda_nonadopters.begin(), snap.lambda_nonadopters.end());
    return snap;
}

std::vector<CascadeSnapshot> snapshot_series(const Cascade& c, const InfluenceGraph& g,
                                             std::span<const std::size_t> sizes,
                                             const SnapshotOptions& opts,
                                             SnapshotScratch* scratch) {
    std::vector<CascadeSnapshot> out;
    for (std::size_t m : sizes) {
        if (m > c.final_size()) continue;
        out.push_back(snapshot(c, g, m, opts, scratch));
    }
    return out;
}

} // namespace casc
