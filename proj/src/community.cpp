#include "casc/community.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_map>

#include "casc/errors.hpp"
#include "casc/rng.hpp"

namespace casc {

namespace {

// Undirected weighted multigraph; loops appear once coarsened.
struct WeightedGraph {
    std::size_t n = 0;
    std::vector<std::uint64_t> off; // n+1
    std::vector<std::uint32_t> nbr; // no loops here, sorted per node
    std::vector<double> w;
    std::vector<double> self_w; // loop weight
    std::vector<double> degree; // incident weight, loops counted twice
    double m2 = 0;              // total degree
};

WeightedGraph project(const InfluenceGraph& g) {
    WeightedGraph wg;
    wg.n = g.node_count();
    wg.off.assign(wg.n + 1, 0);
    wg.self_w.assign(wg.n, 0.0);
    wg.degree.assign(wg.n, 0.0);

    std::vector<std::uint32_t> scratch;
    std::vector<std::vector<std::pair<std::uint32_t, double>>> adj(wg.n);
    for (NodeId v = 0; v < wg.n; ++v) {
        auto out = g.out_neighbors(v);
        auto in = g.in_neighbors(v);
        scratch.assign(out.begin(), out.end());
        scratch.insert(scratch.end(), in.begin(), in.end());
        std::sort(scratch.begin(), scratch.end());
        auto& row = adj[v];
        for (std::size_t i = 0; i < scratch.size();) {
            std::size_t j = i;
            while (j < scratch.size() && scratch[j] == scratch[i]) ++j;
            row.emplace_back(scratch[i], static_cast<double>(j - i)); // 1, or 2 if reciprocal
            i = j;
        }
    }
    for (std::size_t v = 0; v < wg.n; ++v) wg.off[v + 1] = wg.off[v] + adj[v].size();
    wg.nbr.resize(wg.off[wg.n]);
    wg.w.resize(wg.off[wg.n]);
    for (std::size_t v = 0; v < wg.n; ++v) {
        std::size_t base = wg.off[v];
        for (std::size_t i = 0; i < adj[v].size(); ++i) {
            wg.nbr[base + i] = adj[v][i].first;
            wg.w[base + i] = adj[v][i].second;
            wg.degree[v] += adj[v][i].second;
        }
    }
    for (double d : wg.degree) wg.m2 += d;
    return wg;
}

double weighted_modularity(const WeightedGraph& wg, std::span<const std::uint32_t> comm,
                           double resolution) {
    std::uint32_t k = 0;
    for (auto c : comm) k = std::max(k, c + 1);
    std::vector<double> intra(k, 0.0), tot(k, 0.0);
    for (std::size_t v = 0; v < wg.n; ++v) {
        tot[comm[v]] += wg.degree[v];
        intra[comm[v]] += 2.0 * wg.self_w[v];
        for (std::size_t e = wg.off[v]; e < wg.off[v + 1]; ++e)
            if (comm[wg.nbr[e]] == comm[v]) intra[comm[v]] += wg.w[e];
    }
    double q = 0.0;
    for (std::uint32_t c = 0; c < k; ++c) {
        double frac = tot[c] / wg.m2;
        q += intra[c] / wg.m2 - resolution * frac * frac;
    }
    return q;
}

// One complete local-move phase. Returns true if any strictly improving
// move happened. comm starts as the identity.
bool local_move(const WeightedGraph& wg, std::span<const std::uint32_t> order,
                std::vector<std::uint32_t>& comm, double resolution) {
    std::vector<double> stot(wg.degree.begin(), wg.degree.end());
    std::vector<double> weight_to(wg.n, 0.0);
    std::vector<std::uint32_t> touched;
    bool any_strict = false;
    constexpr int kMaxSweeps = 128;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        bool sweep_strict = false;
        for (std::uint32_t i : order) {
            const std::uint32_t c0 = comm[i];
            touched.clear();
            for (std::size_t e = wg.off[i]; e < wg.off[i + 1]; ++e) {
                std::uint32_t c = comm[wg.nbr[e]];
                if (weight_to[c] == 0.0) touched.push_back(c);
                weight_to[c] += wg.w[e];
            }
            stot[c0] -= wg.degree[i];
            const double scale = resolution * wg.degree[i] / wg.m2;
            const double baseline = weight_to[c0] - scale * stot[c0];
            std::uint32_t best = c0;
            double best_score = baseline;
            std::sort(touched.begin(), touched.end());
            for (std::uint32_t c : touched) {
                if (c == c0) continue;
                double score = weight_to[c] - scale * stot[c];
                if (score > best_score) { // first max in ascending order wins ties
                    best_score = score;
                    best = c;
                }
            }
            stot[best] += wg.degree[i];
            if (best != c0) {
                comm[i] = best;
                sweep_strict = true;
            }
            for (std::uint32_t c : touched) weight_to[c] = 0.0;
        }
        if (!sweep_strict) break;
        any_strict = true;
    }
    return any_strict;
}

// Renumber to dense ids ordered by smallest member index.
std::uint32_t compress(std::vector<std::uint32_t>& comm) {
    std::unordered_map<std::uint32_t, std::uint32_t> remap;
    std::uint32_t next = 0;
    for (auto& c : comm) {
        auto [it, inserted] = remap.try_emplace(c, next);
        if (inserted) ++next;
        c = it->second;
    }
    return next;
}

WeightedGraph coarsen(const WeightedGraph& wg, std::span<const std::uint32_t> comm,
                      std::uint32_t k) {
    WeightedGraph cg;
    cg.n = k;
    cg.off.assign(k + 1, 0);
    cg.self_w.assign(k, 0.0);
    cg.degree.assign(k, 0.0);

    std::vector<std::vector<std::uint32_t>> members(k);
    for (std::uint32_t v = 0; v < wg.n; ++v) members[comm[v]].push_back(v);

    std::vector<double> acc(k, 0.0);
    std::vector<std::uint32_t> touched;
    std::vector<std::vector<std::pair<std::uint32_t, double>>> adj(k);
    for (std::uint32_t c = 0; c < k; ++c) {
        touched.clear();
        double intra = 0.0;
        for (std::uint32_t v : members[c]) {
            intra += 2.0 * wg.self_w[v];
            for (std::size_t e = wg.off[v]; e < wg.off[v + 1]; ++e) {
                std::uint32_t cu = comm[wg.nbr[e]];
                if (cu == c) {
                    intra += wg.w[e];
                    continue;
                }
                if (acc[cu] == 0.0) touched.push_back(cu);
                acc[cu] += wg.w[e];
            }
        }
        std::sort(touched.begin(), touched.end());
        for (std::uint32_t cu : touched) {
            adj[c].emplace_back(cu, acc[cu]);
            acc[cu] = 0.0;
        }
        cg.self_w[c] = intra / 2.0; // each intra pair was seen from both ends
    }
    for (std::uint32_t c = 0; c < k; ++c) cg.off[c + 1] = cg.off[c] + adj[c].size();
    cg.nbr.resize(cg.off[k]);
    cg.w.resize(cg.off[k]);
    for (std::uint32_t c = 0; c < k; ++c) {
        std::size_t base = cg.off[c];
        double deg = 2.0 * cg.self_w[c];
        for (std::size_t i = 0; i < adj[c].size(); ++i) {
            cg.nbr[base + i] = adj[c][i].first;
            cg.w[base + i] = adj[c][i].second;
            deg += adj[c][i].second;
        }
        cg.degree[c] = deg;
    }
    cg.m2 = wg.m2;
    return cg;
}

std::vector<std::uint32_t> canonical_relabel(std::vector<std::uint32_t> assignment) {
    // first occurrence while scanning ascending node index = smallest member
    compress(assignment);
    return assignment;
}

} // namespace

double modularity(const InfluenceGraph& g, std::span<const std::uint32_t> assignment,
                  double resolution) {
    if (assignment.size() != g.node_count())
        throw param_error("assignment size does not match node count");
    if (g.edge_count() == 0) return 0.0;
    auto wg = project(g);
    return weighted_modularity(wg, assignment, resolution);
}

CommunityPartition louvain(const InfluenceGraph& g, const LouvainOptions& opts) {
    if (g.node_count() == 0) throw data_error("cannot detect communities in an empty graph");
    if (opts.resolution <= 0) throw param_error("resolution must be positive");
    if (opts.max_passes == 0) throw param_error("max_passes must be at least 1");

    CommunityPartition part;
    part.assignment.resize(g.node_count());
    if (g.edge_count() == 0) {
        if (!opts.allow_edgeless) throw data_error("graph has no edges; pass allow_edgeless for singletons");
        std::iota(part.assignment.begin(), part.assignment.end(), 0u);
        part.k = static_cast<std::uint32_t>(g.node_count());
        part.modularity = 0.0;
        return part;
    }

    const WeightedGraph level0 = project(g);
    WeightedGraph wg = level0;
    std::vector<std::uint32_t> flat(g.node_count());
    std::iota(flat.begin(), flat.end(), 0u);

    for (std::uint32_t pass = 0; pass < opts.max_passes; ++pass) {
        std::vector<std::uint32_t> order(wg.n);
        std::iota(order.begin(), order.end(), 0u);
        Rng rng(derive_seed(opts.seed, SeedStream::louvain, pass));
        rng.shuffle(order);

        std::vector<std::uint32_t> comm(wg.n);
        std::iota(comm.begin(), comm.end(), 0u);
        if (!local_move(wg, order, comm, opts.resolution)) break;

        std::uint32_t k = compress(comm);
        for (auto& c : flat) c = comm[c];
        part.pass_q.push_back(weighted_modularity(level0, flat, opts.resolution));
        if (k == wg.n) break; // nothing merged, next pass would repeat
        wg = coarsen(wg, comm, k);
    }

    part.assignment = canonical_relabel(std::move(flat));
    part.k = 0;
    for (auto c : part.assignment) part.k = std::max(part.k, c + 1);
    part.modularity = weighted_modularity(level0, part.assignment, opts.resolution);
    return part;
}

std::uint32_t community_of(const CommunityPartition& p, NodeId v) {
    if (v >= p.assignment.size()) throw bounds_error("node index out of range");
    return p.assignment[v];
}

std::vector<std::uint32_t> communities_of(const CommunityPartition& p,
                                          std::span<const NodeId> nodes) {
    std::vector<std::uint32_t> ids;
    ids.reserve(nodes.size());
    for (NodeId v : nodes) ids.push_back(community_of(p, v));
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

void save_partition(const CommunityPartition& p, const InfluenceGraph& g,
                    const std::string& path) {
    if (p.assignment.size() != g.node_count())
        throw param_error("partition does not match the graph");
    std::ofstream out(path);
    if (!out) throw io_error("cannot open " + path + " for writing");
    for (NodeId v = 0; v < g.node_count(); ++v)
        out << g.uid_of(v) << '\t' << p.assignment[v] << '\n';
    if (!out) throw io_error("failed writing " + path);
}

CommunityPartition load_partition(const std::string& path, const InfluenceGraph& g) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path);

    CommunityPartition part;
    part.assignment.assign(g.node_count(), 0);
    std::vector<bool> filled(g.node_count(), false);
    std::string line;
    std::uint64_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t tab = line.find('\t');
        if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos)
            throw format_error("line " + std::to_string(lineno) + ": expected uid<TAB>community_id");
        std::string_view uid(line.data(), tab);
        std::string_view id_field(line.data() + tab + 1, line.size() - tab - 1);
        std::uint32_t id;
        auto [ptr, ec] = std::from_chars(id_field.data(), id_field.data() + id_field.size(), id);
        if (ec != std::errc{} || ptr != id_field.data() + id_field.size())
            throw format_error("line " + std::to_string(lineno) + ": community id is not an integer");
        auto node = g.node_of(uid);
        if (!node) throw data_error("line " + std::to_string(lineno) + ": uid not in graph");
        if (filled[*node]) throw data_error("line " + std::to_string(lineno) + ": repeated uid");
        filled[*node] = true;
        part.assignment[*node] = id;
    }
    for (NodeId v = 0; v < g.node_count(); ++v)
        if (!filled[v]) throw data_error("partition file is missing uid " + g.uid_of(v));

    part.assignment = canonical_relabel(std::move(part.assignment));
    for (auto c : part.assignment) part.k = std::max(part.k, c + 1);
    part.modularity = modularity(g, part.assignment, 1.0);
    return part;
}

} // namespace casc
