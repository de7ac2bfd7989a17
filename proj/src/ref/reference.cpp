#include "ref/reference.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <map>
#include <numeric>

#include "casc/errors.hpp"

namespace casc::ref {

std::set<std::pair<std::string, std::string>> edge_set(std::span<const CascadeGroup> groups,
                                                       EdgeSource source) {
    std::set<std::pair<std::string, std::string>> edges;
    for (const auto& group : groups) {
        if (group.events.empty()) continue;
        for (std::size_t i = 0; i < group.events.size(); ++i) {
            const auto& ev = group.events[i];
            if (i == 0 && group.rooted) continue;
            std::string influencer;
            if (source == EdgeSource::parent && ev.has_parent)
                influencer = ev.parent_uid;
            else if (group.rooted)
                influencer = group.events.front().uid;
            else
                continue;
            if (influencer == ev.uid) continue;
            edges.emplace(influencer, ev.uid);
        }
    }
    return edges;
}

namespace {

std::vector<std::set<NodeId>> undirected_adjacency(const InfluenceGraph& g) {
    std::vector<std::set<NodeId>> adj(g.node_count());
    for (NodeId v = 0; v < g.node_count(); ++v)
        for (NodeId u : g.out_neighbors(v)) {
            adj[v].insert(u);
            adj[u].insert(v);
        }
    return adj;
}

} // namespace

std::uint64_t wcc_count(const InfluenceGraph& g) {
    auto adj = undirected_adjacency(g);
    std::vector<bool> seen(g.node_count(), false);
    std::uint64_t components = 0;
    for (NodeId start = 0; start < g.node_count(); ++start) {
        if (seen[start]) continue;
        ++components;
        std::deque<NodeId> queue{start};
        seen[start] = true;
        while (!queue.empty()) {
            NodeId v = queue.front();
            queue.pop_front();
            for (NodeId u : adj[v])
                if (!seen[u]) {
                    seen[u] = true;
                    queue.push_back(u);
                }
        }
    }
    return components;
}

namespace {

struct PairWeights {
    std::map<std::pair<NodeId, NodeId>, double> w; // key: (min,max)
    std::vector<double> degree;
    double m2 = 0;
};

PairWeights pair_weights(const InfluenceGraph& g) {
    PairWeights pw;
    pw.degree.assign(g.node_count(), 0.0);
    for (NodeId v = 0; v < g.node_count(); ++v)
        for (NodeId u : g.out_neighbors(v))
            pw.w[{std::min(u, v), std::max(u, v)}] += 1.0;
    for (const auto& [pair, weight] : pw.w) {
        pw.degree[pair.first] += weight;
        pw.degree[pair.second] += weight;
        pw.m2 += 2.0 * weight;
    }
    return pw;
}

double modularity_of(const PairWeights& pw, std::span<const std::uint32_t> assignment,
                     double resolution) {
    if (pw.m2 == 0) return 0.0;
    double intra = 0.0;
    for (const auto& [pair, weight] : pw.w)
        if (assignment[pair.first] == assignment[pair.second]) intra += 2.0 * weight;
    std::map<std::uint32_t, double> tot;
    for (std::size_t v = 0; v < assignment.size(); ++v) tot[assignment[v]] += pw.degree[v];
    double q = intra / pw.m2;
    for (const auto& [c, t] : tot) q -= resolution * (t / pw.m2) * (t / pw.m2);
    return q;
}

} // namespace

double modularity_direct(const InfluenceGraph& g, std::span<const std::uint32_t> assignment,
                         double resolution) {
    return modularity_of(pair_weights(g), assignment, resolution);
}

double max_modularity_exhaustive(const InfluenceGraph& g, double resolution) {
    const std::size_t n = g.node_count();
    if (n == 0 || n > 12) throw param_error("exhaustive search handles 1..12 nodes");
    auto pw = pair_weights(g);

    std::vector<std::uint32_t> rgs(n, 0);
    double best = modularity_of(pw, rgs, resolution);
    // restricted growth strings: rgs[0]=0, rgs[i] <= 1+max(rgs[0..i-1])
    while (true) {
        std::size_t i = n;
        while (i-- > 1) {
            std::uint32_t cap = 0;
            for (std::size_t j = 0; j < i; ++j) cap = std::max(cap, rgs[j]);
            if (rgs[i] <= cap) {
                ++rgs[i];
                for (std::size_t j = i + 1; j < n; ++j) rgs[j] = 0;
                break;
            }
            if (i == 1) return best;
        }
        best = std::max(best, modularity_of(pw, rgs, resolution));
    }
}

namespace {

// Enumerates multiset partitions of the class-count vector `remaining`.
// Canonical form: blocks in non-increasing lexicographic order, enforced by
// requiring each block <= the previous one (prefix-tight comparison), so
// every multiset of blocks is emitted exactly once.
void enumerate_partitions(std::vector<std::uint32_t>& remaining,
                          const std::vector<std::uint32_t>& prev,
                          std::vector<std::vector<std::uint32_t>>& blocks,
                          const std::function<void(const std::vector<std::vector<std::uint32_t>>&)>& emit) {
    if (std::all_of(remaining.begin(), remaining.end(), [](auto r) { return r == 0; })) {
        emit(blocks);
        return;
    }
    const std::size_t k = remaining.size();
    std::vector<std::uint32_t> block(k, 0);
    std::function<void(std::size_t, bool)> gen = [&](std::size_t pos, bool tight) {
        if (pos == k) {
            if (std::all_of(block.begin(), block.end(), [](auto b) { return b == 0; })) return;
            std::vector<std::uint32_t> chosen = block;
            for (std::size_t i = 0; i < k; ++i) remaining[i] -= chosen[i];
            blocks.push_back(chosen);
            enumerate_partitions(remaining, chosen, blocks, emit);
            blocks.pop_back();
            for (std::size_t i = 0; i < k; ++i) remaining[i] += chosen[i];
            return;
        }
        std::uint32_t hi = remaining[pos];
        if (tight) hi = std::min(hi, prev[pos]);
        for (std::uint32_t v = hi + 1; v-- > 0;) {
            block[pos] = v;
            gen(pos + 1, tight && v == prev[pos]);
        }
        block[pos] = 0;
    };
    gen(0, !prev.empty());
}

} // namespace

double max_modularity_twins(const InfluenceGraph& g, double resolution) {
    const std::size_t n = g.node_count();
    if (n == 0) throw param_error("empty graph");
    auto pw = pair_weights(g);
    auto weight = [&](NodeId a, NodeId b) -> double {
        auto it = pw.w.find({std::min(a, b), std::max(a, b)});
        return it == pw.w.end() ? 0.0 : it->second;
    };

    // group nodes into classes of pairwise-interchangeable nodes
    std::vector<std::vector<NodeId>> classes;
    for (NodeId v = 0; v < n; ++v) {
        bool placed = false;
        for (auto& cls : classes) {
            NodeId rep = cls.front();
            bool twin = true;
            for (NodeId x = 0; x < n && twin; ++x) {
                if (x == v || x == rep) continue;
                if (weight(v, x) != weight(rep, x)) twin = false;
            }
            if (twin) {
                cls.push_back(v);
                placed = true;
                break;
            }
        }
        if (!placed) classes.push_back({v});
    }
    const std::size_t nc = classes.size();

    // verify weights are uniform within and across classes
    std::vector<std::vector<double>> cross(nc, std::vector<double>(nc, 0.0));
    std::vector<double> within(nc, 0.0);
    for (std::size_t a = 0; a < nc; ++a) {
        if (classes[a].size() >= 2) {
            within[a] = weight(classes[a][0], classes[a][1]);
            for (std::size_t i = 0; i < classes[a].size(); ++i)
                for (std::size_t j = i + 1; j < classes[a].size(); ++j)
                    if (weight(classes[a][i], classes[a][j]) != within[a])
                        throw param_error("graph is not twin-reducible");
        }
        for (std::size_t b = a + 1; b < nc; ++b) {
            cross[a][b] = cross[b][a] = weight(classes[a][0], classes[b][0]);
            for (NodeId va : classes[a])
                for (NodeId vb : classes[b])
                    if (weight(va, vb) != cross[a][b])
                        throw param_error("graph is not twin-reducible");
        }
    }

    std::vector<double> class_degree(nc);
    for (std::size_t a = 0; a < nc; ++a)
        class_degree[a] = pw.degree[classes[a].front()];

    std::vector<std::uint32_t> total(nc);
    for (std::size_t a = 0; a < nc; ++a) total[a] = static_cast<std::uint32_t>(classes[a].size());

    double best = -2.0;
    auto evaluate = [&](const std::vector<std::vector<std::uint32_t>>& blocks) {
        double q = 0.0;
        for (const auto& blk : blocks) {
            double intra = 0.0, tot = 0.0;
            for (std::size_t a = 0; a < nc; ++a) {
                if (!blk[a]) continue;
                tot += blk[a] * class_degree[a];
                intra += static_cast<double>(blk[a]) * (blk[a] - 1) * within[a];
                for (std::size_t b = a + 1; b < nc; ++b)
                    if (blk[b]) intra += 2.0 * blk[a] * blk[b] * cross[a][b];
            }
            q += intra / pw.m2 - resolution * (tot / pw.m2) * (tot / pw.m2);
        }
        best = std::max(best, q);
    };

    std::vector<std::vector<std::uint32_t>> blocks;
    enumerate_partitions(total, {}, blocks, evaluate);
    return best;
}

CascadeSnapshot snapshot_full_scan(const Cascade& c, const InfluenceGraph& g, std::size_t m,
                                   const SnapshotOptions& opts) {
    if (m < 1 || m > c.final_size()) throw param_error("snapshot size out of range");
    CascadeSnapshot snap;
    snap.mid = c.mid;
    snap.m = m;
    snap.snapshot_time = c.adopters[m - 1].offset;

    std::map<NodeId, std::int64_t> adopted_at; // first m known adopters
    for (std::size_t i = 0; i < m; ++i) {
        NodeId v = c.adopters[i].node;
        if (v == kNoNode) {
            ++snap.unknown_adopter_count;
            continue;
        }
        if (!adopted_at.contains(v)) adopted_at[v] = c.adopters[i].offset;
        snap.adopters.push_back(v);
    }
    std::sort(snap.adopters.begin(), snap.adopters.end());

    for (NodeId v = 0; v < g.node_count(); ++v) {
        if (adopted_at.contains(v)) continue;
        bool exposed = false;
        std::int64_t first = 0;
        for (NodeId u : g.in_neighbors(v)) {
            auto it = adopted_at.find(u);
            if (it == adopted_at.end()) continue;
            if (!exposed || it->second < first) first = it->second;
            exposed = true;
        }
        if (!exposed) continue;
        bool fresh = opts.mode == LambdaMode::recency ? snap.snapshot_time - first <= opts.lambda
                                                      : first <= opts.lambda;
        (fresh ? snap.lambda_frontiers : snap.lambda_nonadopters).push_back(v);
    }
    return snap;
}

double adjusted_rand_index(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
    if (a.size() != b.size()) throw param_error("label vectors differ in length");
    const std::size_t n = a.size();
    if (n < 2) return 1.0;
    std::map<std::pair<std::uint32_t, std::uint32_t>, double> joint;
    std::map<std::uint32_t, double> ca, cb;
    for (std::size_t i = 0; i < n; ++i) {
        joint[{a[i], b[i]}] += 1;
        ca[a[i]] += 1;
        cb[b[i]] += 1;
    }
    auto choose2 = [](double x) { return x * (x - 1) / 2.0; };
    double sum_joint = 0, sum_a = 0, sum_b = 0;
    for (const auto& [k, v] : joint) sum_joint += choose2(v);
    for (const auto& [k, v] : ca) sum_a += choose2(v);
    for (const auto& [k, v] : cb) sum_b += choose2(v);
    double expected = sum_a * sum_b / choose2(static_cast<double>(n));
    double max_index = (sum_a + sum_b) / 2.0;
    if (max_index == expected) return 1.0; // both trivial partitions
    return (sum_joint - expected) / (max_index - expected);
}

double spearman_rho(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw param_error("series differ in length");
    const std::size_t n = x.size();
    if (n < 2) throw param_error("need at least two observations");
    auto ranks = [](std::span<const double> v) {
        std::vector<std::size_t> idx(v.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        std::vector<double> r(v.size());
        std::size_t i = 0;
        while (i < idx.size()) {
            std::size_t j = i;
            while (j < idx.size() && v[idx[j]] == v[idx[i]]) ++j;
            double avg = (static_cast<double>(i) + static_cast<double>(j - 1)) / 2.0 + 1.0;
            for (std::size_t t = i; t < j; ++t) r[idx[t]] = avg;
            i = j;
        }
        return r;
    };
    auto rx = ranks(x), ry = ranks(y);
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double cov = 0, vx = 0, vy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        cov += (rx[i] - mx) * (ry[i] - my);
        vx += (rx[i] - mx) * (rx[i] - mx);
        vy += (ry[i] - my) * (ry[i] - my);
    }
    if (vx == 0 || vy == 0) throw data_error("constant series has no rank correlation");
    return cov / std::sqrt(vx * vy);
}

std::pair<double, double> avg_clustering(const InfluenceGraph& g) {
    auto adj = undirected_adjacency(g);
    const std::size_t n = g.node_count();
    double sum = 0.0;
    std::uint64_t eligible = 0;
    for (NodeId v = 0; v < n; ++v) {
        const auto& nb = adj[v];
        if (nb.size() < 2) continue;
        ++eligible;
        std::uint64_t closed = 0;
        for (auto it1 = nb.begin(); it1 != nb.end(); ++it1)
            for (auto it2 = std::next(it1); it2 != nb.end(); ++it2)
                if (adj[*it1].contains(*it2)) ++closed;
        double pairs = static_cast<double>(nb.size()) * static_cast<double>(nb.size() - 1) / 2.0;
        sum += static_cast<double>(closed) / pairs;
    }
    double over_eligible = eligible ? sum / static_cast<double>(eligible) : 0.0;
    double over_all = n ? sum / static_cast<double>(n) : 0.0;
    return {over_eligible, over_all};
}

MeasureSet measure_direct(const CascadeSnapshot& s, const Cascade& c,
                          const CommunityPartition& p) {
    auto comm_set = [&](const std::vector<NodeId>& nodes) {
        std::set<std::uint32_t> out;
        for (NodeId v : nodes)
            if (v != kNoNode) out.insert(p.assignment.at(v));
        return out;
    };
    auto gini = [&](const std::vector<NodeId>& nodes, bool& degenerate) {
        std::map<std::uint32_t, std::uint64_t> counts;
        std::uint64_t total = 0;
        for (NodeId v : nodes) {
            if (v == kNoNode) continue;
            counts[p.assignment.at(v)] += 1;
            total += 1;
        }
        degenerate = total == 0;
        if (total == 0) return 0.0;
        double acc = 1.0;
        for (const auto& [comm, cnt] : counts) {
            double share = static_cast<double>(cnt) / static_cast<double>(total);
            acc -= share * share;
        }
        return acc;
    };
    auto inter = [](const std::set<std::uint32_t>& a, const std::set<std::uint32_t>& b) {
        std::uint32_t n = 0;
        for (std::uint32_t x : a)
            if (b.contains(x)) ++n;
        return n;
    };

    std::set<std::uint32_t> va = comm_set(s.adopters);
    std::set<std::uint32_t> vf = comm_set(s.lambda_frontiers);
    std::set<std::uint32_t> vn = comm_set(s.lambda_nonadopters);

    MeasureSet ms;
    ms.k_adopters = static_cast<std::uint32_t>(va.size());
    ms.k_frontiers = static_cast<std::uint32_t>(vf.size());
    ms.k_nonadopters = static_cast<std::uint32_t>(vn.size());
    ms.gini_adopters = gini(s.adopters, ms.gini_adopters_degenerate);
    ms.gini_frontiers = gini(s.lambda_frontiers, ms.gini_frontiers_degenerate);
    ms.gini_nonadopters = gini(s.lambda_nonadopters, ms.gini_nonadopters_degenerate);
    ms.overlap_af = inter(va, vf);
    ms.overlap_an = inter(va, vn);
    ms.overlap_fn = inter(vf, vn);
    ms.size_frontiers = s.lambda_frontiers.size();
    ms.size_nonadopters = s.lambda_nonadopters.size();
    if (s.m >= 2) {
        double sum = 0.0;
        for (std::size_t i = 1; i < s.m; ++i) sum += static_cast<double>(c.adopters[i].offset);
        ms.avg_time_to_adoption = sum / static_cast<double>(s.m - 1);
    } else {
        ms.avg_time_degenerate = true;
    }
    return ms;
}

} // namespace casc::ref
