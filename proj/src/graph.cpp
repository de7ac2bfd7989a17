#include "casc/graph.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>

#include "casc/errors.hpp"

namespace casc {

namespace {

void build_csr(std::size_t n, std::span<const std::pair<NodeId, NodeId>> edges, bool transpose,
               std::vector<std::uint64_t>& offsets, std::vector<NodeId>& targets) {
    offsets.assign(n + 1, 0);
    for (const auto& [u, v] : edges) ++offsets[(transpose ? v : u) + 1];
    std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
    targets.resize(edges.size());
    std::vector<std::uint64_t> cursor(offsets.begin(), offsets.end() - 1);
    for (const auto& [u, v] : edges) {
        NodeId src = transpose ? v : u;
        NodeId dst = transpose ? u : v;
        targets[cursor[src]++] = dst;
    }
    for (std::size_t v = 0; v < n; ++v)
        std::sort(targets.begin() + static_cast<std::ptrdiff_t>(offsets[v]),
                  targets.begin() + static_cast<std::ptrdiff_t>(offsets[v + 1]));
}

} // namespace

InfluenceGraph::InfluenceGraph(std::vector<std::string> uids,
                               std::vector<std::pair<NodeId, NodeId>> edges) {
    uids_ = std::move(uids);
    const std::size_t n = uids_.size();
    for (const auto& [u, v] : edges)
        if (u >= n || v >= n) throw bounds_error("edge endpoint out of range");
    std::erase_if(edges, [](const auto& e) { return e.first == e.second; });
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    build_csr(n, edges, false, out_offsets_, out_targets_);
    build_csr(n, edges, true, in_offsets_, in_targets_);
    rebuild_uid_index();
}

InfluenceGraph::InfluenceGraph(const InfluenceGraph& other)
    : uids_(other.uids_),
      out_offsets_(other.out_offsets_),
      in_offsets_(other.in_offsets_),
      out_targets_(other.out_targets_),
      in_targets_(other.in_targets_) {
    rebuild_uid_index();
}

InfluenceGraph& InfluenceGraph::operator=(const InfluenceGraph& other) {
    if (this == &other) return *this;
    uids_ = other.uids_;
    out_offsets_ = other.out_offsets_;
    in_offsets_ = other.in_offsets_;
    out_targets_ = other.out_targets_;
    in_targets_ = other.in_targets_;
    rebuild_uid_index();
    return *this;
}

void InfluenceGraph::check_node(NodeId v) const {
    if (v >= uids_.size())
        throw bounds_error("node index " + std::to_string(v) + " out of range (|V|=" +
                           std::to_string(uids_.size()) + ")");
}

void InfluenceGraph::rebuild_uid_index() {
    uid_index_.clear();
    uid_index_.reserve(uids_.size());
    for (NodeId v = 0; v < uids_.size(); ++v) uid_index_.emplace(uids_[v], v);
}

bool InfluenceGraph::has_edge(NodeId from, NodeId to) const {
    auto nb = out_neighbors(from);
    check_node(to);
    return std::binary_search(nb.begin(), nb.end(), to);
}

std::optional<NodeId> InfluenceGraph::node_of(std::string_view uid) const {
    auto it = uid_index_.find(uid);
    if (it == uid_index_.end()) return std::nullopt;
    return it->second;
}

InfluenceGraph build_graph(std::span<const CascadeGroup> groups, EdgeSource source,
                           BuildGraphStats* stats) {
    BuildGraphStats local;
    std::vector<std::string> uids;
    std::unordered_map<std::string, NodeId> index;
    std::vector<std::pair<NodeId, NodeId>> edges;

    auto intern = [&](const std::string& uid) -> NodeId {
        auto [it, inserted] = index.try_emplace(uid, static_cast<NodeId>(uids.size()));
        if (inserted) uids.push_back(uid);
        return it->second;
    };

    for (const auto& group : groups) {
        if (group.events.empty()) continue;
        const std::string& root_uid = group.events.front().uid;
        for (std::size_t i = 0; i < group.events.size(); ++i) {
            const auto& ev = group.events[i];
            ++local.events_seen;
            if (i == 0 && group.rooted) continue; // original post, no influencer
            const std::string* influencer = nullptr;
            if (source == EdgeSource::parent && ev.has_parent)
                influencer = &ev.parent_uid;
            else if (group.rooted)
                influencer = &root_uid;
            if (influencer == nullptr) {
                ++local.unresolved_reposts;
                continue;
            }
            if (*influencer == ev.uid) {
                ++local.self_loops_dropped;
                continue;
            }
            NodeId from = intern(*influencer);
            NodeId to = intern(ev.uid);
            edges.emplace_back(from, to);
            ++local.edges_resolved;
        }
    }
    if (stats) *stats = local;
    return InfluenceGraph(std::move(uids), std::move(edges));
}

GraphStatsReport graph_stats(const InfluenceGraph& g) {
    GraphStatsReport rep;
    rep.nodes = g.node_count();
    rep.edges = g.edge_count();
    const std::size_t n = g.node_count();
    if (n == 0) return rep;

    // Undirected projection adjacency (deduplicated union of out and in).
    std::vector<std::vector<NodeId>> und(n);
    for (NodeId v = 0; v < n; ++v) {
        auto out = g.out_neighbors(v);
        auto in = g.in_neighbors(v);
        auto& u = und[v];
        u.resize(out.size() + in.size());
        std::merge(out.begin(), out.end(), in.begin(), in.end(), u.begin());
        u.erase(std::unique(u.begin(), u.end()), u.end());
    }

    // Weakly connected components via union-find.
    std::vector<NodeId> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::vector<std::uint8_t> rank(n, 0);
    auto find = [&](NodeId x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    auto unite = [&](NodeId a, NodeId b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (rank[a] < rank[b]) std::swap(a, b);
        parent[b] = a;
        if (rank[a] == rank[b]) ++rank[a];
    };
    for (NodeId v = 0; v < n; ++v)
        for (NodeId u : und[v])
            if (u > v) unite(u, v);
    for (NodeId v = 0; v < n; ++v)
        if (find(v) == v) ++rep.wcc_count;

    // Triangle counts per node on the undirected projection.
    std::vector<std::atomic<std::uint64_t>> tri(n);
    for (auto& t : tri) t.store(0, std::memory_order_relaxed);
#pragma omp parallel for schedule(dynamic, 64)
    for (std::int64_t vi = 0; vi < static_cast<std::int64_t>(n); ++vi) {
        NodeId v = static_cast<NodeId>(vi);
        const auto& nv = und[v];
        for (NodeId u : nv) {
            if (u <= v) continue;
            const auto& nu = und[u];
            // common neighbors w > u close triangles counted once
            auto it1 = std::lower_bound(nv.begin(), nv.end(), u + 1);
            auto it2 = nu.begin();
            std::uint64_t common = 0;
            while (it1 != nv.end() && it2 != nu.end()) {
                if (*it1 < *it2) ++it1;
                else if (*it2 < *it1) ++it2;
                else {
                    if (*it1 > u) {
                        NodeId w = *it1;
                        tri[w].fetch_add(1, std::memory_order_relaxed);
                        ++common;
                    }
                    ++it1;
                    ++it2;
                }
            }
            tri[v].fetch_add(common, std::memory_order_relaxed);
            tri[u].fetch_add(common, std::memory_order_relaxed);
        }
    }

    double sum_c = 0.0;
    for (NodeId v = 0; v < n; ++v) {
        std::size_t d = und[v].size();
        if (d >= 2) {
            ++rep.clustering_eligible_nodes;
            sum_c += 2.0 * static_cast<double>(tri[v].load()) /
                     (static_cast<double>(d) * static_cast<double>(d - 1));
        }
    }
    rep.avg_clustering =
        rep.clustering_eligible_nodes ? sum_c / static_cast<double>(rep.clustering_eligible_nodes) : 0.0;
    rep.avg_clustering_all_nodes = sum_c / static_cast<double>(n);

    for (NodeId v = 0; v < n; ++v) {
        std::size_t din = g.in_neighbors(v).size();
        std::size_t dout = g.out_neighbors(v).size();
        if (rep.in_degree_hist.size() <= din) rep.in_degree_hist.resize(din + 1, 0);
        if (rep.out_degree_hist.size() <= dout) rep.out_degree_hist.resize(dout + 1, 0);
        ++rep.in_degree_hist[din];
        ++rep.out_degree_hist[dout];
    }
    return rep;
}

namespace {

constexpr char kMagic[4] = {'C', 'F', 'G', '1'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
void read_pod(std::istream& in, T& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw corruption_error("graph file truncated");
}

template <typename T>
void write_vec(std::ostream& out, const std::vector<T>& v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <typename T>
void read_vec(std::istream& in, std::vector<T>& v, std::size_t count) {
    v.resize(count);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(count * sizeof(T)));
    if (!in) throw corruption_error("graph file truncated");
}

} // namespace

void save_graph(const InfluenceGraph& g, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open " + path + " for writing");
    out.write(kMagic, 4);
    write_pod(out, kVersion);
    write_pod(out, static_cast<std::uint64_t>(g.node_count()));
    write_pod(out, static_cast<std::uint64_t>(g.edge_count()));
    for (const auto& uid : g.uids()) {
        write_pod(out, static_cast<std::uint32_t>(uid.size()));
        out.write(uid.data(), static_cast<std::streamsize>(uid.size()));
    }
    std::vector<std::uint64_t> off(g.out_offsets().begin(), g.out_offsets().end());
    write_vec(out, off);
    std::vector<NodeId> tg(g.out_targets().begin(), g.out_targets().end());
    write_vec(out, tg);
    off.assign(g.in_offsets().begin(), g.in_offsets().end());
    write_vec(out, off);
    tg.assign(g.in_targets().begin(), g.in_targets().end());
    write_vec(out, tg);
    if (!out) throw io_error("failed writing " + path);
}

InfluenceGraph load_graph(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in) throw corruption_error("graph file truncated (no magic)");
    if (std::memcmp(magic, kMagic, 4) != 0) throw format_error("bad magic, not a graph file");
    std::uint32_t version;
    read_pod(in, version);
    if (version != kVersion)
        throw format_error("unsupported graph file version " + std::to_string(version));
    std::uint64_t n, e;
    read_pod(in, n);
    read_pod(in, e);

    InfluenceGraph g;
    g.uids_.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        std::uint32_t len;
        read_pod(in, len);
        std::string uid(len, '\0');
        in.read(uid.data(), len);
        if (!in) throw corruption_error("graph file truncated in uid table");
        g.uids_.push_back(std::move(uid));
    }
    read_vec(in, g.out_offsets_, n + 1);
    read_vec(in, g.out_targets_, e);
    read_vec(in, g.in_offsets_, n + 1);
    read_vec(in, g.in_targets_, e);
    in.peek();
    if (!in.eof()) throw corruption_error("trailing bytes after graph payload");

    auto check_csr = [&](const std::vector<std::uint64_t>& off, const std::vector<NodeId>& tgt) {
        if (off.front() != 0 || off.back() != e) throw corruption_error("inconsistent offsets");
        for (std::size_t i = 0; i + 1 < off.size(); ++i)
            if (off[i] > off[i + 1]) throw corruption_error("offsets not monotone");
        for (NodeId t : tgt)
            if (t >= n) throw corruption_error("target node out of range");
    };
    check_csr(g.out_offsets_, g.out_targets_);
    check_csr(g.in_offsets_, g.in_targets_);
    g.rebuild_uid_index();
    return g;
}

} // namespace casc
