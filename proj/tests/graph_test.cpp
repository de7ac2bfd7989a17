#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

#include "doctest.h"

#include "casc/errors.hpp"
#include "casc/graph.hpp"
#include "casc/rng.hpp"
#include "ref/reference.hpp"

using namespace casc;

namespace {

std::vector<RepostEvent> random_events(std::uint64_t seed, std::size_t n_cascades,
                                       std::size_t n_users, std::size_t max_len) {
    Rng rng(seed);
    std::vector<RepostEvent> evs;
    for (std::size_t c = 0; c < n_cascades; ++c) {
        std::string mid = "m" + std::to_string(c);
        bool rooted = rng.uniform01() < 0.9;
        std::size_t len = 1 + rng.below(max_len);
        std::vector<std::string> members;
        std::int64_t ts = static_cast<std::int64_t>(rng.below(1000));
        for (std::size_t i = 0; i < len; ++i) {
            RepostEvent ev;
            ev.mid = mid;
            ev.uid = "u" + std::to_string(rng.below(n_users));
            ev.ts = ts;
            ts += static_cast<std::int64_t>(rng.below(3)); // frequent ties
            if (!(i == 0 && rooted)) {
                ev.has_parent = rng.uniform01() < 0.8;
                if (ev.has_parent) {
                    if (!members.empty() && rng.uniform01() < 0.7)
                        ev.parent_uid = members[rng.below(members.size())];
                    else
                        ev.parent_uid = "u" + std::to_string(rng.below(n_users));
                }
            }
            members.push_back(ev.uid);
            evs.push_back(std::move(ev));
        }
    }
    rng.shuffle(evs);
    return evs;
}

std::set<std::pair<std::string, std::string>> edge_uid_pairs(const InfluenceGraph& g) {
    std::set<std::pair<std::string, std::string>> out;
    for (NodeId v = 0; v < g.node_count(); ++v)
        for (NodeId u : g.out_neighbors(v)) out.emplace(g.uid_of(v), g.uid_of(u));
    return out;
}

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

} // namespace

TEST_SUITE("graph") {

TEST_CASE("construction drops self loops and duplicate edges") {
    InfluenceGraph g({"a", "b", "c"}, {{0, 1}, {0, 1}, {1, 1}, {2, 0}});
    CHECK(g.node_count() == 3);
    CHECK(g.edge_count() == 2);
    REQUIRE(g.out_neighbors(0).size() == 1);
    CHECK(g.out_neighbors(0)[0] == 1);
    REQUIRE(g.in_neighbors(0).size() == 1);
    CHECK(g.in_neighbors(0)[0] == 2);
    CHECK(g.has_edge(0, 1));
    CHECK_FALSE(g.has_edge(1, 0));
    CHECK(g.node_of("c") == NodeId{2});
    CHECK_FALSE(g.node_of("zz").has_value());
    CHECK(g.uid_of(1) == "b");
    CHECK_THROWS_AS(g.out_neighbors(3), bounds_error);
    CHECK_THROWS_AS(InfluenceGraph({"a"}, {{0, 1}}), bounds_error);
}

TEST_CASE("copies keep a working uid index") {
    auto owner = std::make_unique<InfluenceGraph>(
        InfluenceGraph({"alpha", "beta"}, {{0, 1}}));
    InfluenceGraph copy = *owner;
    owner.reset();
    CHECK(copy.node_of("beta") == NodeId{1});
    CHECK(copy.uid_of(0) == "alpha");
}

TEST_CASE("parent attribution follows the repost chain") {
    std::vector<RepostEvent> evs;
    evs.push_back({"m1", "u1", 0, "", false});
    evs.push_back({"m1", "u2", 5, "u1", true});
    evs.push_back({"m1", "u3", 9, "u2", true});
    auto groups = group_cascades(evs).groups;

    BuildGraphStats stats;
    auto g = build_graph(groups, EdgeSource::parent, &stats);
    CHECK(edge_uid_pairs(g) ==
          std::set<std::pair<std::string, std::string>>{{"u1", "u2"}, {"u2", "u3"}});
    CHECK(stats.events_seen == 3);
    CHECK(stats.edges_resolved == 2);
    CHECK(stats.unresolved_reposts == 0);

    // ids assigned first-seen: influencer before reposter
    CHECK(g.node_of("u1") == NodeId{0});
    CHECK(g.node_of("u2") == NodeId{1});
    CHECK(g.node_of("u3") == NodeId{2});
}

TEST_CASE("root attribution points every repost at the author") {
    std::vector<RepostEvent> evs;
    evs.push_back({"m1", "u1", 0, "", false});
    evs.push_back({"m1", "u2", 5, "u1", true});
    evs.push_back({"m1", "u3", 9, "u2", true});
    auto groups = group_cascades(evs).groups;
    auto g = build_graph(groups, EdgeSource::root);
    CHECK(edge_uid_pairs(g) ==
          std::set<std::pair<std::string, std::string>>{{"u1", "u2"}, {"u1", "u3"}});
}

TEST_CASE("repeat pairs across cascades give one edge") {
    std::vector<RepostEvent> evs;
    evs.push_back({"m1", "u1", 0, "", false});
    evs.push_back({"m1", "u2", 5, "u1", true});
    evs.push_back({"m2", "u1", 20, "", false});
    evs.push_back({"m2", "u2", 25, "u1", true});
    auto groups = group_cascades(evs).groups;
    auto g = build_graph(groups, EdgeSource::parent);
    CHECK(g.edge_count() == 1);
    CHECK(edge_uid_pairs(g) == std::set<std::pair<std::string, std::string>>{{"u1", "u2"}});
}

TEST_CASE("parentless reposts fall back to the root author") {
    std::vector<RepostEvent> evs;
    evs.push_back({"m1", "u1", 0, "", false});
    evs.push_back({"m1", "u2", 5, "", false}); // extra parentless event
    auto groups = group_cascades(evs).groups;
    BuildGraphStats stats;
    auto g = build_graph(groups, EdgeSource::parent, &stats);
    CHECK(edge_uid_pairs(g) == std::set<std::pair<std::string, std::string>>{{"u1", "u2"}});
    CHECK(stats.unresolved_reposts == 0);
}

TEST_CASE("rootless cascades resolve only via parents") {
    std::vector<RepostEvent> evs;
    evs.push_back({"m2", "u5", 50, "u9", true});
    evs.push_back({"m2", "u7", 60, "u5", true});
    GroupOptions opts;
    opts.allow_rootless = true;
    auto groups = group_cascades(evs, opts).groups;

    auto gp = build_graph(groups, EdgeSource::parent);
    CHECK(edge_uid_pairs(gp) ==
          std::set<std::pair<std::string, std::string>>{{"u9", "u5"}, {"u5", "u7"}});

    BuildGraphStats stats;
    auto gr = build_graph(groups, EdgeSource::root, &stats);
    CHECK(gr.edge_count() == 0);
    CHECK(stats.unresolved_reposts == 2);
}

TEST_CASE("random streams match the edge set oracle") {
    for (std::uint64_t seed : {7ULL, 8ULL, 9ULL}) {
        auto evs = random_events(seed, 60, 40, 30);
        GroupOptions opts;
        opts.allow_rootless = true;
        auto groups = group_cascades(evs, opts).groups;
        for (auto source : {EdgeSource::parent, EdgeSource::root}) {
            auto g = build_graph(groups, source);
            CHECK(edge_uid_pairs(g) == ref::edge_set(groups, source));

            // out and in CSR must describe the same edge set
            std::uint64_t in_total = 0;
            for (NodeId v = 0; v < g.node_count(); ++v) {
                in_total += g.in_neighbors(v).size();
                for (NodeId u : g.in_neighbors(v)) CHECK(g.has_edge(u, v));
            }
            CHECK(in_total == g.edge_count());
        }
    }
}

TEST_CASE("stats on hand-checked fixtures") {
    SUBCASE("directed triangle") {
        InfluenceGraph g({"a", "b", "c"}, {{0, 1}, {1, 2}, {2, 0}});
        auto rep = graph_stats(g);
        CHECK(rep.nodes == 3);
        CHECK(rep.edges == 3);
        CHECK(rep.wcc_count == 1);
        CHECK(rep.avg_clustering == doctest::Approx(1.0));
        CHECK(rep.avg_clustering_all_nodes == doctest::Approx(1.0));
        CHECK(rep.clustering_eligible_nodes == 3);
        REQUIRE(rep.in_degree_hist.size() == 2);
        CHECK(rep.in_degree_hist[1] == 3);
        CHECK(rep.out_degree_hist[1] == 3);
    }
    SUBCASE("path has no triangles") {
        InfluenceGraph g({"a", "b", "c"}, {{0, 1}, {1, 2}});
        auto rep = graph_stats(g);
        CHECK(rep.clustering_eligible_nodes == 1); // just the middle node
        CHECK(rep.avg_clustering == doctest::Approx(0.0));
    }
    SUBCASE("four-clique missing one edge") {
        InfluenceGraph g({"a", "b", "c", "d"}, {{0, 1}, {0, 2}, {1, 2}, {1, 3}, {2, 3}});
        auto rep = graph_stats(g);
        CHECK(rep.avg_clustering == doctest::Approx((1.0 + 2.0 / 3 + 2.0 / 3 + 1.0) / 4));
        CHECK(rep.wcc_count == 1);
    }
    SUBCASE("components and isolated nodes") {
        InfluenceGraph g({"a", "b", "c", "d", "e"}, {{0, 1}, {2, 3}});
        auto rep = graph_stats(g);
        CHECK(rep.wcc_count == 3);
        CHECK(rep.clustering_eligible_nodes == 0);
        CHECK(rep.avg_clustering == doctest::Approx(0.0));
    }
}

TEST_CASE("stats match the serial oracles on random graphs") {
    Rng rng(42);
    for (int trial = 0; trial < 4; ++trial) {
        std::size_t n = 30 + rng.below(40);
        std::vector<std::string> uids;
        for (std::size_t i = 0; i < n; ++i) uids.push_back("n" + std::to_string(i));
        std::vector<std::pair<NodeId, NodeId>> edges;
        std::size_t m = rng.below(4 * n);
        for (std::size_t i = 0; i < m; ++i)
            edges.emplace_back(static_cast<NodeId>(rng.below(n)), static_cast<NodeId>(rng.below(n)));
        InfluenceGraph g(uids, edges);

        auto rep = graph_stats(g);
        CHECK(rep.wcc_count == ref::wcc_count(g));
        auto [eligible_avg, all_avg] = ref::avg_clustering(g);
        CHECK(rep.avg_clustering == doctest::Approx(eligible_avg));
        CHECK(rep.avg_clustering_all_nodes == doctest::Approx(all_avg));

        std::uint64_t in_sum = 0, out_sum = 0;
        for (std::size_t d = 0; d < rep.in_degree_hist.size(); ++d)
            in_sum += d * rep.in_degree_hist[d];
        for (std::size_t d = 0; d < rep.out_degree_hist.size(); ++d)
            out_sum += d * rep.out_degree_hist[d];
        CHECK(in_sum == g.edge_count());
        CHECK(out_sum == g.edge_count());
    }
}

TEST_CASE("save and load round trip") {
    auto evs = random_events(11, 30, 25, 20);
    auto groups = group_cascades(evs).groups;
    auto g = build_graph(groups, EdgeSource::parent);
    auto path = temp_path("casc_graph_roundtrip.bin");
    save_graph(g, path);
    auto g2 = load_graph(path);
    CHECK(g2 == g);
    CHECK(g2.node_of(g.uid_of(0)) == NodeId{0});
    std::remove(path.c_str());
}

TEST_CASE("load rejects damaged files") {
    InfluenceGraph g({"a", "b"}, {{0, 1}});
    auto path = temp_path("casc_graph_damage.bin");
    save_graph(g, path);

    std::string bytes;
    {
        std::ifstream in(path, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        bytes = buf.str();
    }
    auto write_bytes = [&](const std::string& contents) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    };

    SUBCASE("bad magic") {
        auto bad = bytes;
        bad[0] = 'X';
        write_bytes(bad);
        CHECK_THROWS_AS(load_graph(path), format_error);
    }
    SUBCASE("unsupported version") {
        auto bad = bytes;
        bad[4] = 9;
        write_bytes(bad);
        CHECK_THROWS_AS(load_graph(path), format_error);
    }
    SUBCASE("truncation") {
        for (std::size_t cut : {bytes.size() - 1, bytes.size() / 2, std::size_t{5}, std::size_t{2}}) {
            write_bytes(bytes.substr(0, cut));
            CHECK_THROWS_AS(load_graph(path), corruption_error);
        }
    }
    SUBCASE("trailing garbage") {
        write_bytes(bytes + "x");
        CHECK_THROWS_AS(load_graph(path), corruption_error);
    }
    SUBCASE("missing file") { CHECK_THROWS_AS(load_graph("/nonexistent/g.bin"), io_error); }

    std::remove(path.c_str());
}

} // TEST_SUITE
