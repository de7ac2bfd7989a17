#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "doctest.h"

#include "casc/community.hpp"
#include "casc/errors.hpp"
#include "casc/graph.hpp"
#include "casc/rng.hpp"
#include "ref/reference.hpp"

using namespace casc;

namespace {

// c cliques of s nodes each, one edge per clique pair bridging node 0s.
InfluenceGraph clique_chain(std::size_t cliques, std::size_t s) {
    std::vector<std::string> uids;
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (std::size_t c = 0; c < cliques; ++c)
        for (std::size_t i = 0; i < s; ++i)
            uids.push_back("c" + std::to_string(c) + "_" + std::to_string(i));
    auto id = [&](std::size_t c, std::size_t i) { return static_cast<NodeId>(c * s + i); };
    for (std::size_t c = 0; c < cliques; ++c)
        for (std::size_t i = 0; i < s; ++i)
            for (std::size_t j = i + 1; j < s; ++j) edges.emplace_back(id(c, i), id(c, j));
    for (std::size_t c = 0; c + 1 < cliques; ++c) edges.emplace_back(id(c, 0), id(c + 1, 0));
    return InfluenceGraph(std::move(uids), std::move(edges));
}

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

} // namespace

TEST_SUITE("community") {

TEST_CASE("two 5-cliques are recovered exactly at the oracle maximum") {
    auto g = clique_chain(2, 5);
    double best = ref::max_modularity_exhaustive(g, 1.0);
    double best_twins = ref::max_modularity_twins(g, 1.0);
    CHECK(best == doctest::Approx(best_twins)); // two oracle paths agree

    for (std::uint64_t seed : {0ULL, 1ULL, 2ULL, 17ULL}) {
        LouvainOptions opts;
        opts.seed = seed;
        auto part = louvain(g, opts);
        CHECK(part.k == 2);
        for (NodeId v = 0; v < 10; ++v) CHECK(part.assignment[v] == (v < 5 ? 0u : 1u));
        CHECK(part.modularity == doctest::Approx(best));
        CHECK(part.modularity ==
              doctest::Approx(ref::modularity_direct(g, part.assignment, 1.0)));
    }
}

TEST_CASE("two 10-cliques are recovered at the twin-reduced maximum") {
    auto g = clique_chain(2, 10);
    double best = ref::max_modularity_twins(g, 1.0);
    // hand value: cliques partition, m = 91, Q = 2*(45/91 - (91/182)^2)
    CHECK(best == doctest::Approx(2.0 * (45.0 / 91.0 - 0.25)));

    auto part = louvain(g, {});
    CHECK(part.k == 2);
    for (NodeId v = 0; v < 20; ++v) CHECK(part.assignment[v] == (v < 10 ? 0u : 1u));
    CHECK(part.modularity == doctest::Approx(best));
}

TEST_CASE("pass log is non-decreasing and ends at the reported modularity") {
    auto g = clique_chain(4, 6);
    auto part = louvain(g, {});
    REQUIRE(!part.pass_q.empty());
    for (std::size_t i = 1; i < part.pass_q.size(); ++i)
        CHECK(part.pass_q[i] >= part.pass_q[i - 1] - 1e-12);
    CHECK(part.pass_q.back() == doctest::Approx(part.modularity));
    CHECK(part.modularity >= 0.0);
}

TEST_CASE("modularity of reference partitions") {
    auto g = clique_chain(2, 5);
    std::vector<std::uint32_t> all_one(10, 0);
    CHECK(modularity(g, all_one) == doctest::Approx(0.0));

    std::vector<std::uint32_t> singletons(10);
    std::iota(singletons.begin(), singletons.end(), 0u);
    CHECK(modularity(g, singletons) < 0.0);

    std::vector<std::uint32_t> wrong_size(9, 0);
    CHECK_THROWS_AS(modularity(g, wrong_size), param_error);
}

TEST_CASE("reciprocal edges weigh double in the projection") {
    // a<->b (weight 2), b->c (weight 1)
    InfluenceGraph g({"a", "b", "c"}, {{0, 1}, {1, 0}, {1, 2}});
    std::vector<std::uint32_t> ab_c = {0, 0, 1};
    CHECK(modularity(g, ab_c) == doctest::Approx(-1.0 / 18.0));
    CHECK(modularity(g, ab_c) == doctest::Approx(ref::modularity_direct(g, ab_c, 1.0)));

    auto part = louvain(g, {});
    CHECK(part.modularity == doctest::Approx(ref::max_modularity_exhaustive(g, 1.0)));
}

TEST_CASE("louvain never beats the exhaustive maximum on random graphs") {
    Rng rng(5);
    for (int trial = 0; trial < 6; ++trial) {
        std::size_t n = 5 + rng.below(5); // 5..9 nodes
        std::vector<std::string> uids;
        for (std::size_t i = 0; i < n; ++i) uids.push_back("n" + std::to_string(i));
        std::vector<std::pair<NodeId, NodeId>> edges;
        std::size_t m = 1 + rng.below(2 * n);
        for (std::size_t i = 0; i < m; ++i)
            edges.emplace_back(static_cast<NodeId>(rng.below(n)), static_cast<NodeId>(rng.below(n)));
        InfluenceGraph g(uids, edges);
        if (g.edge_count() == 0) continue;

        LouvainOptions opts;
        opts.seed = trial;
        auto part = louvain(g, opts);
        double best = ref::max_modularity_exhaustive(g, 1.0);
        CHECK(part.modularity <= best + 1e-12);
        CHECK(part.modularity ==
              doctest::Approx(ref::modularity_direct(g, part.assignment, 1.0)));

        // dense ids, all used, ordered by smallest member
        std::vector<bool> seen(part.k, false);
        std::uint32_t next_new = 0;
        for (NodeId v = 0; v < n; ++v) {
            REQUIRE(part.assignment[v] < part.k);
            if (!seen[part.assignment[v]]) {
                CHECK(part.assignment[v] == next_new);
                seen[part.assignment[v]] = true;
                ++next_new;
            }
        }
        for (bool s : seen) CHECK(s);
    }
}

TEST_CASE("identical inputs give identical partitions") {
    auto g = clique_chain(3, 4);
    LouvainOptions opts;
    opts.seed = 99;
    auto a = louvain(g, opts);
    auto b = louvain(g, opts);
    CHECK(a.assignment == b.assignment);
    CHECK(a.modularity == b.modularity);
    CHECK(a.pass_q == b.pass_q);
}

TEST_CASE("degenerate graphs") {
    CHECK_THROWS_AS(louvain(InfluenceGraph(), {}), data_error);

    InfluenceGraph edgeless({"a", "b", "c"}, {});
    CHECK_THROWS_AS(louvain(edgeless, {}), data_error);

    LouvainOptions opts;
    opts.allow_edgeless = true;
    auto part = louvain(edgeless, opts);
    CHECK(part.k == 3);
    CHECK(part.assignment == std::vector<std::uint32_t>{0, 1, 2});
    CHECK(part.modularity == 0.0);

    opts.resolution = -1.0;
    CHECK_THROWS_AS(louvain(edgeless, opts), param_error);
}

TEST_CASE("lookup helpers") {
    CommunityPartition p;
    p.assignment = {0, 0, 1, 2, 2};
    p.k = 3;
    CHECK(community_of(p, 3) == 2);
    CHECK_THROWS_AS(community_of(p, 5), bounds_error);

    std::vector<NodeId> span_nodes = {0, 1, 3};
    CHECK(communities_of(p, span_nodes) == std::vector<std::uint32_t>{0, 2});
    CHECK(communities_of(p, std::vector<NodeId>{}).empty());
    CHECK(communities_of(p, std::vector<NodeId>{2}) == std::vector<std::uint32_t>{1});
}

TEST_CASE("partition round trip and consistency errors") {
    auto g = clique_chain(2, 4);
    auto part = louvain(g, {});
    auto path = temp_path("casc_partition.tsv");
    save_partition(part, g, path);
    auto loaded = load_partition(path, g);
    CHECK(loaded.assignment == part.assignment);
    CHECK(loaded.k == part.k);
    CHECK(loaded.modularity == doctest::Approx(part.modularity));

    SUBCASE("missing node") {
        std::ofstream out(path);
        for (NodeId v = 0; v + 1 < g.node_count(); ++v)
            out << g.uid_of(v) << '\t' << part.assignment[v] << '\n';
        out.close();
        CHECK_THROWS_AS(load_partition(path, g), data_error);
    }
    SUBCASE("duplicate node") {
        std::ofstream out(path, std::ios::app);
        out << g.uid_of(0) << "\t0\n";
        out.close();
        CHECK_THROWS_AS(load_partition(path, g), data_error);
    }
    SUBCASE("unknown uid") {
        std::ofstream out(path, std::ios::app);
        out << "stranger\t0\n";
        out.close();
        CHECK_THROWS_AS(load_partition(path, g), data_error);
    }
    SUBCASE("bad community id") {
        std::ofstream out(path);
        out << g.uid_of(0) << "\tnotanumber\n";
        out.close();
        CHECK_THROWS_AS(load_partition(path, g), format_error);
    }
    std::remove(path.c_str());
}

TEST_CASE("sparse file labels are canonicalized on load") {
    auto g = clique_chain(2, 3);
    auto path = temp_path("casc_partition_sparse.tsv");
    std::ofstream out(path);
    // labels 7 and 3, first seen on node 0 and node 3
    for (NodeId v = 0; v < g.node_count(); ++v)
        out << g.uid_of(v) << '\t' << (v < 3 ? 7 : 3) << '\n';
    out.close();
    auto loaded = load_partition(path, g);
    CHECK(loaded.k == 2);
    CHECK(loaded.assignment == std::vector<std::uint32_t>{0, 0, 0, 1, 1, 1});
    std::remove(path.c_str());
}

TEST_CASE("rank and label agreement helpers behave on fixtures") {
    std::vector<std::uint32_t> a = {0, 0, 1, 1};
    std::vector<std::uint32_t> b = {1, 1, 0, 0};
    CHECK(ref::adjusted_rand_index(a, b) == doctest::Approx(1.0));
    std::vector<std::uint32_t> c = {0, 1, 0, 1};
    CHECK(ref::adjusted_rand_index(a, c) == doctest::Approx(-0.5));

    std::vector<double> x = {1, 2, 3, 4, 5};
    std::vector<double> y = {2, 4, 6, 8, 10};
    CHECK(ref::spearman_rho(x, y) == doctest::Approx(1.0));
    std::vector<double> yr = {10, 8, 6, 4, 2};
    CHECK(ref::spearman_rho(x, yr) == doctest::Approx(-1.0));
    std::vector<double> ties = {1, 1, 2, 2, 3};
    CHECK(ref::spearman_rho(ties, ties) == doctest::Approx(1.0));
}

} // TEST_SUITE
