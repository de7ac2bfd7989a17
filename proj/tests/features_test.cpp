#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"

#include "casc/errors.hpp"
#include "casc/features.hpp"
#include "casc/rng.hpp"
#include "ref/reference.hpp"

using namespace casc;

namespace {

CommunityPartition make_partition(std::vector<std::uint32_t> assignment) {
    CommunityPartition p;
    p.k = assignment.empty() ? 0 : *std::max_element(assignment.begin(), assignment.end()) + 1;
    p.assignment = std::move(assignment);
    return p;
}

InfluenceGraph fan_graph() {
    return InfluenceGraph({"a", "b", "c", "d"}, {{0, 1}, {0, 2}, {1, 3}});
}

Cascade ab_cascade() {
    Cascade c;
    c.mid = "m";
    c.adopters = {{0, 0}, {1, 600}};
    return c;
}

void check_measures_close(const MeasureSet& got, const MeasureSet& want) {
    CHECK(got.k_adopters == want.k_adopters);
    CHECK(got.k_frontiers == want.k_frontiers);
    CHECK(got.k_nonadopters == want.k_nonadopters);
    CHECK(got.gini_adopters == doctest::Approx(want.gini_adopters).epsilon(1e-12));
    CHECK(got.gini_frontiers == doctest::Approx(want.gini_frontiers).epsilon(1e-12));
    CHECK(got.gini_nonadopters == doctest::Approx(want.gini_nonadopters).epsilon(1e-12));
    CHECK(got.overlap_af == want.overlap_af);
    CHECK(got.overlap_an == want.overlap_an);
    CHECK(got.overlap_fn == want.overlap_fn);
    CHECK(got.size_frontiers == want.size_frontiers);
    CHECK(got.size_nonadopters == want.size_nonadopters);
    CHECK(got.avg_time_to_adoption == doctest::Approx(want.avg_time_to_adoption).epsilon(1e-12));
    CHECK(got.gini_adopters_degenerate == want.gini_adopters_degenerate);
    CHECK(got.gini_frontiers_degenerate == want.gini_frontiers_degenerate);
    CHECK(got.gini_nonadopters_degenerate == want.gini_nonadopters_degenerate);
    CHECK(got.avg_time_degenerate == want.avg_time_degenerate);
}

// Rooted group with n synthetic adopters 60s apart, all present in uids.
CascadeGroup chain_group(const std::string& mid, const std::vector<std::string>& uids,
                         std::size_t n) {
    CascadeGroup group;
    group.mid = mid;
    group.rooted = true;
    for (std::size_t i = 0; i < n; ++i) {
        RepostEvent ev;
        ev.mid = mid;
        ev.uid = uids[i]; // uids must be at least n long
        ev.ts = 1000 + static_cast<std::int64_t>(i) * 60;
        if (i > 0) {
            ev.parent_uid = uids[0];
            ev.has_parent = true;
        }
        group.events.push_back(std::move(ev));
    }
    return group;
}

} // namespace

TEST_SUITE("features") {

TEST_CASE("community count over node sets") {
    auto p = make_partition({0, 0, 1, 1});
    std::vector<NodeId> both_comm0 = {0, 1};
    std::vector<NodeId> across = {0, 2};
    std::vector<NodeId> with_unknown = {0, kNoNode, 3};
    std::vector<NodeId> only_unknown = {kNoNode};
    std::vector<NodeId> empty;
    CHECK(count_communities(both_comm0, p) == 1);
    CHECK(count_communities(across, p) == 2);
    CHECK(count_communities(with_unknown, p) == 2);
    CHECK(count_communities(only_unknown, p) == 0);
    CHECK(count_communities(empty, p) == 0);

    std::vector<NodeId> out_of_range = {7};
    CHECK_THROWS_AS(count_communities(out_of_range, p), bounds_error);
}

TEST_CASE("gini impurity worked examples") {
    auto p = make_partition({0, 0, 1, 1, 0});

    std::vector<NodeId> even = {0, 1, 2, 3}; // counts 2,2
    CHECK(gini_impurity(even, p) == doctest::Approx(0.5));

    std::vector<NodeId> skewed = {0, 1, 4, 2}; // counts 3,1
    CHECK(gini_impurity(skewed, p) == doctest::Approx(0.375));

    std::vector<NodeId> uniform = {0, 1, 4};
    CHECK(gini_impurity(uniform, p) == 0.0);

    bool degenerate = false;
    std::vector<NodeId> empty;
    CHECK(gini_impurity(empty, p, &degenerate) == 0.0);
    CHECK(degenerate);

    std::vector<NodeId> unknown_only = {kNoNode, kNoNode};
    CHECK(gini_impurity(unknown_only, p, &degenerate) == 0.0);
    CHECK(degenerate);

    std::vector<NodeId> single = {3};
    CHECK(gini_impurity(single, p, &degenerate) == 0.0);
    CHECK_FALSE(degenerate);
}

TEST_CASE("gini never exceeds the equal-share bound") {
    Rng rng(41);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + rng.below(60);
        const std::uint32_t k = 1 + static_cast<std::uint32_t>(rng.below(6));
        std::vector<std::uint32_t> assignment(n);
        for (auto& a : assignment) a = static_cast<std::uint32_t>(rng.below(k));
        auto p = make_partition(std::move(assignment));
        std::vector<NodeId> all(n);
        for (std::size_t i = 0; i < n; ++i) all[i] = static_cast<NodeId>(i);
        const double g = gini_impurity(all, p);
        const double k_used = count_communities(all, p);
        CHECK(g >= 0.0);
        CHECK(g <= 1.0 - 1.0 / k_used + 1e-12);
    }
}

TEST_CASE("community overlap counts shared communities once") {
    auto p = make_partition({0, 1, 1, 2});
    std::vector<NodeId> ab = {0, 1}; // communities {0,1}
    std::vector<NodeId> cd = {2, 3}; // communities {1,2}
    std::vector<NodeId> empty;
    CHECK(overlap(ab, cd, p) == 1);
    CHECK(overlap(ab, ab, p) == 2);
    CHECK(overlap(ab, empty, p) == 0);

    std::vector<NodeId> bc = {1, 2}; // both community 1: shared set counted once
    CHECK(overlap(ab, bc, p) == 1);
}

TEST_CASE("average time to adoption") {
    Cascade c;
    c.mid = "m";
    c.adopters = {{0, 0}, {1, 60}, {2, 120}};
    CHECK(avg_time_to_adoption(c, 3) == doctest::Approx(90.0));
    CHECK(avg_time_to_adoption(c, 2) == doctest::Approx(60.0));
    CHECK_THROWS_AS(avg_time_to_adoption(c, 1), param_error);
    CHECK_THROWS_AS(avg_time_to_adoption(c, 4), param_error);
}

TEST_CASE("snapshot measures on the worked example") {
    auto g = fan_graph();
    auto c = ab_cascade();
    auto p = make_partition({0, 0, 1, 1});

    SUBCASE("wide lambda: V={a,b} F={c,d}") {
        auto ms = measure_snapshot(snapshot(c, g, 2, {1800, LambdaMode::recency}), c, p);
        CHECK(ms.k_adopters == 1);
        CHECK(ms.k_frontiers == 1);
        CHECK(ms.k_nonadopters == 0);
        CHECK(ms.gini_adopters == 0.0);
        CHECK(ms.gini_frontiers == 0.0);
        CHECK(ms.gini_nonadopters == 0.0);
        CHECK(ms.gini_nonadopters_degenerate);
        CHECK(ms.overlap_af == 0);
        CHECK(ms.overlap_an == 0);
        CHECK(ms.overlap_fn == 0);
        CHECK(ms.size_frontiers == 2);
        CHECK(ms.size_nonadopters == 0);
        CHECK(ms.avg_time_to_adoption == doctest::Approx(600.0));
        CHECK_FALSE(ms.avg_time_degenerate);
    }
    SUBCASE("tight lambda: F={d} N={c}, same community on both sides") {
        auto ms = measure_snapshot(snapshot(c, g, 2, {300, LambdaMode::recency}), c, p);
        CHECK(ms.k_frontiers == 1);
        CHECK(ms.k_nonadopters == 1);
        CHECK(ms.overlap_fn == 1);
        CHECK(ms.size_frontiers == 1);
        CHECK(ms.size_nonadopters == 1);
    }
    SUBCASE("single-adopter snapshot has no adoption time") {
        auto ms = measure_snapshot(snapshot(c, g, 1, {1800, LambdaMode::recency}), c, p);
        CHECK(ms.avg_time_degenerate);
        CHECK(ms.avg_time_to_adoption == 0.0);
        CHECK(ms.k_adopters == 1);
    }
    SUBCASE("snapshot from a different cascade is rejected") {
        auto snap = snapshot(c, g, 2, {});
        Cascade shorter;
        shorter.mid = "m";
        shorter.adopters = {{0, 0}};
        CHECK_THROWS_AS(measure_snapshot(snap, shorter, p), param_error);
    }
}

TEST_CASE("random snapshot measures equal the set-arithmetic oracle") {
    Rng rng(509);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 10 + rng.below(120);
        std::vector<std::string> uids;
        for (std::size_t i = 0; i < n; ++i) uids.push_back("n" + std::to_string(i));
        std::vector<std::pair<NodeId, NodeId>> edges;
        const std::size_t m_edges = rng.below(5 * n);
        for (std::size_t i = 0; i < m_edges; ++i)
            edges.emplace_back(static_cast<NodeId>(rng.below(n)), static_cast<NodeId>(rng.below(n)));
        InfluenceGraph g(uids, edges);

        std::vector<std::uint32_t> assignment(n);
        const std::uint32_t k = 1 + static_cast<std::uint32_t>(rng.below(8));
        for (auto& a : assignment) a = static_cast<std::uint32_t>(rng.below(k));
        auto p = make_partition(std::move(assignment));

        Cascade c;
        c.mid = "t" + std::to_string(trial);
        std::vector<NodeId> pool(n);
        for (std::size_t i = 0; i < n; ++i) pool[i] = static_cast<NodeId>(i);
        rng.shuffle(pool);
        const std::size_t len = 1 + rng.below(30);
        std::int64_t offset = 0;
        for (std::size_t i = 0; i < len && i < pool.size(); ++i) {
            NodeId node = rng.uniform01() < 0.1 ? kNoNode : pool[i];
            c.adopters.push_back({node, offset});
            offset += static_cast<std::int64_t>(rng.below(700));
        }

        SnapshotScratch scratch;
        const std::size_t m = 1 + rng.below(c.final_size());
        SnapshotOptions opts{static_cast<std::int64_t>(rng.below(1500)),
                             rng.uniform01() < 0.5 ? LambdaMode::recency : LambdaMode::absolute};
        auto snap = snapshot(c, g, m, opts, &scratch);
        check_measures_close(measure_snapshot(snap, c, p), ref::measure_direct(snap, c, p));
    }
}

TEST_CASE("feature matrix layout and eligibility") {
    // 60-node graph: node 0 points at everyone, so frontiers are non-trivial.
    std::vector<std::string> uids;
    for (int i = 0; i < 60; ++i) uids.push_back("u" + std::to_string(i));
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (NodeId v = 1; v < 60; ++v) edges.emplace_back(0, v);
    InfluenceGraph g(uids, edges);
    std::vector<std::uint32_t> assignment(60);
    for (std::size_t i = 0; i < 60; ++i) assignment[i] = static_cast<std::uint32_t>(i % 4);
    auto p = make_partition(std::move(assignment));

    std::vector<CascadeGroup> groups;
    groups.push_back(chain_group("big", uids, 55));
    groups.push_back(chain_group("small", uids, 40));
    groups.push_back(chain_group("huge", uids, 60));

    SUBCASE("default group A layout") {
        auto fm = extract_features(groups, g, p, {});
        REQUIRE(fm.names.size() == 22);
        CHECK(fm.names[0] == "k_lfrontier_m30");
        CHECK(fm.names[10] == "avgtime_m30");
        CHECK(fm.names[11] == "k_lfrontier_m50");
        CHECK(fm.names[21] == "avgtime_m50");
        REQUIRE(fm.rows() == 2);
        CHECK(fm.mids == std::vector<std::string>{"big", "huge"});
        CHECK(fm.final_sizes == std::vector<std::uint64_t>{55, 60});
        CHECK(fm.excluded_cascades == 1);
        CHECK(fm.values.size() == 44);
    }
    SUBCASE("default group C layout") {
        ExtractOptions opts;
        opts.group = FeatureGroup::C;
        auto fm = extract_features(groups, g, p, opts);
        CHECK(fm.names == std::vector<std::string>{"avgtime_m50"});
        REQUIRE(fm.rows() == 2);
        // row value is the plain average of the non-root offsets
        auto cascade = build_cascade(groups[0], g);
        CHECK(fm.at(0, 0) == doctest::Approx(avg_time_to_adoption(cascade, 50)));
    }
    SUBCASE("rows match per-snapshot measures") {
        ExtractOptions opts;
        opts.sizes = {10, 35};
        auto fm = extract_features(groups, g, p, opts);
        REQUIRE(fm.rows() == 3);
        for (std::size_t r = 0; r < fm.rows(); ++r) {
            const auto& group = *std::find_if(groups.begin(), groups.end(),
                                              [&](const auto& x) { return x.mid == fm.mids[r]; });
            auto cascade = build_cascade(group, g);
            std::size_t col = 0;
            for (std::size_t m : {10, 35}) {
                auto ms = measure_snapshot(snapshot(cascade, g, m, opts.snapshot), cascade, p);
                CHECK(fm.at(r, col + 0) == ms.k_frontiers);
                CHECK(fm.at(r, col + 1) == ms.k_nonadopters);
                CHECK(fm.at(r, col + 2) == ms.gini_adopters);
                CHECK(fm.at(r, col + 3) == ms.gini_frontiers);
                CHECK(fm.at(r, col + 4) == ms.gini_nonadopters);
                CHECK(fm.at(r, col + 5) == ms.overlap_af);
                CHECK(fm.at(r, col + 6) == ms.overlap_an);
                CHECK(fm.at(r, col + 7) == ms.overlap_fn);
                CHECK(fm.at(r, col + 8) == static_cast<double>(ms.size_frontiers));
                CHECK(fm.at(r, col + 9) == static_cast<double>(ms.size_nonadopters));
                CHECK(fm.at(r, col + 10) == ms.avg_time_to_adoption);
                col += 11;
            }
        }
    }
    SUBCASE("repeat runs are identical") {
        auto a = extract_features(groups, g, p, {});
        auto b = extract_features(groups, g, p, {});
        CHECK(a.values == b.values);
        CHECK(a.mids == b.mids);
    }
    SUBCASE("size below one is rejected") {
        ExtractOptions opts;
        opts.sizes = {0, 5};
        CHECK_THROWS_AS(extract_features(groups, g, p, opts), param_error);
    }
}

TEST_CASE("quantiles interpolate linearly") {
    std::vector<double> v = {1, 2, 3, 4};
    CHECK(quantile_sorted(v, 0.0) == 1.0);
    CHECK(quantile_sorted(v, 1.0) == 4.0);
    CHECK(quantile_sorted(v, 0.5) == doctest::Approx(2.5));
    CHECK(quantile_sorted(v, 0.25) == doctest::Approx(1.75));
    CHECK(quantile_sorted(v, 0.75) == doctest::Approx(3.25));

    std::vector<double> one = {42};
    CHECK(quantile_sorted(one, 0.5) == 42.0);

    std::vector<double> none;
    CHECK_THROWS_AS(quantile_sorted(none, 0.5), param_error);
    CHECK_THROWS_AS(quantile_sorted(v, 1.5), param_error);
}

TEST_CASE("measurement report shape and units") {
    std::vector<std::string> uids;
    for (int i = 0; i < 60; ++i) uids.push_back("u" + std::to_string(i));
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (NodeId v = 1; v < 60; ++v) edges.emplace_back(0, v);
    InfluenceGraph g(uids, edges);
    auto p = make_partition(std::vector<std::uint32_t>(60, 0));

    std::vector<CascadeGroup> groups;
    groups.push_back(chain_group("c10", uids, 10));
    groups.push_back(chain_group("c20", uids, 20));
    groups.push_back(chain_group("c50", uids, 50));

    std::vector<std::size_t> sizes = {5, 30};
    auto rows = measurement_report(groups, g, p, sizes, {}, 50);

    // every measure appears; only the 50-cascade reaches m=30 and it is viral
    REQUIRE(!rows.empty());
    CHECK(rows.size() == 12 * 3); // 12 measures x (m5 nonviral, m5 viral, m30 viral)
    CHECK(rows[0].measure == "k_adopter");
    CHECK(rows[0].m == 5);
    CHECK(rows[0].klass == "nonviral");
    CHECK(rows[1].measure == "k_adopter");
    CHECK(rows[1].m == 5);
    CHECK(rows[1].klass == "viral");
    CHECK(rows[2].measure == "k_adopter");
    CHECK(rows[2].m == 30);
    CHECK(rows[2].klass == "viral");
    CHECK(rows[3].measure == "k_lfrontier");

    for (const auto& row : rows)
        if (row.m == 30) CHECK(row.klass == "viral");

    // adoption gaps are 60s: mean offset of adopters 2..5 is 150s = 2.5min
    const ReportRow* avg5 = nullptr;
    for (const auto& row : rows)
        if (row.measure == "avgtime_minutes" && row.m == 5 && row.klass == "nonviral") avg5 = &row;
    REQUIRE(avg5 != nullptr);
    CHECK(avg5->mean == doctest::Approx(2.5));
    CHECK(avg5->min == doctest::Approx(2.5));
    CHECK(avg5->max == doctest::Approx(2.5));
    CHECK(avg5->q1 == doctest::Approx(2.5));

    // the nonviral m=5 cell pools the 10- and 20-cascade values
    const ReportRow* nsz = nullptr;
    for (const auto& row : rows)
        if (row.measure == "n_lfrontier" && row.m == 5 && row.klass == "nonviral") nsz = &row;
    REQUIRE(nsz != nullptr);
    // star graph: root reaches all 59 others; 4 are already adopters
    CHECK(nsz->min == doctest::Approx(55.0));
    CHECK(nsz->max == doctest::Approx(55.0));
}

TEST_CASE("report quartiles summarize the pooled class values") {
    // four single-community cascades of distinct sizes give distinct n_lfrontier values
    std::vector<std::string> uids;
    for (int i = 0; i < 30; ++i) uids.push_back("u" + std::to_string(i));
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (NodeId v = 1; v < 30; ++v) edges.emplace_back(0, v);
    InfluenceGraph g(uids, edges);
    auto p = make_partition(std::vector<std::uint32_t>(30, 0));

    std::vector<CascadeGroup> groups;
    for (std::size_t n : {4, 6, 8, 10})
        groups.push_back(chain_group("c" + std::to_string(n), uids, n));

    std::vector<std::size_t> sizes = {2};
    auto rows = measurement_report(groups, g, p, sizes, {}, 1000);

    const ReportRow* at = nullptr;
    for (const auto& row : rows)
        if (row.measure == "avgtime_minutes") at = &row;
    REQUIRE(at != nullptr);
    CHECK(at->klass == "nonviral");
    // every cascade has a 60s first repost, so the pooled values are constant 1min
    CHECK(at->median == doctest::Approx(1.0));
    CHECK(at->q3 == doctest::Approx(1.0));
}

} // TEST_SUITE
