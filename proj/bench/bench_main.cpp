// Micro-benchmarks: optimized kernels against the slow reference
// implementations, plus thread scaling for the parallel paths. Informal
// numbers for eyeballing regressions; nothing here asserts.

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "casc/cascade.hpp"
#include "casc/community.hpp"
#include "casc/events.hpp"
#include "casc/features.hpp"
#include "casc/graph.hpp"
#include "casc/learn.hpp"
#include "casc/rng.hpp"
#include "casc/synth.hpp"
#include "ref/reference.hpp"

using namespace casc;
using Clock = std::chrono::steady_clock;

namespace {

double secs_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void row(const char* name, double opt, double slow) {
    std::printf("%-34s %10.4fs %12.4fs %9.1fx\n", name, opt, slow, slow / opt);
}

void srow(const char* name, double t1, double tn, int n) {
    std::printf("%-34s %10.4fs %9.4fs (%d thr) %6.2fx\n", name, t1, tn, n, t1 / tn);
}

} // namespace

int main(int argc, char** argv) {
    std::uint64_t cascades = 2000;
    if (argc > 1) cascades = std::stoull(argv[1]);

    SynthConfig cfg;
    cfg.communities = 20;
    cfg.nodes_per_community = 500;
    cfg.cascades = cascades;
    cfg.seed = 3;
    auto sbm = gen_sbm(cfg);
    auto sim = simulate_cascades(sbm.graph, sbm.communities, cfg);
    auto groups = group_cascades(sim.events).groups;
    std::printf("corpus: %zu nodes, %zu edges, %zu cascades, %zu events\n\n",
                sbm.graph.node_count(), sbm.graph.edge_count(), groups.size(),
                sim.events.size());

    std::printf("%-34s %11s %13s %10s\n", "kernel vs reference", "optimized", "reference",
                "ratio");

    {
        auto t0 = Clock::now();
        auto g = build_graph(groups, EdgeSource::parent);
        const double opt = secs_since(t0);
        t0 = Clock::now();
        auto edges = ref::edge_set(groups, EdgeSource::parent);
        const double slow = secs_since(t0);
        row("influence-edge derivation", opt, slow);
        if (edges.size() != g.edge_count()) std::printf("  !! edge counts disagree\n");
    }

    auto g = build_graph(groups, EdgeSource::parent);
    CommunityPartition part;
    {
        LouvainOptions lo;
        lo.seed = 3;
        part = louvain(g, lo);
    }

    {
        auto t0 = Clock::now();
        auto stats = graph_stats(g);
        const double opt = secs_since(t0);
        t0 = Clock::now();
        auto wcc = ref::wcc_count(g);
        auto cc = ref::avg_clustering(g);
        const double slow = secs_since(t0);
        row("degree/component/clustering stats", opt, slow);
        if (stats.wcc_count != wcc || stats.avg_clustering != cc.first)
            std::printf("  !! stats disagree with the reference\n");
    }

    {
        auto t0 = Clock::now();
        const double q = modularity(g, part.assignment);
        const double opt = secs_since(t0);
        t0 = Clock::now();
        const double qd = ref::modularity_direct(g, part.assignment, 1.0);
        const double slow = secs_since(t0);
        row("modularity evaluation", opt, slow);
        if (std::abs(q - qd) > 1e-9) std::printf("  !! modularity disagrees\n");
    }

    {
        // snapshots on every cascade that reaches 30 adopters
        std::vector<Cascade> cs;
        for (const auto& grp : groups) {
            Cascade c = build_cascade(grp, g, true);
            if (c.final_size() >= 30) cs.push_back(std::move(c));
        }
        SnapshotOptions so;
        SnapshotScratch scratch;
        auto t0 = Clock::now();
        std::uint64_t ticks = 0;
        for (const auto& c : cs) ticks += snapshot(c, g, 30, so, &scratch).adopters.size();
        const double opt = secs_since(t0);
        t0 = Clock::now();
        std::uint64_t slow_ticks = 0;
        for (const auto& c : cs) slow_ticks += ref::snapshot_full_scan(c, g, 30, so).adopters.size();
        const double slow = secs_since(t0);
        std::printf("%-34s", ("snapshot x" + std::to_string(cs.size())).c_str());
        std::printf(" %10.4fs %12.4fs %9.1fx\n", opt, slow, slow / opt);
        if (ticks != slow_ticks) std::printf("  !! snapshot adopter counts disagree\n");

        auto snap = snapshot(cs.front(), g, 30, so);
        t0 = Clock::now();
        MeasureSet a;
        for (int i = 0; i < 200; ++i) a = measure_snapshot(snap, cs.front(), part);
        const double mopt = secs_since(t0);
        t0 = Clock::now();
        MeasureSet b;
        for (int i = 0; i < 200; ++i) b = ref::measure_direct(snap, cs.front(), part);
        const double mslow = secs_since(t0);
        row("measure set x200", mopt, mslow);
        auto near = [](double x, double y) { return std::abs(x - y) <= 1e-12; };
        const bool same =
            a.k_adopters == b.k_adopters && a.k_frontiers == b.k_frontiers &&
            a.k_nonadopters == b.k_nonadopters && a.overlap_af == b.overlap_af &&
            a.overlap_an == b.overlap_an && a.overlap_fn == b.overlap_fn &&
            a.size_frontiers == b.size_frontiers && a.size_nonadopters == b.size_nonadopters &&
            near(a.gini_adopters, b.gini_adopters) &&
            near(a.gini_frontiers, b.gini_frontiers) &&
            near(a.gini_nonadopters, b.gini_nonadopters) &&
            near(a.avg_time_to_adoption, b.avg_time_to_adoption);
        if (!same) std::printf("  !! measures disagree\n");
    }

    const int hw = omp_get_max_threads();
    std::printf("\n%-34s %11s %16s %9s\n", "parallel kernel", "1 thread", "max threads",
                "speedup");

    ExtractOptions eo;
    eo.sizes = {30, 50};
    {
        omp_set_num_threads(1);
        auto t0 = Clock::now();
        auto fm1 = extract_features(groups, g, part, eo);
        const double t1 = secs_since(t0);
        omp_set_num_threads(hw);
        t0 = Clock::now();
        auto fmn = extract_features(groups, g, part, eo);
        const double tn = secs_since(t0);
        srow("feature extraction", t1, tn, hw);
        if (fm1.values != fmn.values) std::printf("  !! extraction differs across threads\n");
    }

    {
        auto fm = extract_features(groups, g, part, eo);
        auto ds = label_dataset(fm, 500);
        omp_set_num_threads(1);
        auto t0 = Clock::now();
        auto m1 = train_forest(ds.values, ds.labels, ds.cols(), {}, 9);
        const double t1 = secs_since(t0);
        omp_set_num_threads(hw);
        t0 = Clock::now();
        auto mn = train_forest(ds.values, ds.labels, ds.cols(), {}, 9);
        const double tn = secs_since(t0);
        srow("forest training", t1, tn, hw);
        if (m1.trees.size() != mn.trees.size()) std::printf("  !! forests differ\n");

        StabilityOptions so;
        so.runs = 40;
        omp_set_num_threads(1);
        t0 = Clock::now();
        auto w1 = stability_weights(ds, so);
        const double w_t1 = secs_since(t0);
        omp_set_num_threads(hw);
        t0 = Clock::now();
        auto wn = stability_weights(ds, so);
        const double w_tn = secs_since(t0);
        srow("stability selection x40", w_t1, w_tn, hw);
        if (w1.weights != wn.weights) std::printf("  !! weights differ across threads\n");
    }

    {
        omp_set_num_threads(1);
        auto t0 = Clock::now();
        auto s1 = gen_sbm(cfg);
        const double t1 = secs_since(t0);
        omp_set_num_threads(hw);
        t0 = Clock::now();
        auto sn = gen_sbm(cfg);
        const double tn = secs_since(t0);
        srow("block-model generation", t1, tn, hw);
        if (!(s1.graph == sn.graph)) std::printf("  !! generated graphs differ\n");
    }

    return 0;
}
