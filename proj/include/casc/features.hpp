#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "casc/cascade.hpp"
#include "casc/community.hpp"
#include "casc/events.hpp"
#include "casc/graph.hpp"

namespace casc {

// The twelve per-snapshot measurements over the three node populations:
// adopters V, lambda-frontiers F, lambda-non-adopters N. Empty sets follow
// the conventions K=0, gini=0 (with degenerate flag), overlap=0.
struct MeasureSet {
    std::uint32_t k_adopters = 0;
    std::uint32_t k_frontiers = 0;
    std::uint32_t k_nonadopters = 0;
    double gini_adopters = 0.0;
    double gini_frontiers = 0.0;
    double gini_nonadopters = 0.0;
    std::uint32_t overlap_af = 0;
    std::uint32_t overlap_an = 0;
    std::uint32_t overlap_fn = 0;
    std::uint64_t size_frontiers = 0;
    std::uint64_t size_nonadopters = 0;
    double avg_time_to_adoption = 0.0; // seconds

    bool gini_adopters_degenerate = false;
    bool gini_frontiers_degenerate = false;
    bool gini_nonadopters_degenerate = false;
    bool avg_time_degenerate = false; // m < 2, no repost to average

    bool operator==(const MeasureSet&) const = default;
};

// Number of distinct communities covering the node set. Entries equal to
// kNoNode are skipped.
std::uint32_t count_communities(std::span<const NodeId> nodes, const CommunityPartition& p);

// 1 - sum over communities of (share of the set)^2. Empty set (after
// dropping kNoNode entries) gives 0; *degenerate is set accordingly when
// provided.
double gini_impurity(std::span<const NodeId> nodes, const CommunityPartition& p,
                     bool* degenerate = nullptr);

// Count of communities represented in both sets.
std::uint32_t overlap(std::span<const NodeId> a, std::span<const NodeId> b,
                      const CommunityPartition& p);

// Mean adoption offset of the non-originator adopters among the first m;
// requires m >= 2 (and m <= final size).
double avg_time_to_adoption(const Cascade& c, std::size_t m);

MeasureSet measure_snapshot(const CascadeSnapshot& s, const Cascade& c,
                            const CommunityPartition& p);

enum class FeatureGroup { A, C };

// Per-cascade feature rows. Column order is size-major, then within a size:
// k_lfrontier, k_lnonadopter, gini_adopter, gini_lfrontier,
// gini_lnonadopter, ov_adopter_lfrontier, ov_adopter_lnonadopter,
// ov_lfrontier_lnonadopter, n_lfrontier, n_lnonadopter, avgtime
// (group A; group C is the single avgtime column). Names carry an _m<size>
// suffix.
struct FeatureMatrix {
    FeatureGroup group = FeatureGroup::A;
    std::vector<std::string> names;        // feature columns only
    std::vector<std::string> mids;         // one per row
    std::vector<std::uint64_t> final_sizes; // one per row
    std::vector<double> values;            // row-major, rows x names
    std::uint64_t excluded_cascades = 0;   // final size below the largest requested m

    std::size_t rows() const { return mids.size(); }
    double at(std::size_t row, std::size_t col) const { return values[row * names.size() + col]; }
};

struct ExtractOptions {
    FeatureGroup group = FeatureGroup::A;
    std::vector<std::size_t> sizes; // defaults: A -> {30,50}, C -> {50}
    SnapshotOptions snapshot;
};

// Builds cascades from the groups and assembles the feature matrix. Only
// cascades with final size >= max(sizes) become rows; rows keep the group
// order. Parallel over cascades, output independent of thread count.
FeatureMatrix extract_features(std::span<const CascadeGroup> groups, const InfluenceGraph& g,
                               const CommunityPartition& p, const ExtractOptions& opts = {});

// One quartile row of the measurement distribution report.
struct ReportRow {
    std::string measure;
    std::size_t m = 0;
    std::string klass; // "viral" | "nonviral"
    double min = 0, q1 = 0, median = 0, q3 = 0, max = 0, mean = 0;
};

// Distribution of every measure per snapshot size and class. A cascade is
// viral when its final size >= viral_threshold; a cascade contributes at
// size m when its final size >= m. avgtime is reported in minutes (the
// only measure whose report unit differs from the internal seconds).
// Rows: measure-major, then size ascending, then nonviral before viral;
// empty cells are skipped. Quartiles use linear interpolation.
std::vector<ReportRow> measurement_report(std::span<const CascadeGroup> groups,
                                          const InfluenceGraph& g, const CommunityPartition& p,
                                          std::span<const std::size_t> sizes,
                                          const SnapshotOptions& sopts,
                                          std::uint64_t viral_threshold);

// Linear-interpolation quantile of a sorted sample; q in [0,1].
double quantile_sorted(std::span<const double> sorted, double q);

} // namespace casc
