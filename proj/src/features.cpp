#include "casc/features.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include "casc/errors.hpp"

namespace casc {

namespace {

// sorted distinct community ids of the known nodes in the set
std::vector<std::uint32_t> community_ids(std::span<const NodeId> nodes,
                                         const CommunityPartition& p) {
    std::vector<std::uint32_t> ids;
    ids.reserve(nodes.size());
    for (NodeId v : nodes) {
        if (v == kNoNode) continue;
        if (v >= p.assignment.size()) throw bounds_error("node index outside the partition");
        ids.push_back(p.assignment[v]);
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

std::uint32_t intersection_size(std::span<const std::uint32_t> a,
                                std::span<const std::uint32_t> b) {
    std::size_t i = 0, j = 0;
    std::uint32_t n = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) ++i;
        else if (b[j] < a[i]) ++j;
        else {
            ++n;
            ++i;
            ++j;
        }
    }
    return n;
}

} // namespace

std::uint32_t count_communities(std::span<const NodeId> nodes, const CommunityPartition& p) {
    return static_cast<std::uint32_t>(community_ids(nodes, p).size());
}

double gini_impurity(std::span<const NodeId> nodes, const CommunityPartition& p,
                     bool* degenerate) {
    std::vector<std::uint32_t> ids;
    ids.reserve(nodes.size());
    for (NodeId v : nodes) {
        if (v == kNoNode) continue;
        if (v >= p.assignment.size()) throw bounds_error("node index outside the partition");
        ids.push_back(p.assignment[v]);
    }
    if (degenerate) *degenerate = ids.empty();
    if (ids.empty()) return 0.0;
    std::sort(ids.begin(), ids.end());
    const double n = static_cast<double>(ids.size());
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < ids.size();) {
        std::size_t j = i;
        while (j < ids.size() && ids[j] == ids[i]) ++j;
        double share = static_cast<double>(j - i) / n;
        sum_sq += share * share;
        i = j;
    }
    return 1.0 - sum_sq;
}

std::uint32_t overlap(std::span<const NodeId> a, std::span<const NodeId> b,
                      const CommunityPartition& p) {
    auto ca = community_ids(a, p);
    auto cb = community_ids(b, p);
    return intersection_size(ca, cb);
}

double avg_time_to_adoption(const Cascade& c, std::size_t m) {
    if (m < 2) throw param_error("average time to adoption needs at least 2 adopters");
    if (m > c.final_size())
        throw param_error("m exceeds cascade size " + std::to_string(c.final_size()));
    double sum = 0.0;
    for (std::size_t i = 1; i < m; ++i) sum += static_cast<double>(c.adopters[i].offset);
    return sum / static_cast<double>(m - 1);
}

MeasureSet measure_snapshot(const CascadeSnapshot& s, const Cascade& c,
                            const CommunityPartition& p) {
    if (s.m > c.final_size()) throw param_error("snapshot does not belong to this cascade");
    MeasureSet ms;

    auto ca = community_ids(s.adopters, p);
    auto cf = community_ids(s.lambda_frontiers, p);
    auto cn = community_ids(s.lambda_nonadopters, p);
    ms.k_adopters = static_cast<std::uint32_t>(ca.size());
    ms.k_frontiers = static_cast<std::uint32_t>(cf.size());
    ms.k_nonadopters = static_cast<std::uint32_t>(cn.size());

    ms.gini_adopters = gini_impurity(s.adopters, p, &ms.gini_adopters_degenerate);
    ms.gini_frontiers = gini_impurity(s.lambda_frontiers, p, &ms.gini_frontiers_degenerate);
    ms.gini_nonadopters = gini_impurity(s.lambda_nonadopters, p, &ms.gini_nonadopters_degenerate);

    ms.overlap_af = intersection_size(ca, cf);
    ms.overlap_an = intersection_size(ca, cn);
    ms.overlap_fn = intersection_size(cf, cn);

    ms.size_frontiers = s.lambda_frontiers.size();
    ms.size_nonadopters = s.lambda_nonadopters.size();

    if (s.m >= 2) {
        ms.avg_time_to_adoption = avg_time_to_adoption(c, s.m);
    } else {
        ms.avg_time_degenerate = true;
    }
    return ms;
}

namespace {

const char* kGroupAColumns[] = {
    "k_lfrontier",    "k_lnonadopter",       "gini_adopter",
    "gini_lfrontier", "gini_lnonadopter",    "ov_adopter_lfrontier",
    "ov_adopter_lnonadopter", "ov_lfrontier_lnonadopter",
    "n_lfrontier",    "n_lnonadopter",       "avgtime",
};

void fill_row_a(const MeasureSet& ms, double* out) {
    out[0] = ms.k_frontiers;
    out[1] = ms.k_nonadopters;
    out[2] = ms.gini_adopters;
    out[3] = ms.gini_frontiers;
    out[4] = ms.gini_nonadopters;
    out[5] = ms.overlap_af;
    out[6] = ms.overlap_an;
    out[7] = ms.overlap_fn;
    out[8] = static_cast<double>(ms.size_frontiers);
    out[9] = static_cast<double>(ms.size_nonadopters);
    out[10] = ms.avg_time_to_adoption;
}

} // namespace

FeatureMatrix extract_features(std::span<const CascadeGroup> groups, const InfluenceGraph& g,
                               const CommunityPartition& p, const ExtractOptions& opts) {
    std::vector<std::size_t> sizes = opts.sizes;
    if (sizes.empty())
        sizes = opts.group == FeatureGroup::A ? std::vector<std::size_t>{30, 50}
                                              : std::vector<std::size_t>{50};
    std::sort(sizes.begin(), sizes.end());
    sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
    if (sizes.front() < 1) throw param_error("snapshot sizes must be positive");

    FeatureMatrix fm;
    fm.group = opts.group;
    for (std::size_t m : sizes) {
        std::string suffix = "_m" + std::to_string(m);
        if (opts.group == FeatureGroup::A) {
            for (const char* col : kGroupAColumns) fm.names.push_back(col + suffix);
        } else {
            fm.names.push_back("avgtime" + suffix);
        }
    }

    const std::size_t need = sizes.back();
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        if (groups[i].events.size() >= need) eligible.push_back(i);
        else ++fm.excluded_cascades;
    }

    const std::size_t cols = fm.names.size();
    fm.mids.resize(eligible.size());
    fm.final_sizes.resize(eligible.size());
    fm.values.assign(eligible.size() * cols, 0.0);

    std::exception_ptr failure;
#pragma omp parallel
    {
        SnapshotScratch scratch;
#pragma omp for schedule(dynamic, 16)
        for (std::int64_t r = 0; r < static_cast<std::int64_t>(eligible.size()); ++r) {
            try {
                const auto& group = groups[eligible[static_cast<std::size_t>(r)]];
                auto cascade = build_cascade(group, g, true);
                double* row = fm.values.data() + static_cast<std::size_t>(r) * cols;
                std::size_t col = 0;
                for (std::size_t m : sizes) {
                    auto snap = snapshot(cascade, g, m, opts.snapshot, &scratch);
                    auto ms = measure_snapshot(snap, cascade, p);
                    if (opts.group == FeatureGroup::A) {
                        fill_row_a(ms, row + col);
                        col += 11;
                    } else {
                        row[col++] = ms.avg_time_to_adoption;
                    }
                }
                fm.mids[static_cast<std::size_t>(r)] = group.mid;
                fm.final_sizes[static_cast<std::size_t>(r)] = group.events.size();
            } catch (...) {
#pragma omp critical
                if (!failure) failure = std::current_exception();
            }
        }
    }
    if (failure) std::rethrow_exception(failure);
    return fm;
}

double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw param_error("quantile of an empty sample");
    if (q < 0.0 || q > 1.0) throw param_error("quantile must be within [0,1]");
    const double h = static_cast<double>(sorted.size() - 1) * q;
    const std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

std::vector<ReportRow> measurement_report(std::span<const CascadeGroup> groups,
                                          const InfluenceGraph& g, const CommunityPartition& p,
                                          std::span<const std::size_t> sizes_in,
                                          const SnapshotOptions& sopts,
                                          std::uint64_t viral_threshold) {
    std::vector<std::size_t> sizes(sizes_in.begin(), sizes_in.end());
    std::sort(sizes.begin(), sizes.end());
    sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
    if (sizes.empty()) throw param_error("no snapshot sizes given");
    if (sizes.front() < 1) throw param_error("snapshot sizes must be positive");
    static const char* kMeasureNames[] = {
        "k_adopter",       "k_lfrontier",          "k_lnonadopter",
        "gini_adopter",    "gini_lfrontier",       "gini_lnonadopter",
        "ov_adopter_lfrontier", "ov_adopter_lnonadopter", "ov_lfrontier_lnonadopter",
        "n_lfrontier",     "n_lnonadopter",        "avgtime_minutes",
    };
    constexpr std::size_t kMeasures = 12;

    auto measure_value = [](const MeasureSet& ms, std::size_t idx) -> double {
        switch (idx) {
            case 0: return ms.k_adopters;
            case 1: return ms.k_frontiers;
            case 2: return ms.k_nonadopters;
            case 3: return ms.gini_adopters;
            case 4: return ms.gini_frontiers;
            case 5: return ms.gini_nonadopters;
            case 6: return ms.overlap_af;
            case 7: return ms.overlap_an;
            case 8: return ms.overlap_fn;
            case 9: return static_cast<double>(ms.size_frontiers);
            case 10: return static_cast<double>(ms.size_nonadopters);
            default: return ms.avg_time_to_adoption / 60.0;
        }
    };

    const std::size_t n_sizes = sizes.size();
    std::vector<MeasureSet> slots(groups.size() * n_sizes);

    std::exception_ptr failure;
#pragma omp parallel
    {
        SnapshotScratch scratch;
#pragma omp for schedule(dynamic, 16)
        for (std::int64_t gi = 0; gi < static_cast<std::int64_t>(groups.size()); ++gi) {
            try {
                const auto& group = groups[static_cast<std::size_t>(gi)];
                const std::size_t n = group.events.size();
                Cascade cascade;
                bool built = false;
                for (std::size_t si = 0; si < n_sizes; ++si) {
                    if (sizes[si] > n) continue;
                    if (!built) {
                        cascade = build_cascade(group, g, true);
                        built = true;
                    }
                    auto snap = snapshot(cascade, g, sizes[si], sopts, &scratch);
                    slots[static_cast<std::size_t>(gi) * n_sizes + si] =
                        measure_snapshot(snap, cascade, p);
                }
            } catch (...) {
#pragma omp critical
                if (!failure) failure = std::current_exception();
            }
        }
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<ReportRow> rows;
    for (std::size_t mi = 0; mi < kMeasures; ++mi) {
        for (std::size_t si = 0; si < n_sizes; ++si) {
            for (int viral = 0; viral <= 1; ++viral) {
                std::vector<double> vals;
                for (std::size_t gi = 0; gi < groups.size(); ++gi) {
                    const std::size_t n = groups[gi].events.size();
                    if (sizes[si] > n) continue;
                    const bool is_viral = n >= viral_threshold;
                    if (static_cast<int>(is_viral) != viral) continue;
                    vals.push_back(measure_value(slots[gi * n_sizes + si], mi));
                }
                if (vals.empty()) continue;
                std::sort(vals.begin(), vals.end());
                ReportRow row;
                row.measure = kMeasureNames[mi];
                row.m = sizes[si];
                row.klass = viral ? "viral" : "nonviral";
                row.min = vals.front();
                row.q1 = quantile_sorted(vals, 0.25);
                row.median = quantile_sorted(vals, 0.5);
                row.q3 = quantile_sorted(vals, 0.75);
                row.max = vals.back();
                double sum = 0.0;
                for (double v : vals) sum += v;
                row.mean = sum / static_cast<double>(vals.size());
                rows.push_back(std::move(row));
            }
        }
    }
    return rows;
}

} // namespace casc
