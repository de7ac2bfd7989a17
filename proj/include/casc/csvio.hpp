#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include "casc/features.hpp"
#include "casc/graph.hpp"
#include "casc/learn.hpp"
#include "casc/synth.hpp"

namespace casc {

// Shortest decimal form that parses back to the same double, locale-free.
// NaN prints as "nan"; writers that want blank cells substitute before
// calling.
std::string format_double(double v);

// RFC-style quoting, applied only when the field needs it.
std::string csv_field(std::string_view s);

// Header `mid,final_size,label,<feature...>`; label is 1 when final_size
// reaches viral_threshold.
void write_features_csv(std::ostream& out, const FeatureMatrix& fm, std::uint64_t viral_threshold);
void write_features_csv_file(const std::string& path, const FeatureMatrix& fm,
                             std::uint64_t viral_threshold);

// Inverse of write_features_csv. The label column is skipped (labels are
// re-derived from thresholds downstream) and the group is left at A.
FeatureMatrix read_features_csv(std::istream& in);
FeatureMatrix read_features_csv_file(const std::string& path);

// `measure,m,class,min,q1,median,q3,max,mean`
void write_report_csv(std::ostream& out, std::span<const ReportRow> rows);
void write_report_csv_file(const std::string& path, std::span<const ReportRow> rows);

// `th_tr,th_ts,fold,repeat,precision,recall,f1,tp,fp,fn,recalled_avg_size,
// nonrecalled_avg_size`, one row per fold, reports concatenated. NaN size
// cells are written blank.
void write_metrics_csv(std::ostream& out, std::span<const MetricsReport> reports);
void write_metrics_csv_file(const std::string& path, std::span<const MetricsReport> reports);

// `feature,weight,selected`
void write_weights_csv(std::ostream& out, const WeightReport& w);
void write_weights_csv_file(const std::string& path, const WeightReport& w);

// `mid,planted_viral,final_size`
void write_truth_csv(std::ostream& out, std::span<const CascadeTruth> truth);
void write_truth_csv_file(const std::string& path, std::span<const CascadeTruth> truth);

// Flat key=value lines, one per statistic.
void write_stats_report(std::ostream& out, const GraphStatsReport& r);
void write_stats_report_file(const std::string& path, const GraphStatsReport& r);

// `degree,in_count,out_count` up to the larger histogram's length.
void write_degree_hist_csv(std::ostream& out, const GraphStatsReport& r);
void write_degree_hist_csv_file(const std::string& path, const GraphStatsReport& r);

} // namespace casc
