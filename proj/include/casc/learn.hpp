#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "casc/features.hpp"

namespace casc {

// Feature matrix plus the binary virality label (final size >= threshold).
struct LabeledDataset {
    std::vector<std::string> names;
    std::vector<std::string> mids;
    std::vector<std::uint64_t> final_sizes;
    std::vector<double> values; // row-major
    std::vector<std::uint8_t> labels;
    std::uint64_t threshold = 0;

    std::size_t rows() const { return labels.size(); }
    std::size_t cols() const { return names.size(); }
};

LabeledDataset label_dataset(const FeatureMatrix& fm, std::uint64_t threshold);

// Synthetic minority rows: x + u * (nn - x) for a random minority row x and
// one of its k nearest minority neighbors (Euclidean over features
// standardized within the minority set), u uniform in [0,1]. Returns
// `amount` rows, row-major with `cols` columns.
std::vector<double> smote(std::span<const double> minority, std::size_t cols, std::size_t amount,
                          std::size_t k_neighbors, std::uint64_t seed);

struct ForestHyper {
    std::size_t n_trees = 100;
    std::size_t max_depth = 0;          // 0 = unlimited
    std::size_t min_leaf = 1;
    std::size_t features_per_split = 0; // 0 = ceil(sqrt(arity))
};

struct TreeNode {
    std::int32_t feature = -1; // -1: leaf
    double threshold = 0.0;    // x[feature] <= threshold goes left
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::uint32_t n_nonviral = 0; // training rows that reached this node
    std::uint32_t n_viral = 0;
};

struct ForestModel {
    std::size_t arity = 0;
    ForestHyper hp;
    std::uint64_t seed = 0;
    std::vector<std::vector<TreeNode>> trees;
};

// Bagged Gini-split trees over a random feature subset per node.
// Deterministic for a given seed regardless of thread count.
ForestModel train_forest(std::span<const double> x, std::span<const std::uint8_t> y,
                         std::size_t cols, const ForestHyper& hp = {}, std::uint64_t seed = 0);

struct Prediction {
    std::vector<std::uint8_t> labels;
    std::vector<double> scores; // fraction of trees voting viral
};

// Majority vote across trees; exact ties resolve to non-viral.
Prediction predict(const ForestModel& model, std::span<const double> x);

struct ClassMetrics {
    double precision = 0.0; // 0 when nothing predicted positive
    double recall = 0.0;    // 0 when no positives exist
    double f1 = 0.0;        // 0 when precision + recall == 0
};

ClassMetrics minority_metrics(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn);

// Fold index per row; each class is spread round-robin after a seeded
// shuffle, so per-fold class counts differ by at most one.
std::vector<std::uint32_t> stratified_folds(std::span<const std::uint8_t> labels,
                                            std::size_t folds, std::uint64_t seed);

struct FoldMetrics {
    std::size_t repeat = 0;
    std::size_t fold = 0;
    std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
    double precision = 0.0, recall = 0.0, f1 = 0.0;
    // Mean final size of test-fold viral cascades the model did / did not
    // recall; NaN when the cell is empty.
    double recalled_avg_size = 0.0;
    double nonrecalled_avg_size = 0.0;
};

struct MetricsReport {
    std::uint64_t th_tr = 0, th_ts = 0;
    std::vector<FoldMetrics> folds; // repeat-major
    double precision_mean = 0.0, precision_sd = 0.0;
    double recall_mean = 0.0, recall_sd = 0.0;
    double f1_mean = 0.0, f1_sd = 0.0;
    // pooled over every test fold; NaN when no viral cascade was seen
    double recalled_avg_size = 0.0;
    double nonrecalled_avg_size = 0.0;
};

// Filled per (repeat, fold) when CvOptions::audit is set; lets tests verify
// the split, the relabeling, and the synthetic-row bookkeeping directly.
struct CvFoldAudit {
    std::size_t repeat = 0, fold = 0;
    std::vector<std::uint32_t> test_rows;
    std::vector<std::uint32_t> train_rows;
    std::vector<std::uint8_t> train_labels; // after the TH_tr relabel, before oversampling
    std::size_t synthetic_rows = 0;
};

struct CvOptions {
    std::size_t folds = 10;
    std::size_t repeats = 10;
    ForestHyper forest;
    std::size_t smote_k = 5; // capped at minority size - 1 per training fold
    std::uint64_t seed = 0;
    std::vector<CvFoldAudit>* audit = nullptr;
};

// Stratified k-fold protocol for the imbalanced task. Folds are stratified
// on the TH_ts labels; within each training fold labels are recomputed with
// TH_tr and the minority class is oversampled to parity; the test fold is
// never touched. Metrics are for the viral class only.
MetricsReport cross_validate(const FeatureMatrix& fm, std::uint64_t th_tr, std::uint64_t th_ts,
                             const CvOptions& opts = {});

struct SweepRow {
    std::uint64_t th_tr = 0, th_ts = 0;
    bool ok = false;
    std::string error; // category + message when !ok
    MetricsReport report;
};

// One cross_validate per threshold combination. Lists of equal length pair
// up elementwise; a single-element list broadcasts. Failures land in the
// row instead of aborting the sweep.
std::vector<SweepRow> sweep_thresholds(const FeatureMatrix& fm,
                                       std::span<const std::uint64_t> th_tr_list,
                                       std::span<const std::uint64_t> th_ts_list,
                                       const CvOptions& opts = {});

struct StabilityOptions {
    std::size_t runs = 100;
    double subsample = 0.5;  // fraction of rows per run, without replacement
    double scale_low = 0.5;  // per-feature random scale drawn from [scale_low, 1]
    double l1 = 0.25;        // penalty as a fraction of the smallest all-zero penalty
    double threshold = 0.01; // selected iff weight > threshold
    std::size_t max_iter = 2000;
    double tol = 1e-6;
    std::uint64_t seed = 0;
};

struct WeightReport {
    std::vector<std::string> names;
    std::vector<double> weights; // fraction of converged runs with a nonzero coefficient
    std::vector<std::uint8_t> selected;
    std::size_t discarded_runs = 0; // runs that failed to converge
};

// Stability selection: many L1-regularized logistic fits on row subsamples
// with randomly rescaled features; a feature's weight is how often its
// coefficient survives the penalty.
WeightReport stability_weights(const LabeledDataset& ds, const StabilityOptions& opts = {});

} // namespace casc
