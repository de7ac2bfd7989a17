#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <string>
#include <vector>

#include "casc/errors.hpp"
#include "casc/learn.hpp"
#include "casc/rng.hpp"

namespace casc {

LabeledDataset label_dataset(const FeatureMatrix& fm, std::uint64_t threshold) {
    LabeledDataset ds;
    ds.names = fm.names;
    ds.mids = fm.mids;
    ds.final_sizes = fm.final_sizes;
    ds.values = fm.values;
    ds.threshold = threshold;
    ds.labels.resize(fm.rows());
    for (std::size_t i = 0; i < fm.rows(); ++i)
        ds.labels[i] = fm.final_sizes[i] >= threshold ? 1 : 0;
    return ds;
}

ClassMetrics minority_metrics(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) {
    ClassMetrics m;
    if (tp + fp > 0) m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    if (tp + fn > 0) m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    if (m.precision + m.recall > 0)
        m.f1 = 2 * m.precision * m.recall / (m.precision + m.recall);
    return m;
}

std::vector<std::uint32_t> stratified_folds(std::span<const std::uint8_t> labels,
                                            std::size_t folds, std::uint64_t seed) {
    if (folds < 2) throw param_error("need at least two folds");
    Rng rng(seed);
    std::vector<std::uint32_t> pos, neg;
    for (std::size_t i = 0; i < labels.size(); ++i)
        (labels[i] ? pos : neg).push_back(static_cast<std::uint32_t>(i));
    rng.shuffle(pos);
    rng.shuffle(neg);
    std::vector<std::uint32_t> fold_of(labels.size());
    for (std::size_t i = 0; i < pos.size(); ++i)
        fold_of[pos[i]] = static_cast<std::uint32_t>(i % folds);
    // negatives continue the round-robin where the positives stopped, so
    // total fold sizes stay within one of each other as well
    for (std::size_t i = 0; i < neg.size(); ++i)
        fold_of[neg[i]] = static_cast<std::uint32_t>((i + pos.size()) % folds);
    return fold_of;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct SizePool {
    double rec_sum = 0, nrec_sum = 0;
    std::uint64_t rec_n = 0, nrec_n = 0;
};

void mean_sd(const std::vector<FoldMetrics>& folds, double FoldMetrics::*field, double& mean,
             double& sd) {
    double sum = 0;
    for (const auto& f : folds) sum += f.*field;
    mean = sum / static_cast<double>(folds.size());
    if (folds.size() < 2) {
        sd = 0;
        return;
    }
    double ss = 0;
    for (const auto& f : folds) {
        double d = f.*field - mean;
        ss += d * d;
    }
    sd = std::sqrt(ss / static_cast<double>(folds.size() - 1));
}

} // namespace

MetricsReport cross_validate(const FeatureMatrix& fm, std::uint64_t th_tr, std::uint64_t th_ts,
                             const CvOptions& opts) {
    const std::size_t n = fm.rows();
    const std::size_t d = fm.names.size();
    if (opts.repeats == 0) throw param_error("repeats must be positive");
    if (opts.folds < 2) throw param_error("need at least two folds");
    if (n == 0) throw data_error("empty dataset");
    if (d == 0) throw param_error("dataset has no features");

    std::vector<std::uint8_t> labels_ts(n);
    std::size_t positives = 0;
    for (std::size_t i = 0; i < n; ++i) {
        labels_ts[i] = fm.final_sizes[i] >= th_ts ? 1 : 0;
        positives += labels_ts[i];
    }
    if (positives < opts.folds)
        throw data_error("stratified " + std::to_string(opts.folds) + "-fold needs at least " +
                         std::to_string(opts.folds) + " viral cascades at th_ts=" +
                         std::to_string(th_ts) + ", found " + std::to_string(positives));
    if (positives == n)
        throw data_error("every cascade is viral at th_ts=" + std::to_string(th_ts));

    std::vector<std::vector<std::uint32_t>> fold_of(opts.repeats);
    for (std::size_t r = 0; r < opts.repeats; ++r)
        fold_of[r] =
            stratified_folds(labels_ts, opts.folds, derive_seed(opts.seed, SeedStream::fold_shuffle, r));

    const std::size_t tasks = opts.repeats * opts.folds;
    MetricsReport report;
    report.th_tr = th_tr;
    report.th_ts = th_ts;
    report.folds.resize(tasks);
    std::vector<SizePool> pools(tasks);
    if (opts.audit) {
        opts.audit->clear();
        opts.audit->resize(tasks);
    }

    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t task = 0; task < static_cast<std::int64_t>(tasks); ++task) {
        try {
            const std::size_t r = static_cast<std::size_t>(task) / opts.folds;
            const std::size_t f = static_cast<std::size_t>(task) % opts.folds;

            std::vector<std::uint32_t> train_rows, test_rows;
            for (std::size_t i = 0; i < n; ++i)
                (fold_of[r][i] == f ? test_rows : train_rows).push_back(
                    static_cast<std::uint32_t>(i));

            // training-fold labels under the training threshold
            std::vector<std::uint8_t> ytr(train_rows.size());
            std::size_t pos = 0;
            for (std::size_t t = 0; t < train_rows.size(); ++t) {
                ytr[t] = fm.final_sizes[train_rows[t]] >= th_tr ? 1 : 0;
                pos += ytr[t];
            }
            const std::size_t neg = train_rows.size() - pos;
            if (pos == 0 || neg == 0)
                throw data_error("training fold has a single class at th_tr=" +
                                 std::to_string(th_tr));

            std::vector<double> xtr;
            xtr.reserve((train_rows.size() + std::max(pos, neg) - std::min(pos, neg)) * d);
            for (std::uint32_t row : train_rows)
                xtr.insert(xtr.end(), fm.values.begin() + row * d, fm.values.begin() + (row + 1) * d);

            if (opts.audit) {
                auto& a = (*opts.audit)[static_cast<std::size_t>(task)];
                a.repeat = r;
                a.fold = f;
                a.test_rows = test_rows;
                a.train_rows = train_rows;
                a.train_labels = ytr;
            }

            // oversample the minority class to parity inside this fold only
            const std::uint8_t minority_label = pos <= neg ? 1 : 0;
            const std::size_t mino = std::min(pos, neg);
            const std::size_t amount = std::max(pos, neg) - mino;
            if (amount > 0 && mino >= 2) {
                std::vector<double> mrows;
                mrows.reserve(mino * d);
                for (std::size_t t = 0; t < train_rows.size(); ++t)
                    if (ytr[t] == minority_label)
                        mrows.insert(mrows.end(), xtr.begin() + t * d, xtr.begin() + (t + 1) * d);
                const std::size_t k = std::min(opts.smote_k, mino - 1);
                auto synth = smote(mrows, d, amount, k,
                                   derive_seed(opts.seed, SeedStream::smote,
                                               static_cast<std::uint64_t>(task)));
                xtr.insert(xtr.end(), synth.begin(), synth.end());
                ytr.insert(ytr.end(), amount, minority_label);
                if (opts.audit)
                    (*opts.audit)[static_cast<std::size_t>(task)].synthetic_rows = amount;
            }

            auto model = train_forest(xtr, ytr, d, opts.forest,
                                      derive_seed(opts.seed, SeedStream::cv_task,
                                                  static_cast<std::uint64_t>(task)));

            std::vector<double> xts;
            xts.reserve(test_rows.size() * d);
            for (std::uint32_t row : test_rows)
                xts.insert(xts.end(), fm.values.begin() + row * d, fm.values.begin() + (row + 1) * d);
            auto pred = predict(model, xts);

            FoldMetrics m;
            m.repeat = r;
            m.fold = f;
            auto& pool = pools[static_cast<std::size_t>(task)];
            for (std::size_t t = 0; t < test_rows.size(); ++t) {
                const bool truth = labels_ts[test_rows[t]] != 0;
                const bool hat = pred.labels[t] != 0;
                if (truth && hat) ++m.tp;
                else if (!truth && hat) ++m.fp;
                else if (truth && !hat) ++m.fn;
                else ++m.tn;
                if (truth) {
                    const double size = static_cast<double>(fm.final_sizes[test_rows[t]]);
                    if (hat) {
                        pool.rec_sum += size;
                        ++pool.rec_n;
                    } else {
                        pool.nrec_sum += size;
                        ++pool.nrec_n;
                    }
                }
            }
            auto cm = minority_metrics(m.tp, m.fp, m.fn);
            m.precision = cm.precision;
            m.recall = cm.recall;
            m.f1 = cm.f1;
            m.recalled_avg_size = pool.rec_n ? pool.rec_sum / static_cast<double>(pool.rec_n) : kNaN;
            m.nonrecalled_avg_size =
                pool.nrec_n ? pool.nrec_sum / static_cast<double>(pool.nrec_n) : kNaN;
            report.folds[static_cast<std::size_t>(task)] = m;
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    mean_sd(report.folds, &FoldMetrics::precision, report.precision_mean, report.precision_sd);
    mean_sd(report.folds, &FoldMetrics::recall, report.recall_mean, report.recall_sd);
    mean_sd(report.folds, &FoldMetrics::f1, report.f1_mean, report.f1_sd);

    SizePool all;
    for (const auto& pool : pools) {
        all.rec_sum += pool.rec_sum;
        all.rec_n += pool.rec_n;
        all.nrec_sum += pool.nrec_sum;
        all.nrec_n += pool.nrec_n;
    }
    report.recalled_avg_size = all.rec_n ? all.rec_sum / static_cast<double>(all.rec_n) : kNaN;
    report.nonrecalled_avg_size =
        all.nrec_n ? all.nrec_sum / static_cast<double>(all.nrec_n) : kNaN;
    return report;
}

std::vector<SweepRow> sweep_thresholds(const FeatureMatrix& fm,
                                       std::span<const std::uint64_t> th_tr_list,
                                       std::span<const std::uint64_t> th_ts_list,
                                       const CvOptions& opts) {
    if (th_tr_list.empty() || th_ts_list.empty())
        throw param_error("threshold lists must be non-empty");
    std::size_t combos;
    if (th_tr_list.size() == th_ts_list.size()) combos = th_tr_list.size();
    else if (th_tr_list.size() == 1) combos = th_ts_list.size();
    else if (th_ts_list.size() == 1) combos = th_tr_list.size();
    else throw param_error("threshold lists must match in length or broadcast from one element");

    std::vector<SweepRow> rows(combos);
    for (std::size_t i = 0; i < combos; ++i) {
        auto& row = rows[i];
        row.th_tr = th_tr_list[th_tr_list.size() == 1 ? 0 : i];
        row.th_ts = th_ts_list[th_ts_list.size() == 1 ? 0 : i];
        try {
            row.report = cross_validate(fm, row.th_tr, row.th_ts, opts);
            row.ok = true;
        } catch (const error& e) {
            row.ok = false;
            row.error = std::string("[") + e.category() + "] " + e.what();
        }
    }
    return rows;
}

} // namespace casc
