#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "casc/errors.hpp"
#include "casc/learn.hpp"
#include "casc/rng.hpp"

namespace casc {

namespace {

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

// L1 logistic regression by FISTA; the intercept is unpenalized. Returns
// false when the parameter change never drops below tol.
bool fit_l1_logistic(const std::vector<double>& x, const std::vector<std::uint8_t>& y,
                     std::size_t d, double lambda, std::size_t max_iter, double tol,
                     std::vector<double>& beta, double& intercept) {
    const std::size_t m = y.size();
    double ybar = 0;
    for (std::uint8_t v : y) ybar += v;
    ybar /= static_cast<double>(m);

    // Lipschitz bound for the logistic gradient, intercept column included
    double frob2 = 0;
    for (double v : x) frob2 += v * v;
    const double lip = (frob2 + static_cast<double>(m)) / (4.0 * static_cast<double>(m));
    const double step = 1.0 / lip;
    const double shrink = lambda * step;

    beta.assign(d, 0.0);
    intercept = std::log(ybar / (1.0 - ybar));
    std::vector<double> prev_beta = beta;
    double prev_b = intercept;
    std::vector<double> look = beta; // momentum point
    double look_b = intercept;
    std::vector<double> grad(d);
    std::vector<double> resid(m);
    double t = 1.0;

    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        // gradient at the momentum point
        for (std::size_t i = 0; i < m; ++i) {
            double z = look_b;
            const double* row = x.data() + i * d;
            for (std::size_t j = 0; j < d; ++j) z += row[j] * look[j];
            resid[i] = (sigmoid(z) - static_cast<double>(y[i])) / static_cast<double>(m);
        }
        std::fill(grad.begin(), grad.end(), 0.0);
        double grad_b = 0;
        for (std::size_t i = 0; i < m; ++i) {
            const double* row = x.data() + i * d;
            for (std::size_t j = 0; j < d; ++j) grad[j] += row[j] * resid[i];
            grad_b += resid[i];
        }

        // proximal step with soft threshold on the feature weights
        double delta = 0;
        for (std::size_t j = 0; j < d; ++j) {
            double u = look[j] - step * grad[j];
            double nb = u > shrink ? u - shrink : (u < -shrink ? u + shrink : 0.0);
            delta = std::max(delta, std::abs(nb - beta[j]));
            prev_beta[j] = beta[j];
            beta[j] = nb;
        }
        double nb_b = look_b - step * grad_b;
        delta = std::max(delta, std::abs(nb_b - intercept));
        prev_b = intercept;
        intercept = nb_b;

        if (delta < tol) return true;

        // adaptive restart: drop the momentum when it points against the
        // latest step, otherwise the iterates ripple around the optimum
        // instead of settling below tol
        double align = (look_b - intercept) * (intercept - prev_b);
        for (std::size_t j = 0; j < d; ++j)
            align += (look[j] - beta[j]) * (beta[j] - prev_beta[j]);
        if (align > 0.0) t = 1.0;

        const double t_next = (1.0 + std::sqrt(1.0 + 4.0 * t * t)) / 2.0;
        const double mom = (t - 1.0) / t_next;
        for (std::size_t j = 0; j < d; ++j) look[j] = beta[j] + mom * (beta[j] - prev_beta[j]);
        look_b = intercept + mom * (intercept - prev_b);
        t = t_next;
    }
    return false;
}

} // namespace

WeightReport stability_weights(const LabeledDataset& ds, const StabilityOptions& opts) {
    const std::size_t n = ds.rows();
    const std::size_t d = ds.cols();
    if (d == 0) throw param_error("dataset has no features");
    if (ds.values.size() != n * d) throw param_error("value buffer does not match rows x cols");
    if (opts.runs == 0) throw param_error("runs must be positive");
    if (!(opts.subsample > 0.0 && opts.subsample <= 1.0))
        throw param_error("subsample fraction must be in (0,1]");
    if (!(opts.scale_low > 0.0 && opts.scale_low <= 1.0))
        throw param_error("scale_low must be in (0,1]");
    if (!(opts.l1 > 0.0)) throw param_error("l1 strength must be positive");

    bool has0 = false, has1 = false;
    for (std::uint8_t label : ds.labels) (label ? has1 : has0) = true;
    if (!has0 || !has1) throw data_error("both classes must be present");

    std::size_t m = static_cast<std::size_t>(std::llround(opts.subsample * static_cast<double>(n)));
    m = std::min(n, std::max<std::size_t>(2, m));

    std::vector<std::uint8_t> nonzero(opts.runs * d, 0);
    std::vector<std::uint8_t> discarded(opts.runs, 0);

#pragma omp parallel
    {
        std::vector<std::uint32_t> idx(n);
        std::vector<double> xsub(m * d), beta;
        std::vector<std::uint8_t> ysub(m);
#pragma omp for schedule(dynamic, 1)
        for (std::int64_t run = 0; run < static_cast<std::int64_t>(opts.runs); ++run) {
            Rng rng(derive_seed(opts.seed, SeedStream::stability_run,
                                static_cast<std::uint64_t>(run)));
            std::iota(idx.begin(), idx.end(), 0u);
            for (std::size_t t = 0; t < m; ++t)
                std::swap(idx[t], idx[t + rng.below(n - t)]);

            std::size_t pos = 0;
            for (std::size_t i = 0; i < m; ++i) {
                ysub[i] = ds.labels[idx[i]];
                pos += ysub[i];
            }
            if (pos == 0 || pos == m) { // single-class draw cannot be fit
                discarded[static_cast<std::size_t>(run)] = 1;
                continue;
            }

            // standardize over the subsample, then apply the random
            // per-feature rescaling that perturbs the penalty
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < d; ++j) xsub[i * d + j] = ds.values[idx[i] * d + j];
            for (std::size_t j = 0; j < d; ++j) {
                double mean = 0;
                for (std::size_t i = 0; i < m; ++i) mean += xsub[i * d + j];
                mean /= static_cast<double>(m);
                double var = 0;
                for (std::size_t i = 0; i < m; ++i) {
                    double dv = xsub[i * d + j] - mean;
                    var += dv * dv;
                }
                double sd = std::sqrt(var / static_cast<double>(m));
                for (std::size_t i = 0; i < m; ++i) {
                    double& v = xsub[i * d + j];
                    v = sd > 0 ? (v - mean) / sd : 0.0;
                }
            }
            for (std::size_t j = 0; j < d; ++j) {
                double scale = rng.uniform(opts.scale_low, 1.0);
                for (std::size_t i = 0; i < m; ++i) xsub[i * d + j] *= scale;
            }

            const double ybar = static_cast<double>(pos) / static_cast<double>(m);
            double lam_max = 0;
            for (std::size_t j = 0; j < d; ++j) {
                double dot = 0;
                for (std::size_t i = 0; i < m; ++i)
                    dot += xsub[i * d + j] * (static_cast<double>(ysub[i]) - ybar);
                lam_max = std::max(lam_max, std::abs(dot) / static_cast<double>(m));
            }
            if (!(lam_max > 0)) { // all-constant features in this draw
                discarded[static_cast<std::size_t>(run)] = 1;
                continue;
            }

            double intercept = 0;
            if (!fit_l1_logistic(xsub, ysub, d, opts.l1 * lam_max, opts.max_iter, opts.tol, beta,
                                 intercept)) {
                discarded[static_cast<std::size_t>(run)] = 1;
                continue;
            }
            for (std::size_t j = 0; j < d; ++j)
                nonzero[static_cast<std::size_t>(run) * d + j] = beta[j] != 0.0;
        }
    }

    std::size_t bad = 0;
    for (std::uint8_t flag : discarded) bad += flag;
    if (bad * 5 > opts.runs)
        throw data_error("stability selection discarded " + std::to_string(bad) + " of " +
                         std::to_string(opts.runs) + " runs (limit is 20%)");
    const std::size_t good = opts.runs - bad;

    WeightReport report;
    report.names = ds.names;
    report.discarded_runs = bad;
    report.weights.resize(d, 0.0);
    report.selected.resize(d, 0);
    for (std::size_t run = 0; run < opts.runs; ++run) {
        if (discarded[run]) continue;
        for (std::size_t j = 0; j < d; ++j)
            if (nonzero[run * d + j]) report.weights[j] += 1.0;
    }
    for (std::size_t j = 0; j < d; ++j) {
        report.weights[j] /= static_cast<double>(good);
        report.selected[j] = report.weights[j] > opts.threshold ? 1 : 0;
    }
    return report;
}

} // namespace casc
