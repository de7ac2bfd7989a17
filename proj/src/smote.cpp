#include <algorithm>
#include <cmath>
#include <vector>

#include "casc/errors.hpp"
#include "casc/learn.hpp"
#include "casc/rng.hpp"

namespace casc {

std::vector<double> smote(std::span<const double> minority, std::size_t cols, std::size_t amount,
                          std::size_t k_neighbors, std::uint64_t seed) {
    if (cols == 0) throw param_error("feature arity must be positive");
    if (minority.size() % cols != 0) throw param_error("row data is not a multiple of the arity");
    const std::size_t n = minority.size() / cols;
    if (k_neighbors == 0) throw param_error("k_neighbors must be positive");
    if (n <= k_neighbors)
        throw param_error("minority class has " + std::to_string(n) +
                          " rows but k_neighbors=" + std::to_string(k_neighbors) +
                          " needs more; lower k_neighbors");
    if (amount == 0) return {};

    // standardize a copy for the distance computation only
    std::vector<double> z(minority.begin(), minority.end());
    for (std::size_t j = 0; j < cols; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += z[i * cols + j];
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double d = z[i * cols + j] - mean;
            var += d * d;
        }
        double sd = std::sqrt(var / static_cast<double>(n));
        for (std::size_t i = 0; i < n; ++i) {
            double& v = z[i * cols + j];
            v = sd > 0.0 ? (v - mean) / sd : 0.0;
        }
    }

    // k nearest neighbors per row, ties broken by row index
    std::vector<std::uint32_t> nn(n * k_neighbors);
    std::vector<std::pair<double, std::uint32_t>> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
        dist.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            double d2 = 0.0;
            for (std::size_t f = 0; f < cols; ++f) {
                double d = z[i * cols + f] - z[j * cols + f];
                d2 += d * d;
            }
            dist.emplace_back(d2, static_cast<std::uint32_t>(j));
        }
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k_neighbors),
                          dist.end());
        for (std::size_t k = 0; k < k_neighbors; ++k) nn[i * k_neighbors + k] = dist[k].second;
    }

    Rng rng(seed);
    std::vector<double> out(amount * cols);
    for (std::size_t s = 0; s < amount; ++s) {
        const std::size_t i = rng.below(n);
        const std::uint32_t j = nn[i * k_neighbors + rng.below(k_neighbors)];
        const double u = rng.uniform01();
        const double* a = minority.data() + i * cols;
        const double* b = minority.data() + j * cols;
        double* row = out.data() + s * cols;
        for (std::size_t f = 0; f < cols; ++f) row[f] = a[f] + u * (b[f] - a[f]);
    }
    return out;
}

} // namespace casc
