#include <algorithm>
#include <cmath>
#include <vector>

#include "casc/errors.hpp"
#include "casc/learn.hpp"
#include "casc/rng.hpp"

namespace casc {

namespace {

struct Pending {
    std::int32_t node;
    std::size_t lo, hi; // range in the sample-index buffer
    std::size_t depth;
};

// weighted Gini: |S| - (c0^2 + c1^2) / |S|
double gini_cost(double c0, double c1) {
    double sz = c0 + c1;
    return sz - (c0 * c0 + c1 * c1) / sz;
}

std::vector<TreeNode> grow_tree(std::span<const double> x, std::span<const std::uint8_t> y,
                                std::size_t cols, const ForestHyper& hp, std::size_t fps,
                                std::uint64_t tree_seed) {
    const std::size_t n = y.size();
    Rng rng(tree_seed);

    std::vector<std::uint32_t> sample(n);
    for (auto& s : sample) s = static_cast<std::uint32_t>(rng.below(n));

    std::vector<std::uint32_t> feat(cols);
    for (std::size_t f = 0; f < cols; ++f) feat[f] = static_cast<std::uint32_t>(f);

    std::vector<TreeNode> nodes;
    std::vector<Pending> stack;
    nodes.emplace_back();
    stack.push_back({0, 0, n, 0});

    std::vector<std::pair<double, std::uint8_t>> vals;
    while (!stack.empty()) {
        Pending cur = stack.back();
        stack.pop_back();

        std::uint32_t c0 = 0, c1 = 0;
        for (std::size_t i = cur.lo; i < cur.hi; ++i)
            (y[sample[i]] ? c1 : c0)++;
        nodes[cur.node].n_nonviral = c0;
        nodes[cur.node].n_viral = c1;

        const std::size_t sz = cur.hi - cur.lo;
        if (c0 == 0 || c1 == 0 || sz < 2 * hp.min_leaf ||
            (hp.max_depth > 0 && cur.depth >= hp.max_depth))
            continue; // stays a leaf

        // random feature subset via partial Fisher-Yates; the buffer stays a
        // permutation across nodes, so no reset is needed
        for (std::size_t t = 0; t < fps; ++t)
            std::swap(feat[t], feat[t + rng.below(cols - t)]);

        double best_gain = 1e-12;
        std::int32_t best_feat = -1;
        double best_thr = 0.0;
        const double parent_cost = gini_cost(c0, c1);

        for (std::size_t t = 0; t < fps; ++t) {
            const std::size_t f = feat[t];
            vals.clear();
            for (std::size_t i = cur.lo; i < cur.hi; ++i)
                vals.emplace_back(x[sample[i] * cols + f], y[sample[i]]);
            std::sort(vals.begin(), vals.end());
            if (vals.front().first == vals.back().first) continue;

            double l0 = 0, l1 = 0;
            for (std::size_t p = 1; p < sz; ++p) {
                (vals[p - 1].second ? l1 : l0) += 1;
                if (vals[p - 1].first == vals[p].first) continue;
                if (p < hp.min_leaf || sz - p < hp.min_leaf) continue;
                double gain = parent_cost - gini_cost(l0, l1) - gini_cost(c0 - l0, c1 - l1);
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feat = static_cast<std::int32_t>(f);
                    best_thr = vals[p - 1].first + (vals[p].first - vals[p - 1].first) / 2;
                }
            }
        }
        if (best_feat < 0) continue;

        auto mid_it = std::partition(sample.begin() + static_cast<std::ptrdiff_t>(cur.lo),
                                     sample.begin() + static_cast<std::ptrdiff_t>(cur.hi),
                                     [&](std::uint32_t r) {
                                         return x[r * cols + static_cast<std::size_t>(best_feat)] <=
                                                best_thr;
                                     });
        const std::size_t mid = static_cast<std::size_t>(mid_it - sample.begin());
        // midpoint rounding on adjacent doubles can shove every row to one
        // side; keep the node a leaf instead of creating an empty child
        if (mid == cur.lo || mid == cur.hi) continue;

        nodes[cur.node].feature = best_feat;
        nodes[cur.node].threshold = best_thr;
        nodes[cur.node].left = static_cast<std::int32_t>(nodes.size());
        nodes[cur.node].right = static_cast<std::int32_t>(nodes.size() + 1);
        nodes.emplace_back();
        nodes.emplace_back();
        stack.push_back({nodes[cur.node].right, mid, cur.hi, cur.depth + 1});
        stack.push_back({nodes[cur.node].left, cur.lo, mid, cur.depth + 1});
    }
    return nodes;
}

} // namespace

ForestModel train_forest(std::span<const double> x, std::span<const std::uint8_t> y,
                         std::size_t cols, const ForestHyper& hp, std::uint64_t seed) {
    if (cols == 0) throw param_error("feature arity must be positive");
    if (x.size() % cols != 0) throw param_error("row data is not a multiple of the arity");
    const std::size_t n = x.size() / cols;
    if (y.size() != n) throw param_error("label count does not match row count");
    if (n == 0) throw data_error("empty training set");
    if (hp.n_trees == 0) throw param_error("n_trees must be positive");
    if (hp.min_leaf == 0) throw param_error("min_leaf must be positive");

    bool has0 = false, has1 = false;
    for (std::uint8_t label : y) (label ? has1 : has0) = true;
    if (!has0 || !has1) throw data_error("training set has a single class");

    std::size_t fps = hp.features_per_split;
    if (fps == 0) fps = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(cols))));
    fps = std::min(fps, cols);

    ForestModel model;
    model.arity = cols;
    model.hp = hp;
    model.seed = seed;
    model.trees.resize(hp.n_trees);

#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t t = 0; t < static_cast<std::int64_t>(hp.n_trees); ++t)
        model.trees[static_cast<std::size_t>(t)] = grow_tree(
            x, y, cols, hp, fps,
            derive_seed(seed, SeedStream::tree, static_cast<std::uint64_t>(t)));
    return model;
}

Prediction predict(const ForestModel& model, std::span<const double> x) {
    if (model.arity == 0 || model.trees.empty()) throw param_error("model is empty");
    if (x.size() % model.arity != 0) throw param_error("row data does not match the model arity");
    const std::size_t n = x.size() / model.arity;

    Prediction out;
    out.labels.resize(n);
    out.scores.resize(n);

#pragma omp parallel for schedule(static)
    for (std::int64_t r = 0; r < static_cast<std::int64_t>(n); ++r) {
        const double* row = x.data() + static_cast<std::size_t>(r) * model.arity;
        std::size_t votes = 0;
        for (const auto& tree : model.trees) {
            std::int32_t at = 0;
            while (tree[static_cast<std::size_t>(at)].feature >= 0) {
                const auto& node = tree[static_cast<std::size_t>(at)];
                at = row[node.feature] <= node.threshold ? node.left : node.right;
            }
            const auto& leaf = tree[static_cast<std::size_t>(at)];
            if (leaf.n_viral > leaf.n_nonviral) ++votes;
        }
        out.scores[static_cast<std::size_t>(r)] =
            static_cast<double>(votes) / static_cast<double>(model.trees.size());
        out.labels[static_cast<std::size_t>(r)] = 2 * votes > model.trees.size() ? 1 : 0;
    }
    return out;
}

} // namespace casc
