#include <algorithm>
#include <cmath>
#include <numeric>

#include "fairboost/errors.hpp"
#include "fairboost/models.hpp"
#include "fairboost/rng.hpp"

// Weighted random forest.  Sample weights are realized entirely by the
// bootstrap: tree t draws n row indices with probability proportional to
// weight (inverse-CDF over the cumulative weights, generator seeded
// seed + t), and each draw then counts once inside the tree.  Splits
// maximize the Gini decrease over ceil(sqrt(d)) features sampled without
// replacement per node; candidate features are scanned in ascending index
// order and a strictly better gain is required to displace the incumbent,
// so ties resolve to the lowest feature index and threshold.  Every
// comparison is scale-invariant, so scaling all weights by a power of two
// reproduces the identical forest bit for bit.

namespace fairboost {

namespace {

struct Builder {
    MatrixView x;
    std::span<const int> y;
    const std::vector<std::size_t>& draws;  // bootstrap row indices
    ForestParams params;
    int mtry;
    Rng& rng;
    DecisionTree& tree;

    std::vector<std::size_t> feature_pool;
    std::vector<std::pair<double, std::size_t>> scratch;  // (value, draw slot)

    // Grow the node holding draws[begin, end); returns its node index.
    std::int32_t grow(std::vector<std::size_t>& slots, std::size_t begin, std::size_t end,
                      int depth) {
        double total = static_cast<double>(end - begin);
        double pos = 0;
        for (std::size_t i = begin; i < end; ++i) pos += y[draws[slots[i]]];

        auto node_index = static_cast<std::int32_t>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes[node_index].value = pos / total;

        bool pure = pos == 0.0 || pos == total;
        bool depth_ok = params.max_depth == 0 || depth < params.max_depth;
        if (pure || !depth_ok || total < 2.0 * params.min_leaf_weight) return node_index;

        // Sample mtry distinct features, then try them in ascending order.
        for (int k = 0; k < mtry; ++k) {
            auto j = static_cast<std::size_t>(rng.next_below(feature_pool.size() - k));
            std::swap(feature_pool[k], feature_pool[k + j]);
        }
        std::sort(feature_pool.begin(), feature_pool.begin() + mtry);

        double parent_gini = 2.0 * (pos / total) * (1.0 - pos / total) * total;
        double best_gain = 1e-12;
        std::int32_t best_feature = -1;
        double best_threshold = 0;

        for (int k = 0; k < mtry; ++k) {
            std::size_t f = feature_pool[k];
            scratch.clear();
            for (std::size_t i = begin; i < end; ++i)
                scratch.emplace_back(x.at(draws[slots[i]], f), slots[i]);
            std::sort(scratch.begin(), scratch.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });

            double left_n = 0, left_pos = 0;
            for (std::size_t i = 0; i + 1 < scratch.size(); ++i) {
                left_n += 1;
                left_pos += y[draws[scratch[i].second]];
                if (scratch[i].first == scratch[i + 1].first) continue;
                double right_n = total - left_n;
                if (left_n < params.min_leaf_weight || right_n < params.min_leaf_weight)
                    continue;
                double right_pos = pos - left_pos;
                double gl = 2.0 * left_pos * (1.0 - left_pos / left_n);
                double gr = 2.0 * right_pos * (1.0 - right_pos / right_n);
                double gain = parent_gini - gl - gr;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = static_cast<std::int32_t>(f);
                    best_threshold = 0.5 * (scratch[i].first + scratch[i + 1].first);
                }
            }
        }
        if (best_feature < 0) return node_index;

        auto mid = std::partition(slots.begin() + static_cast<std::ptrdiff_t>(begin),
                                  slots.begin() + static_cast<std::ptrdiff_t>(end),
                                  [&](std::size_t slot) {
                                      return x.at(draws[slot], static_cast<std::size_t>(
                                                                   best_feature)) <= best_threshold;
                                  });
        auto split_at = static_cast<std::size_t>(mid - slots.begin());

        tree.nodes[node_index].feature = best_feature;
        tree.nodes[node_index].threshold = best_threshold;
        std::int32_t left = grow(slots, begin, split_at, depth + 1);
        tree.nodes[node_index].left = left;
        std::int32_t right = grow(slots, split_at, end, depth + 1);
        tree.nodes[node_index].right = right;
        return node_index;
    }
};

}  // namespace

ForestModel forest_fit(MatrixView x, std::span<const int> y, std::span<const double> w,
                       const ForestParams& params, std::uint64_t seed) {
    std::size_t n = x.rows, d = x.cols;
    if (y.size() != n || w.size() != n)
        throw DataError("shape", "labels/weights must match the row count");
    if (n == 0 || d == 0) throw DataError("shape", "empty training data");
    if (params.n_trees < 1) throw ConfigError("n_trees", "need at least one tree");
    if (!(params.min_leaf_weight > 0))
        throw ConfigError("min_leaf_weight", "minimum leaf weight must be positive");

    bool has_pos = false, has_neg = false;
    for (std::size_t i = 0; i < n; ++i) (y[i] == 1 ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg)
        throw NumericError("single_class", "training labels contain a single class");

    std::vector<double> cumulative(n);
    double acc = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(w[i] > 0) || !std::isfinite(w[i]))
            throw DataError("weight", "weights must be strictly positive");
        acc += w[i];
        cumulative[i] = acc;
    }

    ForestModel model;
    model.params = params;
    model.seed = seed;
    model.n_features = d;
    model.trees.resize(static_cast<std::size_t>(params.n_trees));

    int mtry = params.features_per_split > 0
                   ? std::min<int>(params.features_per_split, static_cast<int>(d))
                   : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d))));

    for (int t = 0; t < params.n_trees; ++t) {
        Rng rng(seed + static_cast<std::uint64_t>(t));
        std::vector<std::size_t> draws(n);
        for (std::size_t i = 0; i < n; ++i) draws[i] = rng.next_weighted(cumulative);

        auto& tree = model.trees[static_cast<std::size_t>(t)];
        Builder builder{x, y, draws, params, mtry, rng, tree, {}, {}};
        builder.feature_pool.resize(d);
        std::iota(builder.feature_pool.begin(), builder.feature_pool.end(), 0);
        builder.scratch.reserve(n);

        std::vector<std::size_t> slots(n);
        std::iota(slots.begin(), slots.end(), 0);
        builder.grow(slots, 0, n, 0);
    }
    return model;
}

Prediction predict(const ForestModel& model, MatrixView x, double threshold) {
    if (x.cols != model.n_features)
        throw DataError("shape", "feature count does not match the fitted model");
    Prediction out;
    out.proba.assign(x.rows, 0.0);
    out.labels.resize(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double* row = x.row(i);
        double sum = 0;
        for (const auto& tree : model.trees) {
            std::int32_t node = 0;
            while (tree.nodes[static_cast<std::size_t>(node)].feature >= 0) {
                const auto& nd = tree.nodes[static_cast<std::size_t>(node)];
                node = row[nd.feature] <= nd.threshold ? nd.left : nd.right;
            }
            sum += tree.nodes[static_cast<std::size_t>(node)].value;
        }
        double p = sum / static_cast<double>(model.trees.size());
        out.proba[i] = p;
        out.labels[i] = p >= threshold ? 1 : 0;
    }
    return out;
}

}  // namespace fairboost
