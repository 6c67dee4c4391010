#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fairboost/dataset.hpp"

namespace fairboost {

/// Non-owning view of a dense row-major matrix.
struct MatrixView {
    const double* data = nullptr;
    std::size_t rows = 0;
    std::size_t cols = 0;

    const double* row(std::size_t i) const { return data + i * cols; }
    double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

inline MatrixView features_of(const TabularDataset& ds) {
    return {ds.x.data(), ds.n_rows, ds.n_cols};
}

/// Probabilities and thresholded labels for a batch of rows.
struct Prediction {
    std::vector<double> proba;
    std::vector<int> labels;
};

// ---------------------------------------------------------------------------
// Logistic regression
// ---------------------------------------------------------------------------

struct LogisticParams {
    double l2_lambda = 1.0;  ///< ridge strength on coefficients (not intercept)
    int max_iter = 200;
    double tol = 1e-8;  ///< gradient sup-norm threshold, relative to total weight
};

/// L2-regularized weighted logistic regression fitted by damped Newton
/// iterations.  Continuous columns are standardized internally from the
/// weighted training statistics; the penalty applies to the coefficients in
/// that standardized space and never to the intercept.
struct LogisticModel {
    std::vector<double> coef;  ///< per (standardized) input column
    double intercept = 0;
    std::vector<double> center;  ///< per-column shift applied before scoring
    std::vector<double> scale;   ///< per-column divisor (1 for untouched columns)
    LogisticParams params;
    bool converged = false;
    int iterations = 0;
    /// Penalized objective after every accepted Newton step (first entry is
    /// the starting objective); non-increasing by construction.
    std::vector<double> objective_trace;
};

/// Fit on an explicit matrix.  `kinds`, when provided (one per column),
/// restricts standardization to Continuous columns; without it every
/// column is standardized.  Throws NumericError when only one class is
/// present, DataError on nonpositive weights or shape mismatches.
LogisticModel logistic_fit(MatrixView x, std::span<const int> y,
                           std::span<const double> w, const LogisticParams& params = {},
                           std::span<const ColumnKind> kinds = {});

inline LogisticModel logistic_fit(const TabularDataset& ds, const LogisticParams& params = {}) {
    std::vector<ColumnKind> kinds;
    kinds.reserve(ds.schema.size());
    for (const auto& c : ds.schema) kinds.push_back(c.kind);
    return logistic_fit(features_of(ds), ds.y, ds.w, params, kinds);
}

Prediction predict(const LogisticModel& model, MatrixView x, double threshold = 0.5);

// ---------------------------------------------------------------------------
// Random forest
// ---------------------------------------------------------------------------

struct ForestParams {
    int n_trees = 100;
    int max_depth = 0;  ///< 0 = unlimited
    double min_leaf_weight = 1.0;
    int features_per_split = 0;  ///< 0 = ceil(sqrt(n_features))
};

struct TreeNode {
    std::int32_t feature = -1;  ///< -1 marks a leaf
    double threshold = 0;
    std::int32_t left = -1, right = -1;
    double value = 0;  ///< leaf: favorable-class probability
};

struct DecisionTree {
    std::vector<TreeNode> nodes;  ///< nodes[0] is the root
};

/// Bagged trees over weighted bootstrap resamples.  Each tree draws n rows
/// with probability proportional to sample weight (the weighting is fully
/// realized by the resampling; draws then count with unit weight), splits
/// on the best of ceil(sqrt(d)) randomly chosen features by Gini decrease,
/// and grows until purity or the minimum leaf weight stops it.  Tree t is
/// driven by its own generator seeded seed + t, so fits are reproducible
/// and trees are independent of how many other trees exist.
struct ForestModel {
    std::vector<DecisionTree> trees;
    ForestParams params;
    std::uint64_t seed = 0;
    std::size_t n_features = 0;
};

ForestModel forest_fit(MatrixView x, std::span<const int> y, std::span<const double> w,
                       const ForestParams& params, std::uint64_t seed);

inline ForestModel forest_fit(const TabularDataset& ds, const ForestParams& params,
                              std::uint64_t seed) {
    return forest_fit(features_of(ds), ds.y, ds.w, params, seed);
}

Prediction predict(const ForestModel& model, MatrixView x, double threshold = 0.5);

}  // namespace fairboost
