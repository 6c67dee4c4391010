#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fairboost/dataset.hpp"

namespace fairboost {

// ---------------------------------------------------------------------------
// Reweighing: closed-form sample weights that make group and label
// statistically independent.
// ---------------------------------------------------------------------------

/// Weight per (group, label) cell: w(s,y) = n_s * n_y / (n * n_{s,y}),
/// computed from the dataset's existing weights (so unit-weight data gives
/// the classical count formula).  Throws NumericError if a cell is empty.
struct ReweighingModel {
    double weight[2][2];  ///< [s][y]
};

ReweighingModel reweigh_fit(const TabularDataset& train);

/// Multiply each row's weight by its cell weight.  Features, labels and
/// groups are untouched.
TabularDataset reweigh_apply(const TabularDataset& ds, const ReweighingModel& model);

// ---------------------------------------------------------------------------
// Fair representations: map rows to soft memberships over k prototypes so
// that group membership is obfuscated while features and labels remain
// predictable.
// ---------------------------------------------------------------------------

struct FairRepParams {
    int k = 5;             ///< number of prototypes
    double a_x = 0.01;     ///< reconstruction weight
    double a_y = 1.0;      ///< label-fidelity weight
    double a_z = 50.0;     ///< group-parity weight
    int max_iter = 5000;   ///< projected-gradient iteration budget
    double tol = 0.0;      ///< stop when the step's loss decrease falls below this
};

/// Fitted prototypes live in the standardized feature space recorded by
/// center/scale.  Memberships for a row are softmax(-squared distance) over
/// prototypes; reconstructions and label scores are membership-weighted
/// sums.  `loss_trace` holds the loss after every accepted step and is
/// non-increasing.
struct FairRepModel {
    std::vector<double> prototypes;   ///< k * d, standardized space
    std::vector<double> label_score;  ///< k, in [0,1]
    std::vector<double> center, scale;
    FairRepParams params;
    std::uint64_t seed = 0;
    int iterations = 0;
    std::vector<double> loss_trace;
};

/// Loss/gradient bundle for one parameter setting (exposed so tests can
/// verify the analytic gradients against finite differences).
struct FairRepLoss {
    double total = 0, group_parity = 0, reconstruction = 0, label_fit = 0;
    std::vector<double> d_prototypes;   ///< k * d
    std::vector<double> d_label_score;  ///< k
};

FairRepLoss fair_rep_loss(const TabularDataset& train_standardized_view,
                          const std::vector<double>& prototypes,
                          const std::vector<double>& label_score,
                          const FairRepParams& params);

/// Projected gradient descent with halving line search from a seeded
/// prototype initialization.  Throws NumericError (code "diverged") if the
/// loss turns non-finite, naming the iteration and step size.
FairRepModel fair_rep_fit(const TabularDataset& train, const FairRepParams& params,
                          std::uint64_t seed);

/// Deterministic transform: features become prototype reconstructions in
/// the original scale, labels become thresholded label scores, groups and
/// weights pass through.
TabularDataset fair_rep_transform(const FairRepModel& model, const TabularDataset& ds);

// ---------------------------------------------------------------------------
// Distribution optimizer: a learned probabilistic map on a discretized
// domain that trades distributional distortion for group parity.
// ---------------------------------------------------------------------------

struct DistMapParams {
    double epsilon = 0.05;       ///< allowed relative deviation of group rates
    double distortion_cap = 0.5; ///< per-(cell,group) expected distortion bound
    int max_iter = 600;
    std::size_t domain_limit = 10000;  ///< max feature-cell count
    double constraint_tol = 1e-4;
    /// Optional custom distortion between (featurecells+label) pairs; the
    /// default charges 1 for a label flip plus the fraction of changed
    /// feature cells.
    std::function<double(const std::vector<int>&, int, const std::vector<int>&, int)> distortion;
};

/// Result of checking a map against its constraints.
struct DistMapCertificate {
    bool feasible = false;
    double max_row_error = 0;         ///< worst |row sum - 1|
    double max_distortion_excess = 0; ///< worst expected-distortion overshoot
    double max_rate_deviation = 0;    ///< worst |group rate / overall rate - 1|
    std::string worst_constraint;     ///< description of the binding violation
};

struct DistMapModel {
    std::vector<ColumnSchema> domain;     ///< discretized feature columns
    std::vector<std::size_t> cell_counts; ///< per column
    std::size_t n_cells = 0;              ///< product of cell counts
    /// Map rows indexed by (group * 2 + label) * n_cells + cell, columns by
    /// label * n_cells + cell: probability of landing on (cell', label').
    std::vector<double> map;
    DistMapParams params;
    double objective = 0;        ///< summed per-group total-variation distance
    DistMapCertificate certificate;
    int iterations = 0;
};

/// Deterministic fit (no RNG): projected gradient on the row simplices with
/// a ramped penalty on constraint violations, tracking the best feasible
/// iterate (the identity map is iterate zero).  Throws ConfigError when the
/// discretized domain exceeds the limit and NumericError (code
/// "infeasible") naming the most-violated constraint when no feasible map
/// is found within the budget.
DistMapModel dist_map_fit(const TabularDataset& train_discretized, const DistMapParams& params);

/// Sample the map row by row.  Each row's draw comes from a stream derived
/// from (seed, row index), so transforming a superset of rows never changes
/// the outcome of a given row.  Cell values are written back as bin
/// representatives (the category index, or the recorded bin mean pushed
/// through the recorded edges).
TabularDataset dist_map_transform(const DistMapModel& model, const TabularDataset& ds,
                                  std::uint64_t seed);

/// Re-check a fitted map against its constraints (used by tests and the
/// fit's internal certification).
DistMapCertificate dist_map_certify(const DistMapModel& model,
                                    const TabularDataset& train_discretized);

}  // namespace fairboost
