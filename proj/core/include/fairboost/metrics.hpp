#pragma once

#include <span>
#include <string>
#include <vector>

#include "fairboost/dataset.hpp"

namespace fairboost {

/// Per-group counts behind a metric report.  Stored as doubles so weighted
/// evaluation works with the same structure; for unweighted data they are
/// whole numbers.
struct GroupOutcomeCounts {
    double n_privileged = 0, n_unprivileged = 0;
    double pos_privileged = 0, pos_unprivileged = 0;
    double tp = 0, fp = 0, fn = 0, tn = 0;
};

/// One model's predictions evaluated against a dataset.
struct MetricReport {
    double disparate_impact = 0;   ///< +inf when only the unprivileged rate is 0
    double normalized_di = 0;      ///< min(DI, 1/DI); 0 when DI is infinite
    double f1 = 0;
    double accuracy = 0;
    GroupOutcomeCounts counts;
    /// Edge conditions hit while computing the report, e.g.
    /// "di_both_rates_zero", "di_privileged_rate_zero", "f1_degenerate".
    std::vector<std::string> flags;
};

/// Ratio of favorable-outcome rates, unprivileged over privileged, computed
/// from predicted labels.  Optional weights make both rates weighted.
/// Edge rules: both rates zero -> 1 (flagged); only the privileged rate
/// zero -> +inf (flagged).  Throws DataError if either group is absent.
double disparate_impact(std::span<const int> predictions, std::span<const int> groups,
                        std::span<const double> weights = {},
                        std::vector<std::string>* flags = nullptr);

/// Fold DI into [0, 1] where 1 is parity: DI if DI <= 1, else 1/DI, and 0
/// for an infinite DI.  Throws ConfigError on negative input.
double normalize_di(double di);

/// F1 for the favorable class: TP / (TP + (FP + FN) / 2).  Returns 0 and
/// flags "f1_degenerate" when no positives exist in either predictions or
/// truth.
double f1_score(std::span<const int> predictions, std::span<const int> truth,
                std::vector<std::string>* flags = nullptr);

double accuracy(std::span<const int> predictions, std::span<const int> truth);

/// Full evaluation of predicted labels against a dataset's labels and
/// groups (unweighted; test sets carry unit weights).
MetricReport evaluate(std::span<const int> predictions, const TabularDataset& test);

}  // namespace fairboost
