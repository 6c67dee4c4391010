#pragma once

#include <string>
#include <vector>

namespace fairboost {

/// A metric's values across seed replicates under one condition.
struct SampleSet {
    std::vector<double> values;
    std::string metric;     ///< e.g. "normalized_di", "f1"
    std::string condition;  ///< e.g. "baseline", "rw+logistic"
};

enum class Direction { None, Improved, Worsened };

/// Two-sided Mann-Whitney U comparison of two sample sets.
struct TestResult {
    double u_statistic = 0;  ///< U of the first (treatment) sample
    double p_value = 1;
    bool significant = false;
    Direction direction = Direction::None;
    /// "exact" (full permutation enumeration) or "normal" (tie-corrected
    /// approximation with continuity correction).
    std::string method;
    /// Set when every pooled value is identical (p forced to 1) or when the
    /// exact path was too large and fell back to the approximation.
    std::vector<std::string> flags;
};

/// Rank-sum test that the two samples come from the same distribution.
/// Ties get midranks.  The exact permutation distribution is enumerated
/// when either side has fewer than 8 values (unless the subset count is
/// astronomically large); otherwise the normal approximation with tie
/// correction and continuity correction is used.  `significant` is
/// p < alpha; `direction` compares medians (treatment vs reference) and is
/// None when not significant.
TestResult mann_whitney_u(const SampleSet& treatment, const SampleSet& reference,
                          double alpha = 0.05);

/// Convenience wrapper that also checks both sets describe the same metric.
/// Direction semantics: for any metric where larger is better (all metrics
/// here), Improved means the treatment is significantly larger.
TestResult compare_conditions(const SampleSet& treatment, const SampleSet& reference,
                              double alpha = 0.05);

}  // namespace fairboost
