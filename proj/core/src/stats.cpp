#include "fairboost/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fairboost/errors.hpp"

// Mann-Whitney U, two-sided, in two regimes.
//
// Both regimes start from midranks: pool the samples, sort, and give every
// member of a tied run the average of the positions it spans.  U for the
// treatment sample is then R1 - n1(n1+1)/2 where R1 is its rank sum, and
// U1 + U2 = n1*n2 always holds.
//
// Exact regime (either side smaller than 8): enumerate every way of
// choosing n1 of the pooled positions, compute U for each choice from the
// midranks, and count choices at least as extreme as the observed U on
// either side (U <= min(U, n1*n2 - U) or U >= the mirrored value).  This is
// the permutation distribution conditional on the observed pattern of ties,
// so the p-value stays valid with ties, where the classical tables do not.
//
// Normal regime: mu = n1*n2/2 and the tie-corrected variance
//   sigma^2 = n1*n2/12 * ((N+1) - sum(t^3 - t) / (N (N-1)))
// over tied runs of length t, with a 0.5 continuity correction toward the
// mean.  If every pooled value is identical sigma is zero; the comparison
// is then vacuous and p is forced to 1 with a "degenerate_ties" flag.
//
// The direction of a significant result is decided by comparing sample
// medians, which reads correctly for both fairness and accuracy metrics
// (larger is better everywhere in this library).

namespace fairboost {

namespace {

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

/// Number of n1-subsets of N, saturating at `cap`.
double subset_count(std::size_t n, std::size_t k, double cap) {
    double c = 1.0;
    for (std::size_t i = 1; i <= k; ++i) {
        c *= static_cast<double>(n - k + i) / static_cast<double>(i);
        if (c > cap) return cap + 1.0;
    }
    return c;
}

}  // namespace

TestResult mann_whitney_u(const SampleSet& treatment, const SampleSet& reference,
                          double alpha) {
    const auto& a = treatment.values;
    const auto& b = reference.values;
    if (a.empty() || b.empty())
        throw ConfigError("samples", "both sample sets must be nonempty");

    std::size_t n1 = a.size(), n2 = b.size(), n = n1 + n2;
    std::vector<double> pooled;
    pooled.reserve(n);
    pooled.insert(pooled.end(), a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());

    // Midranks of the pooled sample and the tie-run lengths.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return pooled[i] < pooled[j]; });
    std::vector<double> rank(n);
    std::vector<std::size_t> tie_runs;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && pooled[order[j]] == pooled[order[i]]) ++j;
        double mid = 0.5 * static_cast<double>(i + 1 + j);  // average of positions i+1..j
        for (std::size_t t = i; t < j; ++t) rank[order[t]] = mid;
        tie_runs.push_back(j - i);
        i = j;
    }

    double r1 = 0;
    for (std::size_t i = 0; i < n1; ++i) r1 += rank[i];
    double u1 = r1 - static_cast<double>(n1) * static_cast<double>(n1 + 1) / 2.0;
    double u_max = static_cast<double>(n1) * static_cast<double>(n2);

    TestResult res;
    res.u_statistic = u1;

    bool all_tied = tie_runs.size() == 1;
    if (all_tied) {
        res.p_value = 1.0;
        res.method = "normal";
        res.flags.push_back("degenerate_ties");
    } else if (std::min(n1, n2) < 8 &&
               subset_count(n, std::min(n1, n2), 5e6) <= 5e6) {
        // Exact enumeration over subsets of the smaller side.
        std::size_t k = std::min(n1, n2);
        std::vector<double> sorted_ranks(rank);
        // Enumerate rank-sum of every k-subset of all n midranks.
        double lo = std::min(u1, u_max - u1);
        double hi = u_max - lo;
        const double eps = 1e-9;
        // U for a subset with rank sum R (as side of size k): R - k(k+1)/2.
        // When the smaller side is the reference, U of the subset mirrors to
        // the treatment side via u1 = u_max - u_subset; extremeness is
        // symmetric so counting on either side is equivalent.
        double base = static_cast<double>(k) * static_cast<double>(k + 1) / 2.0;
        std::size_t count_extreme = 0, count_total = 0;
        std::vector<std::size_t> comb(k);
        std::iota(comb.begin(), comb.end(), 0);
        double rsum = 0;
        for (std::size_t i = 0; i < k; ++i) rsum += sorted_ranks[comb[i]];
        while (true) {
            double u = rsum - base;
            if (u <= lo + eps || u >= hi - eps) ++count_extreme;
            ++count_total;
            // next combination in lexicographic order
            std::size_t i = k;
            while (i > 0) {
                --i;
                if (comb[i] != i + n - k) break;
                if (i == 0) { i = n; break; }
            }
            if (i >= n) break;
            rsum -= sorted_ranks[comb[i]];
            ++comb[i];
            rsum += sorted_ranks[comb[i]];
            for (std::size_t j = i + 1; j < k; ++j) {
                rsum -= sorted_ranks[comb[j]];
                comb[j] = comb[j - 1] + 1;
                rsum += sorted_ranks[comb[j]];
            }
        }
        res.p_value = static_cast<double>(count_extreme) / static_cast<double>(count_total);
        res.method = "exact";
    } else {
        if (std::min(n1, n2) < 8) res.flags.push_back("exact_too_large");
        double mu = u_max / 2.0;
        double tie_term = 0;
        for (std::size_t t : tie_runs)
            tie_term += static_cast<double>(t) * static_cast<double>(t) * static_cast<double>(t) -
                        static_cast<double>(t);
        double nn = static_cast<double>(n);
        double var = u_max / 12.0 * ((nn + 1.0) - tie_term / (nn * (nn - 1.0)));
        double dev = std::abs(u1 - mu);
        double z = std::max(0.0, dev - 0.5) / std::sqrt(var);
        res.p_value = std::min(1.0, 2.0 * normal_sf(z));
        res.method = "normal";
    }

    res.significant = res.p_value < alpha;
    if (res.significant) {
        double ma = median(a), mb = median(b);
        if (ma > mb) res.direction = Direction::Improved;
        else if (ma < mb) res.direction = Direction::Worsened;
    }
    return res;
}

TestResult compare_conditions(const SampleSet& treatment, const SampleSet& reference,
                              double alpha) {
    if (treatment.metric != reference.metric)
        throw ConfigError("metric", "cannot compare '" + treatment.metric + "' against '" +
                                        reference.metric + "'");
    return mann_whitney_u(treatment, reference, alpha);
}

}  // namespace fairboost
