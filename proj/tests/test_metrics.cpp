// Oracle tests for the group-fairness and accuracy metrics.  Hand oracles
// were computed on paper; the brute-force comparisons recompute each metric
// from first principles inside the test.

#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "fairboost/errors.hpp"
#include "fairboost/metrics.hpp"
#include "fairboost/rng.hpp"

using namespace fairboost;

TEST_CASE("disparate impact hand oracle") {
    // privileged: 4 rows, 3 favorable (rate 0.75); unprivileged: 4 rows,
    // 1 favorable (rate 0.25).  DI = 0.25/0.75 = 1/3.
    std::vector<int> pred{1, 1, 1, 0, 1, 0, 0, 0};
    std::vector<int> grp{1, 1, 1, 1, 0, 0, 0, 0};
    CHECK(disparate_impact(pred, grp) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(normalize_di(1.0 / 3.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("disparate impact edge rules") {
    std::vector<int> grp{1, 1, 0, 0};

    // Both rates zero -> DI = 1, flagged.
    std::vector<std::string> flags;
    std::vector<int> none{0, 0, 0, 0};
    CHECK(disparate_impact(none, grp, {}, &flags) == 1.0);
    CHECK(std::find(flags.begin(), flags.end(), "di_both_rates_zero") != flags.end());

    // Only the privileged rate zero -> +inf, flagged; NDI folds it to 0.
    flags.clear();
    std::vector<int> unpriv_only{0, 0, 1, 0};
    double di = disparate_impact(unpriv_only, grp, {}, &flags);
    CHECK(std::isinf(di));
    CHECK(di > 0);
    CHECK(std::find(flags.begin(), flags.end(), "di_privileged_rate_zero") != flags.end());
    CHECK(normalize_di(di) == 0.0);

    // A group entirely absent is a data error, not a metric value.
    std::vector<int> all_priv{1, 1, 1, 1};
    CHECK_THROWS_AS(disparate_impact(none, all_priv), DataError);

    CHECK_THROWS_AS(normalize_di(-0.5), ConfigError);
}

TEST_CASE("weighted disparate impact") {
    // Weights shift the rates: privileged favorable carries weight 3 of
    // total 4 -> rate 0.75; unprivileged favorable weight 1 of 2 -> 0.5.
    std::vector<int> pred{1, 0, 1, 0};
    std::vector<int> grp{1, 1, 0, 0};
    std::vector<double> w{3, 1, 1, 1};
    CHECK(disparate_impact(pred, grp, w) == doctest::Approx(0.5 / 0.75).epsilon(1e-12));
}

TEST_CASE("normalized DI fixed points and reciprocal symmetry") {
    CHECK(normalize_di(1.0) == 1.0);
    CHECK(normalize_di(0.0) == 0.0);
    CHECK(normalize_di(std::numeric_limits<double>::infinity()) == 0.0);

    Rng rng(20240811);
    for (int it = 0; it < 1000; ++it) {
        double di = std::exp((rng.next_double() - 0.5) * 10.0);  // spans e^-5..e^5
        double a = normalize_di(di);
        double b = normalize_di(1.0 / di);
        CHECK(a == doctest::Approx(b).epsilon(1e-12));
        CHECK(a <= 1.0 + 1e-12);
        CHECK(a >= 0.0);
        CHECK(a == doctest::Approx(std::min(di, 1.0 / di)).epsilon(1e-12));
    }
}

TEST_CASE("F1 matches brute-force confusion counts on random vectors") {
    Rng rng(77);
    for (int it = 0; it < 100; ++it) {
        std::size_t n = 1 + rng.next_below(40);
        std::vector<int> pred(n), truth(n);
        for (std::size_t i = 0; i < n; ++i) {
            pred[i] = static_cast<int>(rng.next_below(2));
            truth[i] = static_cast<int>(rng.next_below(2));
        }
        double tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < n; ++i) {
            tp += (pred[i] == 1 && truth[i] == 1);
            fp += (pred[i] == 1 && truth[i] == 0);
            fn += (pred[i] == 0 && truth[i] == 1);
        }
        std::vector<std::string> flags;
        double got = f1_score(pred, truth, &flags);
        if (tp + fp + fn == 0) {
            CHECK(got == 0.0);
            CHECK(std::find(flags.begin(), flags.end(), "f1_degenerate") != flags.end());
        } else {
            CHECK(got == doctest::Approx(tp / (tp + 0.5 * (fp + fn))).epsilon(1e-12));
        }
    }
}

TEST_CASE("accuracy") {
    std::vector<int> pred{1, 0, 1, 1};
    std::vector<int> truth{1, 0, 0, 1};
    CHECK(accuracy(pred, truth) == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("evaluate fills the full report") {
    // 6 rows: privileged (s=1) rows predict 1,1,0 with truth 1,0,0;
    // unprivileged rows predict 1,0,0 with truth 1,1,0.
    TabularDataset ds;
    ds.n_rows = 6;
    ds.n_cols = 0;
    ds.y = {1, 0, 0, 1, 1, 0};
    ds.s = {1, 1, 1, 0, 0, 0};
    ds.w.assign(6, 1.0);
    std::vector<int> pred{1, 1, 0, 1, 0, 0};

    MetricReport r = evaluate(pred, ds);
    CHECK(r.counts.n_privileged == 3);
    CHECK(r.counts.n_unprivileged == 3);
    CHECK(r.counts.pos_privileged == 2);
    CHECK(r.counts.pos_unprivileged == 1);
    CHECK(r.counts.tp == 2);
    CHECK(r.counts.fp == 1);
    CHECK(r.counts.fn == 1);
    CHECK(r.counts.tn == 2);
    // DI = (1/3)/(2/3) = 0.5; NDI = 0.5; F1 = 2/(2+0.5*2) = 2/3; acc = 4/6.
    CHECK(r.disparate_impact == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.normalized_di == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(r.accuracy == doctest::Approx(4.0 / 6.0).epsilon(1e-12));
    CHECK(r.flags.empty());
}
