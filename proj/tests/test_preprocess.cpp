// Oracle tests for the three debiasing transformers.  Hand oracles were
// computed on paper; the brute-force comparisons (finite differences, grid
// search over the simplex) are implemented here from the definitions.

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fairboost/errors.hpp"
#include "fairboost/metrics.hpp"
#include "fairboost/preprocess.hpp"
#include "fairboost/rng.hpp"

#include "helpers.hpp"

using namespace fairboost;
using fairboost::test::make_dataset;
using fairboost::test::random_dataset;

// ---------------------------------------------------------------------------
// Reweighing
// ---------------------------------------------------------------------------

TEST_CASE("reweighing hand oracle: 10 rows, counts 4/2/1/3") {
    // privileged (s=1): 4 favorable + 2 unfavorable; unprivileged: 1 + 3.
    std::vector<int> y{1, 1, 1, 1, 0, 0, 1, 0, 0, 0};
    std::vector<int> s{1, 1, 1, 1, 1, 1, 0, 0, 0, 0};
    std::vector<std::vector<double>> rows(10, std::vector<double>{0.0});
    for (std::size_t i = 0; i < 10; ++i) rows[i][0] = static_cast<double>(i);
    TabularDataset ds = make_dataset(rows, y, s);

    ReweighingModel m = reweigh_fit(ds);
    // w(s,y) = n_s * n_y / (n * n_sy) with n_p=6, n_u=4, n_y1=5, n_y0=5.
    CHECK(m.weight[1][1] == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(m.weight[1][0] == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(m.weight[0][1] == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(m.weight[0][0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

    // Applying to the fitting data equalizes the weighted favorable rates
    // at the pooled rate (0.5 here).
    TabularDataset out = reweigh_apply(ds, m);
    double wp = 0, wp1 = 0, wu = 0, wu1 = 0;
    for (std::size_t i = 0; i < 10; ++i) {
        if (out.s[i] == 1) {
            wp += out.w[i];
            wp1 += out.w[i] * out.y[i];
        } else {
            wu += out.w[i];
            wu1 += out.w[i] * out.y[i];
        }
    }
    CHECK(wp1 / wp == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(wu1 / wu == doctest::Approx(0.5).epsilon(1e-15));

    // Single-row lookup: (s=1, y=1) gets weight 0.75.
    CHECK(out.w[0] == doctest::Approx(0.75).epsilon(1e-15));

    // Features, labels, groups untouched.
    CHECK(out.x == ds.x);
    CHECK(out.y == ds.y);
    CHECK(out.s == ds.s);
}

TEST_CASE("reweighing zero-discrimination property on 200 random datasets") {
    Rng rng(123);
    for (int it = 0; it < 200; ++it) {
        TabularDataset ds = random_dataset(rng);
        TabularDataset out = reweigh_apply(ds, reweigh_fit(ds));
        double di = disparate_impact(out.y, out.s, out.w);
        CHECK(std::abs(di - 1.0) <= 1e-9);
    }
}

TEST_CASE("reweighing with independent group and label gives unit weights") {
    // Cells exactly proportional: counts 2/2/2/2.
    std::vector<int> y{1, 1, 0, 0, 1, 1, 0, 0};
    std::vector<int> s{1, 1, 1, 1, 0, 0, 0, 0};
    std::vector<std::vector<double>> rows(8, std::vector<double>{1.0});
    ReweighingModel m = reweigh_fit(make_dataset(rows, y, s));
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) CHECK(m.weight[a][b] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("reweighing rejects an empty cell") {
    // No unprivileged-favorable rows.
    std::vector<int> y{1, 0, 0, 0};
    std::vector<int> s{1, 1, 0, 0};
    std::vector<std::vector<double>> rows(4, std::vector<double>{0.0});
    CHECK_THROWS_AS(reweigh_fit(make_dataset(rows, y, s)), NumericError);
}

TEST_CASE("reweighing respects existing weights") {
    // Doubling a row's weight must act exactly like duplicating the row.
    std::vector<int> y{1, 1, 0, 1, 0, 0};
    std::vector<int> s{1, 1, 1, 0, 0, 0};
    std::vector<std::vector<double>> rows(6, std::vector<double>{0.0});
    TabularDataset weighted = make_dataset(rows, y, s, {2, 1, 1, 1, 1, 1});

    std::vector<int> y2{1, 1, 1, 0, 1, 0, 0};
    std::vector<int> s2{1, 1, 1, 1, 0, 0, 0};
    std::vector<std::vector<double>> rows2(7, std::vector<double>{0.0});
    TabularDataset duplicated = make_dataset(rows2, y2, s2);

    ReweighingModel a = reweigh_fit(weighted);
    ReweighingModel b = reweigh_fit(duplicated);
    for (int g = 0; g < 2; ++g)
        for (int l = 0; l < 2; ++l)
            CHECK(a.weight[g][l] == doctest::Approx(b.weight[g][l]).epsilon(1e-12));
}

// ---------------------------------------------------------------------------
// Fair representations
// ---------------------------------------------------------------------------

namespace {

// Central finite differences of the total loss with respect to every
// parameter, compared against the analytic gradient.
void check_gradient(const TabularDataset& z, std::vector<double> proto,
                    std::vector<double> score, const FairRepParams& params) {
    FairRepLoss g = fair_rep_loss(z, proto, score, params);
    const double h = 1e-6;
    auto loss_at = [&](const std::vector<double>& p, const std::vector<double>& sc) {
        return fair_rep_loss(z, p, sc, params).total;
    };
    double scale_ref = 0;
    for (double d : g.d_prototypes) scale_ref = std::max(scale_ref, std::abs(d));
    for (double d : g.d_label_score) scale_ref = std::max(scale_ref, std::abs(d));

    for (std::size_t i = 0; i < proto.size(); ++i) {
        std::vector<double> up = proto, dn = proto;
        up[i] += h;
        dn[i] -= h;
        double fd = (loss_at(up, score) - loss_at(dn, score)) / (2 * h);
        double denom = std::max({std::abs(fd), std::abs(g.d_prototypes[i]), scale_ref * 1e-3, 1e-8});
        CHECK(std::abs(fd - g.d_prototypes[i]) / denom <= 1e-4);
    }
    for (std::size_t i = 0; i < score.size(); ++i) {
        std::vector<double> up = score, dn = score;
        up[i] += h;
        dn[i] -= h;
        double fd = (loss_at(proto, up) - loss_at(proto, dn)) / (2 * h);
        double denom = std::max({std::abs(fd), std::abs(g.d_label_score[i]), scale_ref * 1e-3, 1e-8});
        CHECK(std::abs(fd - g.d_label_score[i]) / denom <= 1e-4);
    }
}

}  // namespace

TEST_CASE("fair representation gradients match finite differences on 50 instances") {
    Rng rng(31337);
    for (int it = 0; it < 50; ++it) {
        std::size_t n = 6 + rng.next_below(10);
        std::size_t d = 1 + rng.next_below(3);
        int k = 2 + static_cast<int>(rng.next_below(3));

        std::vector<std::vector<double>> rows;
        std::vector<int> y, s;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> r(d);
            for (auto& v : r) v = rng.next_double() * 2 - 1;
            rows.push_back(std::move(r));
            // First four rows pin all four (s, y) cells.
            y.push_back(i < 4 ? static_cast<int>(i % 2) : static_cast<int>(rng.next_below(2)));
            s.push_back(i < 4 ? static_cast<int>(i / 2 % 2) : static_cast<int>(rng.next_below(2)));
        }
        TabularDataset z = make_dataset(rows, y, s);

        FairRepParams params;
        params.k = k;
        params.a_x = 0.05 + rng.next_double();
        params.a_y = 0.05 + rng.next_double();
        params.a_z = 0.05 + rng.next_double() * 10;

        std::vector<double> proto(static_cast<std::size_t>(k) * d);
        for (auto& v : proto) v = rng.next_double() * 2 - 1;
        std::vector<double> score(static_cast<std::size_t>(k));
        for (auto& v : score) v = 0.05 + 0.9 * rng.next_double();

        check_gradient(z, proto, score, params);
    }
}

TEST_CASE("fair representation fit is deterministic with non-increasing loss") {
    Rng rng(4242);
    TabularDataset ds = random_dataset(rng, 40, 80);
    FairRepParams params;
    params.k = 4;
    params.max_iter = 120;

    FairRepModel a = fair_rep_fit(ds, params, 11);
    FairRepModel b = fair_rep_fit(ds, params, 11);
    CHECK(a.prototypes == b.prototypes);
    CHECK(a.label_score == b.label_score);
    CHECK(a.loss_trace == b.loss_trace);

    REQUIRE(!a.loss_trace.empty());
    for (std::size_t i = 1; i < a.loss_trace.size(); ++i)
        CHECK(a.loss_trace[i] <= a.loss_trace[i - 1] + 1e-12);

    for (double sc : a.label_score) {
        CHECK(sc >= 0.0);
        CHECK(sc <= 1.0);
    }
}

TEST_CASE("a row exactly at a well-separated prototype reconstructs to it") {
    // Two far-apart prototypes; memberships at a prototype are ~one-hot.
    std::vector<double> proto{-10.0, 10.0};  // k=2, d=1
    std::vector<double> score{0.2, 0.8};
    FairRepModel m;
    m.params.k = 2;
    m.prototypes = proto;
    m.label_score = score;
    m.center = {0.0};
    m.scale = {1.0};

    TabularDataset ds = make_dataset({{-10.0}, {10.0}}, {0, 1}, {0, 1});
    TabularDataset out = fair_rep_transform(m, ds);
    CHECK(std::abs(out.at(0, 0) - (-10.0)) <= 1e-3);
    CHECK(std::abs(out.at(1, 0) - 10.0) <= 1e-3);
    CHECK(out.y[0] == 0);  // score 0.2 < 0.5
    CHECK(out.y[1] == 1);  // score 0.8 >= 0.5
    CHECK(out.s == ds.s);
    CHECK(out.w == ds.w);
}

TEST_CASE("fair representation rejects bad hyperparameters") {
    Rng rng(7);
    TabularDataset ds = random_dataset(rng, 20, 30);
    FairRepParams params;
    params.k = 0;
    CHECK_THROWS_AS(fair_rep_fit(ds, params, 1), ConfigError);
    params.k = static_cast<int>(ds.n_rows) + 1;
    CHECK_THROWS_AS(fair_rep_fit(ds, params, 1), ConfigError);
    params.k = 2;
    params.a_x = -1.0;
    CHECK_THROWS_AS(fair_rep_fit(ds, params, 1), ConfigError);
}

// ---------------------------------------------------------------------------
// Distribution optimizer
// ---------------------------------------------------------------------------

namespace {

// Two-cell training set (one binary feature cell, binary label): group 1 is
// favored, group 0 is not.  Counts chosen so the identity map violates any
// tight epsilon.
TabularDataset two_cell_dataset() {
    // feature cell value in {0, 1}, 40 rows.
    std::vector<std::vector<double>> rows;
    std::vector<int> y, s;
    auto add = [&](int cell, int label, int group, int copies) {
        for (int i = 0; i < copies; ++i) {
            rows.push_back({static_cast<double>(cell)});
            y.push_back(label);
            s.push_back(group);
        }
    };
    // privileged: favorable-heavy; unprivileged: unfavorable-heavy.
    add(0, 1, 1, 8);
    add(1, 1, 1, 6);
    add(0, 0, 1, 3);
    add(1, 0, 1, 3);
    add(0, 1, 0, 3);
    add(1, 1, 0, 2);
    add(0, 0, 0, 8);
    add(1, 0, 0, 7);

    TabularDataset ds = make_dataset(rows, y, s);
    ds.schema[0].kind = ColumnKind::Categorical;
    ds.schema[0].categories = {"a", "b"};
    return ds;
}

}  // namespace

TEST_CASE("every fitted distribution map passes its certificate") {
    Rng rng(555);
    for (int it = 0; it < 10; ++it) {
        TabularDataset ds = random_dataset(rng, 60, 200);
        // Make the single feature categorical with a handful of cells.
        TabularDataset disc = discretize(ds, 3);

        DistMapParams params;
        params.epsilon = 0.1;
        params.distortion_cap = 1.0;
        params.max_iter = 300;
        DistMapModel m = dist_map_fit(disc, params);

        CHECK(m.certificate.feasible);
        CHECK(m.certificate.max_row_error <= 1e-6);
        CHECK(m.certificate.max_distortion_excess <= 1e-4);
        CHECK(m.certificate.max_rate_deviation <= params.epsilon + 1e-4);

        DistMapCertificate again = dist_map_certify(m, disc);
        CHECK(again.feasible);
    }
}

TEST_CASE("two-cell instance matches the brute-force grid optimum") {
    TabularDataset ds = two_cell_dataset();
    DistMapParams params;
    params.epsilon = 0.05;
    params.distortion_cap = 1.0;
    params.max_iter = 2000;
    DistMapModel m = dist_map_fit(ds, params);
    REQUIRE(m.certificate.feasible);
    REQUIRE(m.n_cells == 2);

    // Brute force over achievable group rates.  For a fixed target rate r'
    // the cheapest map moves exactly |r' - r| label mass within a feature
    // cell (total-variation cost |r' - r| per group; crossing cells costs
    // the same in the objective and nothing less), so the program reduces
    // to min |r0'-r0| + |r1'-r1| over rate pairs meeting the epsilon band.
    double r[2], mass[2] = {0, 0};
    r[0] = r[1] = 0;
    for (std::size_t i = 0; i < ds.n_rows; ++i) {
        r[ds.s[i]] += ds.y[i];
        mass[ds.s[i]] += 1.0;
    }
    double pi0 = mass[0] / (mass[0] + mass[1]), pi1 = mass[1] / (mass[0] + mass[1]);
    r[0] /= mass[0];
    r[1] /= mass[1];

    double best = 1e300;
    const int grid = 4000;
    for (int i0 = 0; i0 <= grid; ++i0) {
        double t0 = static_cast<double>(i0) / grid;
        for (int i1 = 0; i1 <= grid; ++i1) {
            double t1 = static_cast<double>(i1) / grid;
            double pooled = pi0 * t0 + pi1 * t1;
            if (pooled <= 0) continue;
            if (std::abs(t0 / pooled - 1) > params.epsilon ||
                std::abs(t1 / pooled - 1) > params.epsilon)
                continue;
            best = std::min(best, std::abs(t0 - r[0]) + std::abs(t1 - r[1]));
        }
    }

    CHECK(m.objective <= best + 1e-3);
    CHECK(m.objective >= best - 1e-3);
}

TEST_CASE("epsilon zero with free distortion equalizes rates") {
    TabularDataset ds = two_cell_dataset();
    DistMapParams params;
    params.epsilon = 0.0;
    params.distortion_cap = 10.0;
    params.max_iter = 2000;
    DistMapModel m = dist_map_fit(ds, params);
    REQUIRE(m.certificate.feasible);

    // Expected favorable rate per group under the fitted map must match
    // across groups within the certification tolerance.
    double rate[2], mass[2] = {0, 0};
    for (int g = 0; g < 2; ++g) rate[g] = 0;
    for (std::size_t i = 0; i < ds.n_rows; ++i) {
        int cell = static_cast<int>(ds.at(i, 0));
        std::size_t row =
            (static_cast<std::size_t>(ds.s[i]) * 2 + static_cast<std::size_t>(ds.y[i])) * 2 +
            static_cast<std::size_t>(cell);
        double fav = m.map[row * 4 + 2] + m.map[row * 4 + 3];  // label-1 columns
        rate[ds.s[i]] += fav;
        mass[ds.s[i]] += 1.0;
    }
    CHECK(std::abs(rate[0] / mass[0] - rate[1] / mass[1]) <= 2e-4);
}

TEST_CASE("identity map is returned when already fair") {
    // Group-balanced data: identity is feasible with objective 0.
    std::vector<std::vector<double>> rows;
    std::vector<int> y, s;
    for (int g = 0; g < 2; ++g)
        for (int l = 0; l < 2; ++l)
            for (int c = 0; c < 2; ++c)
                for (int rep = 0; rep < 5; ++rep) {
                    rows.push_back({static_cast<double>(c)});
                    y.push_back(l);
                    s.push_back(g);
                }
    TabularDataset ds = make_dataset(rows, y, s);
    ds.schema[0].kind = ColumnKind::Categorical;
    ds.schema[0].categories = {"a", "b"};

    DistMapParams params;
    params.epsilon = 0.05;
    params.distortion_cap = 0.5;
    DistMapModel m = dist_map_fit(ds, params);
    CHECK(m.certificate.feasible);
    CHECK(m.objective <= 1e-9);
}

TEST_CASE("per-row transform streams depend only on seed and position") {
    Rng rng(808);
    TabularDataset ds = random_dataset(rng, 50, 120);
    TabularDataset disc = discretize(ds, 3);
    DistMapParams params;
    params.epsilon = 0.2;
    params.distortion_cap = 1.0;
    DistMapModel m = dist_map_fit(disc, params);

    TabularDataset full = dist_map_transform(m, disc, 99);
    TabularDataset again = dist_map_transform(m, disc, 99);
    CHECK(full.x == again.x);
    CHECK(full.y == again.y);

    // Transforming only a prefix leaves those rows' outcomes unchanged:
    // each row's draw stream derives from (seed, row position) alone.
    std::vector<std::size_t> prefix{0, 1, 2, 3};
    TabularDataset part = dist_map_transform(m, disc.take_rows(prefix), 99);
    REQUIRE(part.n_rows == prefix.size());
    for (std::size_t k = 0; k < prefix.size(); ++k) {
        for (std::size_t j = 0; j < full.n_cols; ++j)
            CHECK(part.at(k, j) == full.at(k, j));
        CHECK(part.y[k] == full.y[k]);
    }

    // A different seed generally moves some row somewhere else.
    TabularDataset other = dist_map_transform(m, disc, 100);
    CHECK((other.x != full.x || other.y != full.y));
}

TEST_CASE("domain size limit is enforced") {
    Rng rng(9);
    TabularDataset ds = random_dataset(rng, 30, 60);
    TabularDataset disc = discretize(ds, 3);
    DistMapParams params;
    params.domain_limit = 2;  // 3 bins * ... exceeds immediately
    CHECK_THROWS_AS(dist_map_fit(disc, params), ConfigError);
}

TEST_CASE("infeasible constraints raise a numeric error naming the constraint") {
    TabularDataset ds = two_cell_dataset();
    DistMapParams params;
    params.epsilon = 0.0;
    params.distortion_cap = 0.0;  // no change allowed, but rates differ
    params.max_iter = 50;
    try {
        dist_map_fit(ds, params);
        FAIL("expected NumericError");
    } catch (const NumericError& e) {
        CHECK(std::string(e.code()) == "infeasible");
        CHECK(std::string(e.what()).find("rate") != std::string::npos);
    }
}
