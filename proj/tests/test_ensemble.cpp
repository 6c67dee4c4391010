// Vote-rule oracles and determinism checks for the ensemble layer.

#include <doctest.h>

#include <algorithm>
#include <vector>

#include "fairboost/ensemble.hpp"
#include "fairboost/errors.hpp"
#include "fairboost/rng.hpp"

#include "helpers.hpp"

using namespace fairboost;
using fairboost::test::random_dataset;

namespace {

Prediction pred_of(std::vector<int> labels, std::vector<double> proba) {
    Prediction p;
    p.labels = std::move(labels);
    p.proba = std::move(proba);
    return p;
}

bool same_labels(const Prediction& a, const Prediction& b) {
    return a.labels == b.labels;
}

}  // namespace

TEST_CASE("majority vote equals the brute-force per-row mode") {
    Rng rng(606);
    for (int it = 0; it < 50; ++it) {
        std::size_t n = 1 + rng.next_below(12);
        std::size_t members = 3 + 2 * rng.next_below(2);  // 3 or 5, odd
        std::vector<Prediction> preds(members);
        for (auto& p : preds) {
            p.labels.resize(n);
            p.proba.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                p.labels[i] = static_cast<int>(rng.next_below(2));
                p.proba[i] = p.labels[i] == 1 ? 0.5 + 0.5 * rng.next_double()
                                              : 0.5 * rng.next_double();
            }
        }
        long ties = 0;
        Prediction got = majority_vote(preds, &ties);
        CHECK(ties == 0);  // odd member count never ties
        for (std::size_t i = 0; i < n; ++i) {
            int ones = 0;
            double mean = 0;
            for (const auto& p : preds) {
                ones += p.labels[i];
                mean += p.proba[i];
            }
            mean /= static_cast<double>(members);
            int want = 2 * ones > static_cast<int>(members) ? 1 : 0;
            CHECK(got.labels[i] == want);
            CHECK(got.proba[i] == doctest::Approx(mean).epsilon(1e-12));
        }
    }
}

TEST_CASE("vote oracles from the contract") {
    // (1,1,0) -> 1 and (0,0,0) -> 0.
    Prediction a = pred_of({1}, {0.9}), b = pred_of({1}, {0.8}), c = pred_of({0}, {0.1});
    CHECK(majority_vote({a, b, c}).labels[0] == 1);
    Prediction z = pred_of({0}, {0.2});
    CHECK(majority_vote({z, z, z}).labels[0] == 0);

    // Two members voting (1,0) with probabilities (0.9, 0.2): mean 0.55 -> 1.
    long ties = 0;
    Prediction tied = majority_vote({pred_of({1}, {0.9}), pred_of({0}, {0.2})}, &ties);
    CHECK(tied.labels[0] == 1);
    CHECK(ties == 1);

    // Mean below 0.5 resolves to 0.
    ties = 0;
    Prediction tied0 = majority_vote({pred_of({1}, {0.6}), pred_of({0}, {0.1})}, &ties);
    CHECK(tied0.labels[0] == 0);
    CHECK(ties == 1);
}

TEST_CASE("vote is invariant to member order") {
    Rng rng(17);
    std::size_t n = 20;
    std::vector<Prediction> preds(4);
    for (auto& p : preds) {
        p.labels.resize(n);
        p.proba.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            p.labels[i] = static_cast<int>(rng.next_below(2));
            p.proba[i] = rng.next_double();
        }
    }
    Prediction base = majority_vote(preds);
    std::vector<Prediction> shuffled{preds[2], preds[0], preds[3], preds[1]};
    Prediction perm = majority_vote(shuffled);
    CHECK(same_labels(base, perm));
}

TEST_CASE("majority vote rejects mismatched lengths") {
    CHECK_THROWS_AS(majority_vote({pred_of({1, 0}, {0.9, 0.1}), pred_of({1}, {0.9})}),
                    DataError);
}

TEST_CASE("fold assignment is balanced and seeded") {
    std::vector<int> folds = fold_assignment(23, 5, 99);
    REQUIRE(folds.size() == 23);
    std::vector<int> count(5, 0);
    for (int f : folds) {
        REQUIRE(f >= 0);
        REQUIRE(f < 5);
        ++count[static_cast<std::size_t>(f)];
    }
    // 23 = 4*5 + 3: three folds of 5, two of 4.
    CHECK(*std::min_element(count.begin(), count.end()) == 4);
    CHECK(*std::max_element(count.begin(), count.end()) == 5);

    CHECK(fold_assignment(23, 5, 99) == folds);
    CHECK(fold_assignment(23, 5, 100) != folds);
}

TEST_CASE("ensembles are deterministic and cache-insensitive") {
    Rng rng(2024);
    TabularDataset ds = random_dataset(rng, 80, 150);

    ClassifierSpec clf;
    clf.kind = ClassifierKind::Forest;
    clf.forest.n_trees = 15;

    PreprocessParams params;
    params.map_columns = {};  // distribution optimizer unused here

    EnsembleSpec spec;
    spec.members = {PreprocessKind::Reweighing, PreprocessKind::None};

    for (CombineRule rule : {CombineRule::Majority, CombineRule::Bagging, CombineRule::Stacking}) {
        spec.rule = rule;
        CAPTURE(to_string(rule));

        EnsembleModel a = ensemble_fit(ds, spec, clf, params, 31);
        EnsembleModel b = ensemble_fit(ds, spec, clf, params, 31);
        MemberCache cache;
        EnsembleModel c = ensemble_fit(ds, spec, clf, params, 31, &cache);

        Prediction pa = ensemble_predict(a, ds);
        Prediction pb = ensemble_predict(b, ds);
        Prediction pc = ensemble_predict(c, ds);
        CHECK(pa.labels == pb.labels);
        CHECK(pa.proba == pb.proba);
        CHECK(pa.labels == pc.labels);
        CHECK(pa.proba == pc.proba);

        if (rule == CombineRule::Stacking) CHECK(a.meta.has_value());
    }
}

TEST_CASE("two identical members vote like the single member") {
    Rng rng(555);
    TabularDataset ds = random_dataset(rng, 60, 100);

    ClassifierSpec clf;  // logistic default
    PreprocessParams params;

    EnsembleSpec single;
    single.members = {PreprocessKind::Reweighing};
    EnsembleSpec twin;
    twin.members = {PreprocessKind::Reweighing, PreprocessKind::Reweighing};

    EnsembleModel one = ensemble_fit(ds, single, clf, params, 8);
    EnsembleModel two = ensemble_fit(ds, twin, clf, params, 8);
    long ties = 0;
    Prediction po = ensemble_predict(one, ds);
    Prediction pt = ensemble_predict(two, ds, &ties);
    CHECK(po.labels == pt.labels);
    CHECK(ties == 0);  // identical members never disagree
}

TEST_CASE("member fits are composition independent") {
    Rng rng(99);
    TabularDataset ds = random_dataset(rng, 80, 120);

    ClassifierSpec clf;
    clf.kind = ClassifierKind::Forest;
    clf.forest.n_trees = 9;
    PreprocessParams params;

    // The same member inside different ensembles produces the same
    // predictions: its fit derives only from (cell seed, stage, kinds).
    EnsembleSpec duo;
    duo.members = {PreprocessKind::Reweighing, PreprocessKind::None};
    EnsembleSpec solo;
    solo.members = {PreprocessKind::Reweighing};

    EnsembleModel in_duo = ensemble_fit(ds, duo, clf, params, 63);
    EnsembleModel alone = ensemble_fit(ds, solo, clf, params, 63);

    Prediction duo_member = member_predict(in_duo.members[0], ds);
    Prediction solo_member = member_predict(alone.members[0], ds);
    CHECK(duo_member.labels == solo_member.labels);
    CHECK(duo_member.proba == solo_member.proba);
}

TEST_CASE("ensemble spec validation") {
    Rng rng(3);
    TabularDataset ds = random_dataset(rng, 30, 50);
    ClassifierSpec clf;
    PreprocessParams params;
    EnsembleSpec empty;
    CHECK_THROWS_AS(ensemble_fit(ds, empty, clf, params, 1), ConfigError);
}
