// Microbenchmarks for the pipeline's hot paths: the three debiasing
// transformers, both classifiers, the rank-sum test, and the dataset
// plumbing that runs once per (cell, seed).

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "fairboost/dataset.hpp"
#include "fairboost/models.hpp"
#include "fairboost/preprocess.hpp"
#include "fairboost/rng.hpp"
#include "fairboost/stats.hpp"

namespace {

using namespace fairboost;

/// Synthetic dataset: `d` continuous features (the first carries the label
/// signal), one categorical column with five levels, all four (group,
/// label) cells guaranteed non-empty.
TabularDataset synth(std::size_t n, std::size_t d, std::uint64_t seed) {
    Rng rng(seed);
    TabularDataset ds;
    ds.name = "bench";
    ds.n_rows = n;
    ds.n_cols = d + 1;
    for (std::size_t j = 0; j < d; ++j) {
        ColumnSchema c;
        c.name = "f" + std::to_string(j);
        c.kind = ColumnKind::Continuous;
        ds.schema.push_back(std::move(c));
    }
    ColumnSchema cat;
    cat.name = "cat";
    cat.kind = ColumnKind::Categorical;
    cat.categories = {"a", "b", "c", "d", "e"};
    ds.schema.push_back(std::move(cat));

    for (std::size_t i = 0; i < n; ++i) {
        int yi = i < 4 ? static_cast<int>(i % 2) : static_cast<int>(rng.next_below(2));
        int si = i < 4 ? static_cast<int>(i / 2 % 2) : static_cast<int>(rng.next_below(2));
        ds.y.push_back(yi);
        ds.s.push_back(si);
        ds.w.push_back(1.0);
        ds.x.push_back(yi + rng.next_double());
        for (std::size_t j = 1; j < d; ++j) ds.x.push_back(rng.next_double() * 2 - 1);
        ds.x.push_back(static_cast<double>(rng.next_below(5)));
    }
    ds.validate();
    return ds;
}

void BM_ReweighFitApply(benchmark::State& state) {
    TabularDataset ds = synth(static_cast<std::size_t>(state.range(0)), 8, 1);
    for (auto _ : state) {
        TabularDataset out = reweigh_apply(ds, reweigh_fit(ds));
        benchmark::DoNotOptimize(out.w.data());
    }
}
BENCHMARK(BM_ReweighFitApply)->Arg(1000)->Arg(10000);

void BM_FairRepLossGradient(benchmark::State& state) {
    std::size_t n = static_cast<std::size_t>(state.range(0)), d = 8;
    int k = 10;
    TabularDataset ds = synth(n, d, 2);
    TabularDataset enc = encode_onehot(ds);
    Rng rng(3);
    std::vector<double> proto(static_cast<std::size_t>(k) * enc.n_cols);
    for (auto& v : proto) v = rng.next_double() * 2 - 1;
    std::vector<double> score(static_cast<std::size_t>(k), 0.5);
    FairRepParams params;
    params.k = k;
    for (auto _ : state) {
        FairRepLoss l = fair_rep_loss(enc, proto, score, params);
        benchmark::DoNotOptimize(l.total);
    }
}
BENCHMARK(BM_FairRepLossGradient)->Arg(200)->Arg(1000);

void BM_DistMapFit(benchmark::State& state) {
    TabularDataset ds = synth(static_cast<std::size_t>(state.range(0)), 2, 4);
    TabularDataset disc = discretize(ds, 4);
    DistMapParams params;
    params.epsilon = 0.1;
    params.distortion_cap = 1.0;
    params.max_iter = 300;
    for (auto _ : state) {
        DistMapModel m = dist_map_fit(disc, params);
        benchmark::DoNotOptimize(m.objective);
    }
}
BENCHMARK(BM_DistMapFit)->Arg(1000)->Arg(5000);

void BM_LogisticFit(benchmark::State& state) {
    TabularDataset ds = synth(static_cast<std::size_t>(state.range(0)), 10, 5);
    TabularDataset enc = encode_onehot(ds);
    LogisticParams params;
    for (auto _ : state) {
        LogisticModel m = logistic_fit(enc, params);
        benchmark::DoNotOptimize(m.coef.data());
    }
}
BENCHMARK(BM_LogisticFit)->Arg(2000);

void BM_ForestFit(benchmark::State& state) {
    TabularDataset ds = synth(static_cast<std::size_t>(state.range(0)), 10, 6);
    TabularDataset enc = encode_onehot(ds);
    ForestParams params;
    params.n_trees = 50;
    params.min_leaf_weight = 5;
    for (auto _ : state) {
        ForestModel m = forest_fit(enc, params, 7);
        benchmark::DoNotOptimize(m.trees.data());
    }
}
BENCHMARK(BM_ForestFit)->Arg(2000);

void BM_ForestPredict(benchmark::State& state) {
    TabularDataset train = synth(2000, 10, 8);
    TabularDataset enc = encode_onehot(train);
    ForestParams params;
    params.n_trees = 50;
    params.min_leaf_weight = 5;
    ForestModel m = forest_fit(enc, params, 9);
    TabularDataset test = encode_onehot(synth(static_cast<std::size_t>(state.range(0)), 10, 10));
    for (auto _ : state) {
        Prediction p = predict(m, features_of(test));
        benchmark::DoNotOptimize(p.labels.data());
    }
}
BENCHMARK(BM_ForestPredict)->Arg(2000);

void BM_RankTestExact(benchmark::State& state) {
    Rng rng(11);
    SampleSet a, b;
    a.metric = b.metric = "f1";
    for (int i = 0; i < 7; ++i) {
        a.values.push_back(rng.next_double());
        b.values.push_back(rng.next_double() + 0.1);
    }
    for (auto _ : state) {
        TestResult r = mann_whitney_u(a, b);
        benchmark::DoNotOptimize(r.p_value);
    }
}
BENCHMARK(BM_RankTestExact);

void BM_RankTestApprox(benchmark::State& state) {
    Rng rng(12);
    SampleSet a, b;
    a.metric = b.metric = "f1";
    for (int i = 0; i < 50; ++i) {
        a.values.push_back(rng.next_double());
        b.values.push_back(rng.next_double() + 0.1);
    }
    for (auto _ : state) {
        TestResult r = mann_whitney_u(a, b);
        benchmark::DoNotOptimize(r.p_value);
    }
}
BENCHMARK(BM_RankTestApprox);

void BM_EncodeOnehot(benchmark::State& state) {
    TabularDataset ds = synth(static_cast<std::size_t>(state.range(0)), 8, 13);
    for (auto _ : state) {
        TabularDataset enc = encode_onehot(ds);
        benchmark::DoNotOptimize(enc.x.data());
    }
}
BENCHMARK(BM_EncodeOnehot)->Arg(10000);

void BM_StratifiedSplit(benchmark::State& state) {
    TabularDataset ds = synth(static_cast<std::size_t>(state.range(0)), 8, 14);
    std::uint64_t seed = 0;
    for (auto _ : state) {
        SplitPair p = split(ds, 0.7, ++seed);
        benchmark::DoNotOptimize(p.train.x.data());
    }
}
BENCHMARK(BM_StratifiedSplit)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
