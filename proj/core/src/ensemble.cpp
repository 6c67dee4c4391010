#include "fairboost/ensemble.hpp"

#include <algorithm>
#include <numeric>

#include "fairboost/rng.hpp"

namespace fairboost {

std::string to_string(PreprocessKind k) {
    switch (k) {
        case PreprocessKind::None: return "none";
        case PreprocessKind::Reweighing: return "rw";
        case PreprocessKind::FairRep: return "lfr";
        case PreprocessKind::DistMap: return "op";
    }
    return "?";
}

std::string to_string(ClassifierKind k) {
    return k == ClassifierKind::Logistic ? "logistic" : "forest";
}

std::string to_string(CombineRule r) {
    switch (r) {
        case CombineRule::Majority: return "majority";
        case CombineRule::Bagging: return "bagging";
        case CombineRule::Stacking: return "stacking";
    }
    return "?";
}

namespace {

void require_both_classes(const TabularDataset& ds, PreprocessKind kind) {
    bool pos = false, neg = false;
    for (int yi : ds.y) (yi == 1 ? pos : neg) = true;
    if (!pos || !neg)
        throw NumericError("label_collapse", "the " + to_string(kind) +
                                                 " transform left a single class in the training labels");
}

std::vector<ColumnKind> kinds_of(const TabularDataset& ds) {
    std::vector<ColumnKind> kinds;
    kinds.reserve(ds.schema.size());
    for (const auto& c : ds.schema) kinds.push_back(c.kind);
    return kinds;
}

void fit_classifier(FittedMember& member, const TabularDataset& data,
                    const ClassifierSpec& clf, std::uint64_t model_seed) {
    member.classifier = clf.kind;
    if (clf.kind == ClassifierKind::Logistic) {
        auto kinds = kinds_of(data);
        member.logistic = logistic_fit(features_of(data), data.y, data.w, clf.logistic, kinds);
    } else {
        member.forest = forest_fit(features_of(data), data.y, data.w, clf.forest, model_seed);
    }
}

}  // namespace

PreprocessedTrain preprocess_train(const TabularDataset& train, PreprocessKind kind,
                                   const PreprocessParams& params, std::uint64_t cell_seed) {
    std::uint64_t pre_seed =
        derive_seed(cell_seed, stage::kPreprocess, static_cast<std::uint64_t>(kind));
    std::uint64_t transform_seed =
        derive_seed(cell_seed, stage::kTransform, static_cast<std::uint64_t>(kind));

    PreprocessedTrain out;
    out.kind = kind;
    switch (kind) {
        case PreprocessKind::None:
            out.data = encode_onehot(train);
            break;
        case PreprocessKind::Reweighing: {
            out.reweigh = reweigh_fit(train);
            out.data = encode_onehot(reweigh_apply(train, *out.reweigh));
            break;
        }
        case PreprocessKind::FairRep: {
            TabularDataset enc = encode_onehot(train);
            out.fair_rep = fair_rep_fit(enc, params.fair_rep, pre_seed);
            out.data = fair_rep_transform(*out.fair_rep, enc);
            require_both_classes(out.data, kind);
            break;
        }
        case PreprocessKind::DistMap: {
            if (params.map_columns.empty())
                throw ConfigError("map_columns",
                                  "the distribution optimizer needs a column subset");
            out.map_columns = params.map_columns;
            TabularDataset view = discretize(train.take_columns(params.map_columns),
                                             params.map_bins);
            out.dist_map = dist_map_fit(view, params.dist_map);
            TabularDataset mapped = dist_map_transform(*out.dist_map, view, transform_seed);
            require_both_classes(mapped, kind);

            // Write the mapped cells and labels back into a copy of the
            // training set, then encode as usual.
            TabularDataset merged = train;
            for (std::size_t k = 0; k < params.map_columns.size(); ++k) {
                std::size_t j = merged.column_index(params.map_columns[k]);
                for (std::size_t i = 0; i < merged.n_rows; ++i)
                    merged.x[i * merged.n_cols + j] = mapped.at(i, k);
                merged.schema[j] = mapped.schema[k];
            }
            merged.y = mapped.y;
            out.data = encode_onehot(merged);
            break;
        }
    }
    return out;
}

Prediction member_predict(const FittedMember& member, const TabularDataset& raw) {
    TabularDataset enc = encode_onehot(raw);
    const TabularDataset* input = &enc;
    TabularDataset transformed;
    if (member.fair_rep) {
        transformed = fair_rep_transform(*member.fair_rep, enc);
        input = &transformed;
    }
    if (member.classifier == ClassifierKind::Logistic)
        return predict(*member.logistic, features_of(*input));
    return predict(*member.forest, features_of(*input));
}

FittedMember fit_member(const TabularDataset& train, PreprocessKind pre,
                        const ClassifierSpec& clf, const PreprocessParams& params,
                        std::uint64_t cell_seed, MemberCache* cache, const std::string& scope) {
    std::string member_key =
        scope + "/" + to_string(pre) + "/" + to_string(clf.kind);
    if (cache) {
        auto it = cache->members.find(member_key);
        if (it != cache->members.end()) return *it->second;
    }

    std::shared_ptr<const PreprocessedTrain> prep;
    std::string prep_key = scope + "/" + to_string(pre);
    if (cache) {
        auto it = cache->preprocessed.find(prep_key);
        if (it != cache->preprocessed.end()) prep = it->second;
    }
    if (!prep) {
        prep = std::make_shared<PreprocessedTrain>(
            preprocess_train(train, pre, params, cell_seed));
        if (cache) cache->preprocessed.emplace(prep_key, prep);
    }

    FittedMember member;
    member.preprocess = pre;
    member.reweigh = prep->reweigh;
    member.fair_rep = prep->fair_rep;
    member.dist_map = prep->dist_map;
    member.map_columns = prep->map_columns;
    std::uint64_t model_seed = derive_seed(cell_seed, stage::kModel,
                                           static_cast<std::uint64_t>(pre),
                                           static_cast<std::uint64_t>(clf.kind));
    fit_classifier(member, prep->data, clf, model_seed);

    if (cache) cache->members.emplace(member_key, std::make_shared<FittedMember>(member));
    return member;
}

std::vector<int> fold_assignment(std::size_t n, int k, std::uint64_t seed) {
    if (k < 2 || static_cast<std::size_t>(k) > n)
        throw ConfigError("folds", "fold count must lie in [2, n]");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(order);
    std::vector<int> fold(n);
    for (std::size_t i = 0; i < n; ++i)
        fold[order[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
    return fold;
}

EnsembleModel ensemble_fit(const TabularDataset& train, const EnsembleSpec& spec,
                           const ClassifierSpec& clf, const PreprocessParams& params,
                           std::uint64_t seed, MemberCache* cache) {
    if (spec.members.empty()) throw ConfigError("members", "an ensemble needs members");

    EnsembleModel model;
    model.rule = spec.rule;
    model.seed = seed;

    MemberCache local;
    if (!cache) cache = &local;

    if (spec.rule == CombineRule::Stacking) {
        const int kFolds = 5;
        std::vector<int> fold = fold_assignment(train.n_rows, kFolds,
                                                derive_seed(seed, stage::kFolds));
        std::vector<std::vector<double>> oof(spec.members.size(),
                                             std::vector<double>(train.n_rows, 0.0));
        for (int f = 0; f < kFolds; ++f) {
            std::vector<std::size_t> in_rows, out_rows;
            for (std::size_t i = 0; i < train.n_rows; ++i)
                (fold[i] == f ? out_rows : in_rows).push_back(i);
            TabularDataset sub = train.take_rows(in_rows);
            TabularDataset held = train.take_rows(out_rows);
            std::uint64_t fold_seed =
                derive_seed(seed, stage::kFolds, static_cast<std::uint64_t>(f));
            std::string scope = "fold" + std::to_string(f);
            for (std::size_t m = 0; m < spec.members.size(); ++m) {
                FittedMember fm =
                    fit_member(sub, spec.members[m], clf, params, fold_seed, cache, scope);
                Prediction p = member_predict(fm, held);
                for (std::size_t r = 0; r < out_rows.size(); ++r)
                    oof[m][out_rows[r]] = p.proba[r];
            }
        }
        std::vector<double> meta_x(train.n_rows * spec.members.size());
        for (std::size_t i = 0; i < train.n_rows; ++i)
            for (std::size_t m = 0; m < spec.members.size(); ++m)
                meta_x[i * spec.members.size() + m] = oof[m][i];
        LogisticParams meta_params;
        meta_params.l2_lambda = 0.0;
        model.meta = logistic_fit(
            MatrixView{meta_x.data(), train.n_rows, spec.members.size()}, train.y, train.w,
            meta_params, {});
    }

    for (std::size_t m = 0; m < spec.members.size(); ++m) {
        PreprocessKind pre = spec.members[m];
        if (spec.rule == CombineRule::Bagging) {
            // Refit the classifier on a weighted bootstrap of the
            // preprocessor's output; the preprocessor itself is shared.
            std::string prep_key = "full/" + to_string(pre);
            std::shared_ptr<const PreprocessedTrain> prep;
            auto it = cache->preprocessed.find(prep_key);
            if (it != cache->preprocessed.end()) prep = it->second;
            if (!prep) {
                prep = std::make_shared<PreprocessedTrain>(
                    preprocess_train(train, pre, params, seed));
                cache->preprocessed.emplace(prep_key, prep);
            }
            std::uint64_t member_base =
                derive_seed(seed + m, stage::kBagging, static_cast<std::uint64_t>(pre));
            Rng rng(member_base);
            std::vector<double> cumulative(prep->data.n_rows);
            double acc = 0;
            for (std::size_t i = 0; i < prep->data.n_rows; ++i) {
                acc += prep->data.w[i];
                cumulative[i] = acc;
            }
            std::vector<std::size_t> draws(prep->data.n_rows);
            for (auto& didx : draws) didx = rng.next_weighted(cumulative);
            TabularDataset boot = prep->data.take_rows(draws);
            // The bootstrap realizes the weights; drawn rows count once.
            std::fill(boot.w.begin(), boot.w.end(), 1.0);
            require_both_classes(boot, pre);

            FittedMember member;
            member.preprocess = pre;
            member.reweigh = prep->reweigh;
            member.fair_rep = prep->fair_rep;
            member.dist_map = prep->dist_map;
            member.map_columns = prep->map_columns;
            fit_classifier(member, boot, clf, derive_seed(member_base, stage::kModel));
            model.members.push_back(std::move(member));
        } else {
            model.members.push_back(fit_member(train, pre, clf, params, seed, cache, "full"));
        }
    }
    return model;
}

Prediction majority_vote(const std::vector<Prediction>& member_predictions, long* ties) {
    if (member_predictions.empty())
        throw ConfigError("members", "majority vote needs at least one prediction set");
    std::size_t n = member_predictions.front().labels.size();
    for (const auto& p : member_predictions)
        if (p.labels.size() != n || p.proba.size() != n)
            throw DataError("shape", "member predictions disagree in length");

    Prediction out;
    out.labels.resize(n);
    out.proba.resize(n);
    auto members = static_cast<double>(member_predictions.size());
    for (std::size_t i = 0; i < n; ++i) {
        int pos = 0;
        double mean = 0;
        for (const auto& p : member_predictions) {
            pos += p.labels[i];
            mean += p.proba[i];
        }
        mean /= members;
        out.proba[i] = mean;
        int neg = static_cast<int>(members) - pos;
        if (pos > neg) {
            out.labels[i] = 1;
        } else if (pos < neg) {
            out.labels[i] = 0;
        } else {
            out.labels[i] = mean >= 0.5 ? 1 : 0;
            if (ties) ++*ties;
        }
    }
    return out;
}

Prediction ensemble_predict(const EnsembleModel& model, const TabularDataset& raw,
                            long* majority_ties) {
    std::vector<Prediction> preds;
    preds.reserve(model.members.size());
    for (const auto& member : model.members) preds.push_back(member_predict(member, raw));

    if (model.rule == CombineRule::Stacking) {
        std::vector<double> meta_x(raw.n_rows * preds.size());
        for (std::size_t i = 0; i < raw.n_rows; ++i)
            for (std::size_t m = 0; m < preds.size(); ++m)
                meta_x[i * preds.size() + m] = preds[m].proba[i];
        return predict(*model.meta, MatrixView{meta_x.data(), raw.n_rows, preds.size()});
    }
    return majority_vote(preds, majority_ties);
}

}  // namespace fairboost
