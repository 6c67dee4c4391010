#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fairboost/models.hpp"
#include "fairboost/preprocess.hpp"

namespace fairboost {

enum class PreprocessKind { None, Reweighing, FairRep, DistMap };
enum class ClassifierKind { Logistic, Forest };
enum class CombineRule { Majority, Bagging, Stacking };

std::string to_string(PreprocessKind k);
std::string to_string(ClassifierKind k);
std::string to_string(CombineRule r);

/// Hyperparameters shared by every preprocessor in a run.
struct PreprocessParams {
    FairRepParams fair_rep;
    DistMapParams dist_map;
    /// Columns forming the distribution optimizer's view.  Continuous ones
    /// are discretized to `map_bins` cells first.
    std::vector<std::string> map_columns;
    int map_bins = 4;
};

struct ClassifierSpec {
    ClassifierKind kind = ClassifierKind::Logistic;
    LogisticParams logistic;
    ForestParams forest;
};

/// One debias-then-classify pipeline, fully fitted.  The classifier was
/// trained on exactly its preprocessor's output; at prediction time rows
/// are one-hot encoded, the representation transform is applied when the
/// member carries one (weight- and map-based preprocessors act only on
/// training data), and the classifier scores the result.
struct FittedMember {
    PreprocessKind preprocess = PreprocessKind::None;
    ClassifierKind classifier = ClassifierKind::Logistic;
    std::optional<ReweighingModel> reweigh;
    std::optional<FairRepModel> fair_rep;
    std::optional<DistMapModel> dist_map;
    std::vector<std::string> map_columns;
    std::optional<LogisticModel> logistic;
    std::optional<ForestModel> forest;
};

Prediction member_predict(const FittedMember& member, const TabularDataset& raw);

/// A preprocessor's output on one training set, ready for classifier fits
/// (one-hot encoded; representation features for the prototype method).
struct PreprocessedTrain {
    PreprocessKind kind = PreprocessKind::None;
    TabularDataset data;
    std::optional<ReweighingModel> reweigh;
    std::optional<FairRepModel> fair_rep;
    std::optional<DistMapModel> dist_map;
    std::vector<std::string> map_columns;
};

/// Fit one preprocessor on raw training data.  Seeds for the preprocessor
/// fit and any randomized transform are derived internally from cell_seed,
/// independent of which other members exist.  Throws NumericError (code
/// "label_collapse") if a label-rewriting preprocessor leaves a single
/// class in the training labels.
PreprocessedTrain preprocess_train(const TabularDataset& train, PreprocessKind kind,
                                   const PreprocessParams& params, std::uint64_t cell_seed);

/// Shared fits within one (dataset, seed) evaluation cell.  Keys combine
/// preprocessor, classifier and fitting scope; safe to reuse across
/// ensembles because member fits are composition-independent.
struct MemberCache {
    std::map<std::string, std::shared_ptr<const PreprocessedTrain>> preprocessed;
    std::map<std::string, std::shared_ptr<const FittedMember>> members;
};

/// Fit one pipeline (preprocessor + classifier).  `scope` names the
/// training subset for cache keys ("full", or a fold tag during stacking).
FittedMember fit_member(const TabularDataset& train, PreprocessKind pre,
                        const ClassifierSpec& clf, const PreprocessParams& params,
                        std::uint64_t cell_seed, MemberCache* cache = nullptr,
                        const std::string& scope = "full");

struct EnsembleSpec {
    std::vector<PreprocessKind> members;
    CombineRule rule = CombineRule::Majority;
};

struct EnsembleModel {
    std::vector<FittedMember> members;
    CombineRule rule = CombineRule::Majority;
    std::optional<LogisticModel> meta;  ///< stacking blender over member scores
    std::uint64_t seed = 0;
};

/// Fit an ensemble of debias-then-classify pipelines over one training set.
///
/// majority - every member fits on the full training set; prediction is
///   the modal label with ties broken by mean score.
/// bagging  - each member's classifier refits on a weighted bootstrap of
///   its preprocessor's output; member m's resample stream derives from
///   seed + m.
/// stacking - members produce out-of-fold scores via a seeded 5-fold
///   partition; an unregularized logistic blender is fitted on those
///   scores, then members refit on the full set for prediction.
EnsembleModel ensemble_fit(const TabularDataset& train, const EnsembleSpec& spec,
                           const ClassifierSpec& clf, const PreprocessParams& params,
                           std::uint64_t seed, MemberCache* cache = nullptr);

/// Modal label across members; a tie falls back to the mean score against
/// 0.5.  `ties` (when given) is incremented once per tied row.
Prediction majority_vote(const std::vector<Prediction>& member_predictions, long* ties = nullptr);

Prediction ensemble_predict(const EnsembleModel& model, const TabularDataset& raw,
                            long* majority_ties = nullptr);

/// Seeded partition of n rows into k folds of size floor(n/k) or one more;
/// entry i is the fold of row i.
std::vector<int> fold_assignment(std::size_t n, int k, std::uint64_t seed);

}  // namespace fairboost
