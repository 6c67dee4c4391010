#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fairboost/config.hpp"
#include "fairboost/dataset.hpp"
#include "fairboost/ensemble.hpp"
#include "fairboost/metrics.hpp"
#include "fairboost/stats.hpp"

namespace fairboost {

/// One dataset entry of an experiment.
struct DatasetRef {
    std::string id;
    std::string preset;    ///< bundled preset name; empty = custom spec
    std::string csv_path;
    std::size_t subsample = 0;  ///< 0 = use all rows
    std::optional<DatasetSpec> custom;  ///< set when preset is empty
};

/// Fully resolved experiment description.
struct ExperimentConfig {
    std::vector<DatasetRef> datasets;
    std::vector<ClassifierKind> models{ClassifierKind::Logistic, ClassifierKind::Forest};
    ClassifierSpec logistic;
    ClassifierSpec forest;
    std::vector<PreprocessKind> singles{PreprocessKind::Reweighing, PreprocessKind::FairRep,
                                        PreprocessKind::DistMap};
    std::vector<std::vector<PreprocessKind>> ensembles;  ///< member lists (size >= 2)
    std::vector<CombineRule> ensemble_rules{CombineRule::Majority};
    std::vector<ClassifierKind> ensemble_models;  ///< empty = same as models
    int n_seeds = 10;
    std::uint64_t master_seed = 42;
    double train_fraction = 0.7;
    double alpha = 0.05;
    /// Preprocessor hyperparameters per dataset id (resolved from the
    /// config's base sections plus per-dataset overrides and the preset's
    /// default optimizer view).
    std::map<std::string, PreprocessParams> preprocess;

    const ClassifierSpec& classifier(ClassifierKind kind) const {
        return kind == ClassifierKind::Logistic ? logistic : forest;
    }
};

/// Build an ExperimentConfig from a parsed config file.  Relative CSV paths
/// resolve against base_dir.  Datasets running the representation learner
/// must carry a per-dataset [lfr.<id>] section (its iteration budget does
/// not transfer between datasets).
ExperimentConfig experiment_from_config(const Config& cfg, const std::string& base_dir);

/// Resolve one dataset reference from its [dataset.<id>] section.  An empty
/// id picks the config's only dataset section (several sections then raise
/// ConfigError).  Relative CSV paths resolve against base_dir.
DatasetRef dataset_from_config(const Config& cfg, const std::string& id,
                               const std::string& base_dir);

/// Resolve preprocessor hyperparameters for one dataset: the base [lfr] and
/// [op] sections overlaid with [lfr.<id>] / [op.<id>].  When
/// require_fair_rep_override is set, a missing [lfr.<id>] section raises
/// ConfigError (representation budgets do not transfer between datasets).
PreprocessParams preprocess_from_config(const Config& cfg, const std::string& id,
                                        bool require_fair_rep_override);

/// Identity of one evaluation cell.
struct CellKey {
    std::string dataset;
    ClassifierKind model = ClassifierKind::Logistic;
    std::vector<PreprocessKind> members;  ///< {None} = baseline
    CombineRule rule = CombineRule::Majority;

    bool is_single() const { return members.size() == 1; }
    /// Pipeline label: "baseline", "rw", "lfr+op", "rw+lfr+op@bagging", ...
    std::string pipeline() const;
    /// Unique id "<dataset>/<model>/<pipeline>".
    std::string id() const;
};

/// One seed replicate of one cell.
struct SeedOutcome {
    int seed_index = 0;
    bool ok = false;
    MetricReport report;
    long majority_ties = 0;
    std::string error_code;    ///< set when !ok
    std::string error_message;
};

struct Comparison {
    std::string reference;  ///< pipeline label compared against
    std::string metric;     ///< "normalized_di" or "f1"
    TestResult test;
};

struct CellResult {
    CellKey key;
    std::vector<SeedOutcome> seeds;
    std::size_t n_ok = 0;
    double mean_di = 0, mean_ndi = 0, mean_f1 = 0, mean_accuracy = 0;
    std::vector<Comparison> comparisons;
};

struct DatasetSummary {
    std::string id;
    std::size_t total_rows = 0, kept_rows = 0, dropped_rows = 0, used_rows = 0;
};

struct GridResult {
    std::uint64_t master_seed = 0;
    int n_seeds = 0;
    double train_fraction = 0;
    double alpha = 0;
    std::vector<DatasetSummary> datasets;
    std::vector<CellResult> cells;
};

/// Run one cell for one seed, end to end: seeded stratified split, pipeline
/// fit on the train side, evaluation on the test side.  Failures are
/// captured in the outcome, not thrown (configuration errors still throw).
SeedOutcome run_cell(const ExperimentConfig& cfg, const TabularDataset& data,
                     const std::string& dataset_id, const CellKey& key, int seed_index,
                     MemberCache* cache = nullptr);

/// Run the whole grid: datasets x models x (baseline + singles + ensembles)
/// x seeds, then aggregate means and run the significance comparisons
/// (each debiased pipeline against the baseline; each ensemble against its
/// constituent single pipelines).  `jobs` > 1 parallelizes over
/// (dataset, seed) columns without changing any result.
GridResult run_grid(const ExperimentConfig& cfg, int jobs = 1);

enum class ReportFormat { Json, Csv, Markdown };

/// Serialize results.  Json writes results.json, Csv writes results.csv
/// (one row per cell and seed), Markdown writes report.md (per-dataset
/// comparison tables).  Returns the path written.
std::string emit_report(const GridResult& grid, ReportFormat format,
                        const std::string& out_dir);

std::string grid_to_json(const GridResult& grid);
GridResult grid_from_json(const std::string& text);

}  // namespace fairboost
