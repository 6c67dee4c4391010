#pragma once

#include <string>
#include <vector>

#include "fairboost/dataset.hpp"

namespace fairboost {

/// A ready-to-run task: the loaded dataset in its conventional coarse
/// encoding plus the default column subset used by the distribution-mapping
/// debiaser (all-categorical, so the mapped cells are exact values).
struct TaskPreset {
    TabularDataset data;
    LoadReport report;
    std::vector<std::string> map_columns;  ///< default optimizer view
};

/// Names of the bundled presets: "german", "compas", "adult".
std::vector<std::string> preset_names();

/// Load one of the bundled task presets from its CSV file.
///
/// german  - label credit_risk (1=good -> favorable), protected sex derived
///           from personal_status (male=1); features: age>25 flag,
///           credit_history / savings / employment collapsed to three
///           groups each, sex.
/// compas  - label two_year_recid (no-recidivism -> favorable=1), protected
///           sex (Female=1 privileged); conventional row filter applied
///           (screening within 30 days, recidivism flag present, ordinary
///           traffic charges and unscored rows removed); features: race
///           (Caucasian=1), age_cat, priors_count grouped {0, 1-3, >3},
///           charge degree, sex.
/// adult   - label income (>50K -> favorable), protected sex (Male=1);
///           features: race (White=1), age decade, education-years bins,
///           sex.  Rows with missing markers are dropped.
TaskPreset load_preset(const std::string& name, const std::string& csv_path);

/// Raw (unreduced) specs for the bundled CSVs, used for generic loading.
DatasetSpec german_raw_spec();
DatasetSpec compas_raw_spec();
DatasetSpec adult_raw_spec();

}  // namespace fairboost
