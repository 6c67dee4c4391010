#include "fairboost/presets.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>

#include "internal/csv.hpp"

// The bundled presets reproduce the coarse encodings conventional in the
// fairness-preprocessing literature for these three benchmarks: a handful
// of demographic and history features, each collapsed to a few groups, with
// the protected attribute kept as a feature.  The grouping rules below are
// deliberately boring and documented value by value so the resulting
// datasets can be reproduced from the raw files by inspection.

namespace fairboost {

namespace {

ColumnSchema binary_col(const std::string& name) {
    ColumnSchema c;
    c.name = name;
    c.kind = ColumnKind::Binary;
    return c;
}

ColumnSchema cat_col(const std::string& name, std::vector<std::string> cats) {
    ColumnSchema c;
    c.name = name;
    c.kind = ColumnKind::Categorical;
    c.categories = std::move(cats);
    return c;
}

ColumnSchema num_col(const std::string& name) {
    ColumnSchema c;
    c.name = name;
    c.kind = ColumnKind::Continuous;
    return c;
}

double to_number(const std::string& v) {
    return std::strtod(v.c_str(), nullptr);
}

TaskPreset german_preset(const std::string& csv_path) {
    csv::Table raw = csv::read_file(csv_path);
    std::size_t c_status = csv::column_of(raw, "personal_status");
    std::size_t c_age = csv::column_of(raw, "age");
    std::size_t c_hist = csv::column_of(raw, "credit_history");
    std::size_t c_sav = csv::column_of(raw, "savings");
    std::size_t c_emp = csv::column_of(raw, "employment");
    std::size_t c_label = csv::column_of(raw, "credit_risk");

    csv::Table derived;
    derived.header = {"sex", "age_gt_25", "credit_history", "savings", "employment",
                      "credit_risk"};
    for (const auto& row : raw.rows) {
        const std::string& ps = row[c_status];
        // personal_status codes: A91/A93/A94 male, A92/A95 female.
        std::string sex = (ps == "A92" || ps == "A95") ? "0" : "1";
        std::string age = to_number(row[c_age]) > 25.0 ? "1" : "0";

        const std::string& h = row[c_hist];
        std::string hist = (h == "A33") ? "delay" : (h == "A34") ? "other" : "none_or_paid";

        const std::string& sv = row[c_sav];
        std::string sav = (sv == "A61" || sv == "A62") ? "lt_500"
                          : (sv == "A63" || sv == "A64") ? "ge_500"
                                                         : "unknown_or_none";

        const std::string& em = row[c_emp];
        std::string emp = (em == "A71") ? "unemployed"
                          : (em == "A72" || em == "A73") ? "years_1_to_4"
                                                         : "years_4_plus";

        derived.rows.push_back({sex, age, hist, sav, emp, row[c_label]});
    }

    DatasetSpec spec;
    spec.name = "german";
    spec.label_column = "credit_risk";
    spec.label_map = {{"1", 1}, {"2", 0}};
    spec.protected_column = "sex";
    spec.privileged_value = "1";
    spec.features = {
        binary_col("sex"),
        binary_col("age_gt_25"),
        cat_col("credit_history", {"none_or_paid", "delay", "other"}),
        cat_col("savings", {"lt_500", "ge_500", "unknown_or_none"}),
        cat_col("employment", {"unemployed", "years_1_to_4", "years_4_plus"}),
    };

    TaskPreset p;
    p.data = encode_table(derived, spec, &p.report);
    p.map_columns = {"credit_history", "savings", "employment"};
    return p;
}

TaskPreset compas_preset(const std::string& csv_path) {
    csv::Table raw = csv::read_file(csv_path);
    std::size_t c_sex = csv::column_of(raw, "sex");
    std::size_t c_agecat = csv::column_of(raw, "age_cat");
    std::size_t c_race = csv::column_of(raw, "race");
    std::size_t c_priors = csv::column_of(raw, "priors_count");
    std::size_t c_days = csv::column_of(raw, "days_b_screening_arrest");
    std::size_t c_degree = csv::column_of(raw, "c_charge_degree");
    std::size_t c_isrec = csv::column_of(raw, "is_recid");
    std::size_t c_score = csv::column_of(raw, "score_text");
    std::size_t c_label = csv::column_of(raw, "two_year_recid");

    csv::Table derived;
    derived.header = {"sex", "race_caucasian", "age_cat", "priors_bucket", "charge_degree",
                      "two_year_recid"};
    std::size_t dropped = 0;
    for (const auto& row : raw.rows) {
        // Conventional validity filter: screening within 30 days of arrest,
        // recidivism flag present, ordinary traffic offenses and unscored
        // rows removed.
        const std::string& days = row[c_days];
        bool keep = !days.empty();
        if (keep) {
            double d = to_number(days);
            keep = d >= -30.0 && d <= 30.0;
        }
        keep = keep && row[c_isrec] != "-1" && row[c_degree] != "O" && row[c_score] != "N/A";
        if (!keep) {
            ++dropped;
            continue;
        }

        std::string sex = (row[c_sex] == "Female") ? "1" : "0";
        std::string race = (row[c_race] == "Caucasian") ? "1" : "0";
        double priors = to_number(row[c_priors]);
        std::string bucket = priors == 0.0 ? "none" : priors <= 3.0 ? "one_to_three" : "more_than_three";
        derived.rows.push_back({sex, race, row[c_agecat], bucket, row[c_degree], row[c_label]});
    }

    DatasetSpec spec;
    spec.name = "compas";
    spec.label_column = "two_year_recid";
    // Favorable outcome is staying arrest-free for two years.
    spec.label_map = {{"0", 1}, {"1", 0}};
    spec.protected_column = "sex";
    spec.privileged_value = "1";
    spec.features = {
        binary_col("sex"),
        binary_col("race_caucasian"),
        cat_col("age_cat", {"Less than 25", "25 - 45", "Greater than 45"}),
        cat_col("priors_bucket", {"none", "one_to_three", "more_than_three"}),
        cat_col("charge_degree", {"F", "M"}),
    };

    TaskPreset p;
    p.data = encode_table(derived, spec, &p.report);
    p.report.total_rows = raw.rows.size();
    p.report.dropped_missing = dropped;
    p.map_columns = {"age_cat", "priors_bucket", "charge_degree"};
    return p;
}

TaskPreset adult_preset(const std::string& csv_path) {
    csv::Table raw = csv::read_file(csv_path);
    std::size_t c_age = csv::column_of(raw, "age");
    std::size_t c_edu = csv::column_of(raw, "education_num");
    std::size_t c_race = csv::column_of(raw, "race");
    std::size_t c_sex = csv::column_of(raw, "sex");
    std::size_t c_label = csv::column_of(raw, "income");

    csv::Table derived;
    derived.header = {"race_white", "sex", "age_decade", "education_years", "income"};
    std::size_t dropped = 0;
    for (const auto& row : raw.rows) {
        // Conventional cleaning drops a row if any field is missing, not
        // just the ones used here.
        bool missing = std::any_of(row.begin(), row.end(),
                                   [](const std::string& v) { return v == "?"; });
        if (missing) {
            ++dropped;
            continue;
        }
        std::string race = (row[c_race] == "White") ? "1" : "0";
        std::string sex = (row[c_sex] == "Male") ? "1" : "0";
        double age = to_number(row[c_age]);
        std::string decade = age >= 70.0 ? "70+" : std::to_string((static_cast<int>(age) / 10) * 10);
        double edu = to_number(row[c_edu]);
        std::string years = edu < 6.0 ? "<6" : edu > 12.0 ? ">12" : std::to_string(static_cast<int>(edu));
        derived.rows.push_back({race, sex, decade, years, row[c_label]});
    }

    DatasetSpec spec;
    spec.name = "adult";
    spec.label_column = "income";
    spec.label_map = {{">50K", 1}, {"<=50K", 0}};
    spec.protected_column = "sex";
    spec.privileged_value = "1";
    spec.features = {
        binary_col("race_white"),
        binary_col("sex"),
        cat_col("age_decade", {"10", "20", "30", "40", "50", "60", "70+"}),
        cat_col("education_years", {"<6", "6", "7", "8", "9", "10", "11", "12", ">12"}),
    };

    TaskPreset p;
    p.data = encode_table(derived, spec, &p.report);
    p.report.total_rows = raw.rows.size();
    p.report.dropped_missing = dropped;
    p.map_columns = {"age_decade", "education_years"};
    return p;
}

}  // namespace

std::vector<std::string> preset_names() { return {"german", "compas", "adult"}; }

TaskPreset load_preset(const std::string& name, const std::string& csv_path) {
    if (name == "german") return german_preset(csv_path);
    if (name == "compas") return compas_preset(csv_path);
    if (name == "adult") return adult_preset(csv_path);
    throw ConfigError("preset", "unknown dataset preset '" + name + "'");
}

DatasetSpec german_raw_spec() {
    DatasetSpec spec;
    spec.name = "german_raw";
    spec.label_column = "credit_risk";
    spec.label_map = {{"1", 1}, {"2", 0}};
    spec.protected_column = "foreign_worker";
    spec.privileged_value = "A202";
    spec.features = {
        cat_col("checking_status", {}), num_col("duration"), cat_col("credit_history", {}),
        cat_col("purpose", {}), num_col("credit_amount"), cat_col("savings", {}),
        cat_col("employment", {}), num_col("installment_rate"), cat_col("personal_status", {}),
        cat_col("other_debtors", {}), num_col("residence_since"), cat_col("property", {}),
        num_col("age"), cat_col("other_installment_plans", {}), cat_col("housing", {}),
        num_col("existing_credits"), cat_col("job", {}), num_col("num_dependents"),
        cat_col("telephone", {}),
    };
    return spec;
}

DatasetSpec compas_raw_spec() {
    DatasetSpec spec;
    spec.name = "compas_raw";
    spec.label_column = "two_year_recid";
    spec.label_map = {{"0", 1}, {"1", 0}};
    spec.protected_column = "sex";
    spec.privileged_value = "Female";
    spec.features = {
        num_col("age"), cat_col("age_cat", {}), cat_col("race", {}), num_col("juv_fel_count"),
        num_col("juv_misd_count"), num_col("juv_other_count"), num_col("priors_count"),
        num_col("days_b_screening_arrest"), cat_col("c_charge_degree", {}),
    };
    return spec;
}

DatasetSpec adult_raw_spec() {
    DatasetSpec spec;
    spec.name = "adult_raw";
    spec.label_column = "income";
    spec.label_map = {{">50K", 1}, {"<=50K", 0}};
    spec.protected_column = "sex";
    spec.privileged_value = "Male";
    spec.features = {
        num_col("age"), cat_col("workclass", {}), num_col("fnlwgt"), cat_col("education", {}),
        num_col("education_num"), cat_col("marital_status", {}), cat_col("occupation", {}),
        cat_col("relationship", {}), cat_col("race", {}), num_col("capital_gain"),
        num_col("capital_loss"), num_col("hours_per_week"), cat_col("native_country", {}),
    };
    return spec;
}

}  // namespace fairboost
