// Oracle tests for the bundled dataset presets.  Every count and spot value
// below was derived independently from the raw CSV files (python csv module
// applying the documented filters by hand) and frozen here.

#include <doctest.h>

#include <numeric>
#include <string>

#include "fairboost/dataset.hpp"
#include "fairboost/errors.hpp"
#include "fairboost/presets.hpp"

using namespace fairboost;

namespace {

std::string data_path(const char* file) {
    return std::string(FAIRBOOST_DATA_DIR) + "/" + file;
}

double column_sum(const TabularDataset& ds, const std::string& name) {
    std::size_t j = ds.column_index(name);
    double s = 0;
    for (std::size_t i = 0; i < ds.n_rows; ++i) s += ds.at(i, j);
    return s;
}

int label_count(const TabularDataset& ds, int value) {
    int n = 0;
    for (int y : ds.y) n += (y == value);
    return n;
}

int group_count(const TabularDataset& ds, int value) {
    int n = 0;
    for (int s : ds.s) n += (s == value);
    return n;
}

}  // namespace

TEST_CASE("preset names") {
    CHECK(preset_names() == std::vector<std::string>{"german", "compas", "adult"});
    CHECK_THROWS_AS(load_preset("nonsense", data_path("german.csv")), ConfigError);
}

TEST_CASE("german preset matches independently derived counts") {
    TaskPreset p = load_preset("german", data_path("german.csv"));
    const TabularDataset& ds = p.data;

    CHECK(ds.n_rows == 1000);
    CHECK(p.report.total_rows == 1000);
    CHECK(p.report.kept_rows == 1000);
    CHECK(p.report.dropped_missing == 0);

    // Label: credit_risk 1 (good) -> favorable.  700 good / 300 bad.
    CHECK(label_count(ds, 1) == 700);
    CHECK(label_count(ds, 0) == 300);
    // Protected: sex derived from personal_status; 690 male (privileged).
    CHECK(group_count(ds, 1) == 690);
    CHECK(group_count(ds, 0) == 310);
    // 810 account holders older than 25.
    CHECK(column_sum(ds, "age_gt_25") == 810.0);

    // Feature layout and the optimizer's default all-categorical view.
    REQUIRE(ds.schema.size() == 5);
    CHECK(ds.schema[0].name == "sex");
    CHECK(ds.schema[0].kind == ColumnKind::Binary);
    CHECK(ds.schema[2].name == "credit_history");
    CHECK(ds.schema[2].kind == ColumnKind::Categorical);
    CHECK(p.map_columns ==
          std::vector<std::string>{"credit_history", "savings", "employment"});

    // Spot check: first CSV row is personal_status=A93 (male), age=67,
    // credit_history=A34 (other), savings=A65 (unknown_or_none),
    // employment=A75 (years_4_plus), credit_risk=1 (favorable).
    CHECK(ds.at(0, ds.column_index("sex")) == 1.0);
    CHECK(ds.at(0, ds.column_index("age_gt_25")) == 1.0);
    CHECK(ds.schema[2].categories[static_cast<std::size_t>(
              ds.at(0, ds.column_index("credit_history")))] == "other");
    CHECK(ds.schema[3].categories[static_cast<std::size_t>(
              ds.at(0, ds.column_index("savings")))] == "unknown_or_none");
    CHECK(ds.schema[4].categories[static_cast<std::size_t>(
              ds.at(0, ds.column_index("employment")))] == "years_4_plus");
    CHECK(ds.y[0] == 1);
    CHECK(ds.s[0] == 1);
    for (double w : ds.w) CHECK(w == 1.0);
}

TEST_CASE("compas preset matches independently derived counts") {
    TaskPreset p = load_preset("compas", data_path("compas.csv"));
    const TabularDataset& ds = p.data;

    // 7214 data rows; the conventional validity filter keeps 6172.
    CHECK(p.report.total_rows == 7214);
    CHECK(ds.n_rows == 6172);
    CHECK(p.report.dropped_missing == 7214 - 6172);

    // Favorable = no recidivism within two years: 3363 rows.
    CHECK(label_count(ds, 1) == 3363);
    // Privileged group: Female, 1175 rows.
    CHECK(group_count(ds, 1) == 1175);
    // 2103 Caucasian defendants among the kept rows.
    CHECK(column_sum(ds, "race_caucasian") == 2103.0);

    CHECK(p.map_columns ==
          std::vector<std::string>{"age_cat", "priors_bucket", "charge_degree"});

    // Spot check: the first raw row passes the filter (screening day -1,
    // recidivism flag present, felony charge, scored).  Male, race Other,
    // age over 45, zero priors, no two-year recidivism.
    CHECK(ds.s[0] == 0);
    CHECK(ds.at(0, ds.column_index("sex")) == 0.0);
    CHECK(ds.at(0, ds.column_index("race_caucasian")) == 0.0);
    std::size_t age_j = ds.column_index("age_cat");
    CHECK(ds.schema[age_j].categories[static_cast<std::size_t>(ds.at(0, age_j))] ==
          "Greater than 45");
    std::size_t pri_j = ds.column_index("priors_bucket");
    CHECK(ds.schema[pri_j].categories[static_cast<std::size_t>(ds.at(0, pri_j))] == "none");
    std::size_t deg_j = ds.column_index("charge_degree");
    CHECK(ds.schema[deg_j].categories[static_cast<std::size_t>(ds.at(0, deg_j))] == "F");
    CHECK(ds.y[0] == 1);
}

TEST_CASE("adult preset matches independently derived counts") {
    TaskPreset p = load_preset("adult", data_path("adult.csv"));
    const TabularDataset& ds = p.data;

    // 48842 data rows; dropping every row with a '?' field keeps 45222.
    CHECK(p.report.total_rows == 48842);
    CHECK(ds.n_rows == 45222);
    CHECK(p.report.dropped_missing == 48842 - 45222);

    // 11208 rows with income over 50K among the kept rows.
    CHECK(label_count(ds, 1) == 11208);
    // Privileged group: Male, 30527 rows.
    CHECK(group_count(ds, 1) == 30527);
    CHECK(column_sum(ds, "race_white") == 38903.0);

    CHECK(p.map_columns == std::vector<std::string>{"age_decade", "education_years"});

    // Spot check: first raw row is White, Male, age 39, 13 education years,
    // income <=50K.
    CHECK(ds.at(0, ds.column_index("race_white")) == 1.0);
    CHECK(ds.at(0, ds.column_index("sex")) == 1.0);
    CHECK(ds.s[0] == 1);
    std::size_t dec_j = ds.column_index("age_decade");
    CHECK(ds.schema[dec_j].categories[static_cast<std::size_t>(ds.at(0, dec_j))] == "30");
    std::size_t edu_j = ds.column_index("education_years");
    CHECK(ds.schema[edu_j].categories[static_cast<std::size_t>(ds.at(0, edu_j))] == ">12");
    CHECK(ds.y[0] == 0);
}

TEST_CASE("raw specs load the unreduced files") {
    // German has no missing values: all 1000 rows survive a raw load.
    TabularDataset g = load_csv(data_path("german.csv"), german_raw_spec());
    CHECK(g.n_rows == 1000);
    CHECK(g.schema.size() == 19);

    // Adult: every '?' lives in a column the raw spec uses, so the raw load
    // drops exactly the rows the preset drops.
    LoadReport rep;
    TabularDataset a = load_csv(data_path("adult.csv"), adult_raw_spec(), &rep);
    CHECK(a.n_rows == 45222);
    CHECK(rep.dropped_missing == 3620);

    // COMPAS raw: 307 rows have an empty screening-day field and drop.
    TabularDataset c = load_csv(data_path("compas.csv"), compas_raw_spec());
    CHECK(c.n_rows == 6907);
}
