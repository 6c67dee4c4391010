#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fairboost/errors.hpp"

namespace fairboost {

/// How a column's values are interpreted.
enum class ColumnKind {
    Binary,       ///< values in {0, 1}
    Categorical,  ///< integer index into `categories`
    Continuous,   ///< real-valued
};

/// Description of one feature column.  For categorical columns `categories`
/// lists the raw string values in index order; leaving it empty in a
/// DatasetSpec means "discover categories from the file in first-seen
/// order".  After discretize() a continuous column additionally carries the
/// learned `bin_edges` (ascending, one less than the bin count) and
/// `bin_means` (training mean of each bin, used as the representative value
/// when a binned cell is mapped back to a number).
struct ColumnSchema {
    std::string name;
    ColumnKind kind = ColumnKind::Continuous;
    std::vector<std::string> categories;
    std::vector<double> bin_edges;
    std::vector<double> bin_means;

    bool discretized() const { return !bin_means.empty(); }
    /// Number of distinct cells this column can take (0 = unbounded).
    std::size_t cell_count() const;
};

/// Declarative description of how to read a raw CSV into a dataset:
/// which column is the label and how its raw values map to {0,1}, which
/// column is the protected attribute and which raw value is the privileged
/// group, and the schema of every feature column to keep.  Columns present
/// in the file but not listed are ignored.
struct DatasetSpec {
    std::string name;

    std::string label_column;
    /// Raw label value mapped to the favorable outcome (1).  Ignored when
    /// `label_map` is given explicitly.
    std::string favorable_label;
    /// Optional explicit raw-value -> {0,1} map; must cover every raw label
    /// observed in the file.
    std::map<std::string, int> label_map;

    std::string protected_column;
    /// Raw protected value mapped to the privileged group (1); every other
    /// observed value maps to 0.  Exactly two distinct raw values must occur.
    std::string privileged_value;

    std::vector<ColumnSchema> features;

    /// Cell contents treated as missing; rows containing one in any used
    /// column are dropped (and counted in the LoadReport).
    std::vector<std::string> missing_markers{"", "?", "NA"};
};

/// Bookkeeping from load_csv.
struct LoadReport {
    std::size_t total_rows = 0;    ///< data rows in the file
    std::size_t kept_rows = 0;     ///< rows in the resulting dataset
    std::size_t dropped_missing = 0;
};

/// In-memory tabular dataset: a dense row-major feature matrix plus the
/// per-row label, protected-group indicator and sample weight.  Instances
/// are treated as immutable once built; every transformation returns a new
/// dataset.
struct TabularDataset {
    std::string name;
    std::vector<ColumnSchema> schema;   ///< one entry per feature column
    std::vector<double> x;              ///< n_rows * n_cols, row major
    std::vector<int> y;                 ///< {0,1}, 1 = favorable
    std::vector<int> s;                 ///< {0,1}, 1 = privileged
    std::vector<double> w;              ///< positive sample weights
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;

    /// Raw string values written back out for labels / protected groups,
    /// indexed by the encoded value.  Populated by load_csv and presets.
    std::string label_name = "label";
    std::string protected_name = "group";
    std::string label_values[2] = {"0", "1"};
    std::string protected_values[2] = {"0", "1"};

    double at(std::size_t i, std::size_t j) const { return x[i * n_cols + j]; }
    double& at(std::size_t i, std::size_t j) { return x[i * n_cols + j]; }
    const double* row(std::size_t i) const { return x.data() + i * n_cols; }

    std::size_t column_index(const std::string& name) const;

    /// Throws DataError if sizes disagree, labels/groups leave {0,1}, a
    /// weight is not strictly positive, or a categorical/binary cell is out
    /// of range for its schema.
    void validate() const;

    /// Copy with only the rows whose index is listed (order preserved).
    TabularDataset take_rows(const std::vector<std::size_t>& rows) const;
    /// Copy with only the named columns, in the given order.
    TabularDataset take_columns(const std::vector<std::string>& names) const;
};

/// Result of a train/test partition.
struct SplitPair {
    TabularDataset train;
    TabularDataset test;
    std::uint64_t seed = 0;
};

/// Read a CSV file (header row required) according to the spec.  Rows with
/// missing markers in any used column are dropped and counted; unparsable
/// numeric cells, unknown categories for columns with a declared category
/// list, and unmappable label/protected values raise DataError.
TabularDataset load_csv(const std::string& path, const DatasetSpec& spec,
                        LoadReport* report = nullptr);

/// Write a dataset back to CSV.  Categorical cells are written as their
/// category strings, labels and protected values as the recorded raw
/// strings; numeric cells round-trip exactly (shortest representation that
/// parses back to the same double).  When the protected attribute is also a
/// feature carrying identical raw values the column is written once; if a
/// transform rewrote the feature, the group flag is written separately with
/// "_protected" appended to its name.  When `include_weights` is set a
/// final `weight` column is added.
void write_csv(const TabularDataset& ds, const std::string& path,
               bool include_weights = false);

/// Expand every categorical column into one indicator column per category
/// (named "col=value").  Binary and continuous columns pass through.  Row
/// count, labels, groups and weights are unchanged.
TabularDataset encode_onehot(const TabularDataset& ds);

/// Equal-frequency discretization of continuous columns into at most `bins`
/// cells.  Cell values become bin indices; the learned edges and per-bin
/// training means are recorded in the schema.  Columns that already carry
/// bin edges are left untouched, so the operation is idempotent.  A column
/// with fewer distinct values than bins gets one cell per distinct value.
TabularDataset discretize(const TabularDataset& ds, int bins);

/// Apply recorded bin edges to new data (values -> bin indices).  Used to
/// push test rows through a training-fitted discretization.
TabularDataset apply_bins(const TabularDataset& ds, const std::vector<ColumnSchema>& fitted);

/// Seeded stratified split.  Strata are the (label, group) cells; the train
/// side gets round(fraction * n) rows overall, allocated to strata by
/// largest remainder.  Throws ConfigError if the fraction leaves either
/// side empty.
SplitPair split(const TabularDataset& ds, double fraction, std::uint64_t seed);

/// Uniform row subsample without replacement (order preserved).  Returns
/// the dataset unchanged when limit == 0 or limit >= n_rows.
TabularDataset subsample_rows(const TabularDataset& ds, std::size_t limit,
                              std::uint64_t seed);

}  // namespace fairboost
