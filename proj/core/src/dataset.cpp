#include "fairboost/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "fairboost/rng.hpp"
#include "internal/csv.hpp"

namespace fairboost {

namespace csv {

std::vector<std::string> parse_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"' && field.empty()) {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(field));
            field.clear();
        } else {
            field += c;
        }
    }
    out.push_back(std::move(field));
    return out;
}

Table read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("io", "cannot open '" + path + "'");
    Table t;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() && in.peek() == std::ifstream::traits_type::eof()) break;
        auto fields = parse_line(line);
        if (first) {
            t.header = std::move(fields);
            first = false;
        } else {
            t.rows.push_back(std::move(fields));
        }
    }
    if (first) throw DataError("io", "'" + path + "' is empty");
    return t;
}

std::string format_field(const std::string& v) {
    if (v.find_first_of(",\"\n") == std::string::npos) return v;
    std::string out = "\"";
    for (char c : v) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

std::size_t column_of(const Table& t, const std::string& name) {
    auto it = std::find(t.header.begin(), t.header.end(), name);
    if (it == t.header.end())
        throw DataError("schema", "column '" + name + "' not found in header");
    return static_cast<std::size_t>(it - t.header.begin());
}

}  // namespace csv

namespace {

double parse_number(const std::string& v, const std::string& col) {
    const char* begin = v.data();
    const char* end = begin + v.size();
    while (begin != end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end != begin && (end[-1] == ' ' || end[-1] == '\t')) --end;
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, out);
    if (ec != std::errc() || ptr != end)
        throw DataError("parse", "non-numeric value '" + v + "' in column '" + col + "'");
    return out;
}

/// Shortest decimal string that parses back to the same double.
std::string format_double(double v) {
    if (v == std::floor(v) && std::abs(v) < 1e15) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.0f", v);
        return buf;
    }
    for (int prec = 1; prec <= 17; ++prec) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) return buf;
    }
    return "0";
}

bool is_missing(const std::string& v, const std::vector<std::string>& markers) {
    return std::find(markers.begin(), markers.end(), v) != markers.end();
}

}  // namespace

std::size_t ColumnSchema::cell_count() const {
    switch (kind) {
        case ColumnKind::Binary: return 2;
        case ColumnKind::Categorical: return categories.size();
        case ColumnKind::Continuous:
            return bin_means.empty() ? 0 : bin_means.size();
    }
    return 0;
}

std::size_t TabularDataset::column_index(const std::string& col) const {
    for (std::size_t j = 0; j < schema.size(); ++j)
        if (schema[j].name == col) return j;
    throw DataError("schema", "dataset '" + name + "' has no column '" + col + "'");
}

void TabularDataset::validate() const {
    if (schema.size() != n_cols)
        throw DataError("shape", "schema size does not match column count");
    if (x.size() != n_rows * n_cols)
        throw DataError("shape", "feature matrix size does not match n_rows * n_cols");
    if (y.size() != n_rows || s.size() != n_rows || w.size() != n_rows)
        throw DataError("shape", "label/group/weight vectors must have one entry per row");
    for (std::size_t i = 0; i < n_rows; ++i) {
        if (y[i] != 0 && y[i] != 1)
            throw DataError("label", "label outside {0,1} at row " + std::to_string(i));
        if (s[i] != 0 && s[i] != 1)
            throw DataError("group", "group outside {0,1} at row " + std::to_string(i));
        if (!(w[i] > 0.0) || !std::isfinite(w[i]))
            throw DataError("weight", "nonpositive weight at row " + std::to_string(i));
    }
    for (std::size_t j = 0; j < n_cols; ++j) {
        const auto& col = schema[j];
        if (col.kind == ColumnKind::Continuous) continue;
        double hi = col.kind == ColumnKind::Binary
                        ? 2.0
                        : static_cast<double>(col.categories.size());
        for (std::size_t i = 0; i < n_rows; ++i) {
            double v = at(i, j);
            if (v != std::floor(v) || v < 0.0 || v >= hi)
                throw DataError("range", "value " + format_double(v) + " out of range for column '" +
                                             col.name + "' at row " + std::to_string(i));
        }
    }
}

TabularDataset TabularDataset::take_rows(const std::vector<std::size_t>& rows) const {
    TabularDataset out;
    out.name = name;
    out.schema = schema;
    out.n_rows = rows.size();
    out.n_cols = n_cols;
    out.label_name = label_name;
    out.protected_name = protected_name;
    for (int k = 0; k < 2; ++k) {
        out.label_values[k] = label_values[k];
        out.protected_values[k] = protected_values[k];
    }
    out.x.reserve(rows.size() * n_cols);
    out.y.reserve(rows.size());
    out.s.reserve(rows.size());
    out.w.reserve(rows.size());
    for (std::size_t i : rows) {
        const double* r = row(i);
        out.x.insert(out.x.end(), r, r + n_cols);
        out.y.push_back(y[i]);
        out.s.push_back(s[i]);
        out.w.push_back(w[i]);
    }
    return out;
}

TabularDataset TabularDataset::take_columns(const std::vector<std::string>& names) const {
    std::vector<std::size_t> idx;
    idx.reserve(names.size());
    for (const auto& n : names) idx.push_back(column_index(n));
    TabularDataset out;
    out.name = name;
    out.n_rows = n_rows;
    out.n_cols = idx.size();
    out.y = y;
    out.s = s;
    out.w = w;
    out.label_name = label_name;
    out.protected_name = protected_name;
    for (int k = 0; k < 2; ++k) {
        out.label_values[k] = label_values[k];
        out.protected_values[k] = protected_values[k];
    }
    out.schema.reserve(idx.size());
    for (std::size_t j : idx) out.schema.push_back(schema[j]);
    out.x.resize(n_rows * idx.size());
    for (std::size_t i = 0; i < n_rows; ++i)
        for (std::size_t k = 0; k < idx.size(); ++k)
            out.x[i * idx.size() + k] = at(i, idx[k]);
    return out;
}

TabularDataset encode_table(const csv::Table& table, const DatasetSpec& spec,
                            LoadReport* report) {
    if (spec.label_column.empty() || spec.protected_column.empty())
        throw ConfigError("spec", "label and protected columns must be named");

    std::size_t label_col = csv::column_of(table, spec.label_column);
    std::size_t prot_col = csv::column_of(table, spec.protected_column);
    std::vector<std::size_t> feat_cols;
    feat_cols.reserve(spec.features.size());
    for (const auto& f : spec.features) feat_cols.push_back(csv::column_of(table, f.name));

    LoadReport rep;
    rep.total_rows = table.rows.size();

    // Pass 1: drop rows with missing markers in any used column.
    std::vector<std::size_t> kept;
    kept.reserve(table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        if (row.size() != table.header.size())
            throw DataError("parse", "row " + std::to_string(i + 2) + " has " +
                                         std::to_string(row.size()) + " fields, expected " +
                                         std::to_string(table.header.size()));
        bool missing = is_missing(row[label_col], spec.missing_markers) ||
                       is_missing(row[prot_col], spec.missing_markers);
        for (std::size_t c : feat_cols)
            missing = missing || is_missing(row[c], spec.missing_markers);
        if (missing) {
            ++rep.dropped_missing;
        } else {
            kept.push_back(i);
        }
    }
    rep.kept_rows = kept.size();

    // Label map: explicit, or favorable -> 1 and everything else -> 0.
    std::map<std::string, int> label_map = spec.label_map;
    if (label_map.empty()) {
        if (spec.favorable_label.empty())
            throw ConfigError("spec", "either favorable_label or label_map is required");
        label_map[spec.favorable_label] = 1;
    }

    // Protected values: privileged -> 1; exactly one other observed value -> 0.
    std::set<std::string> prot_seen;
    for (std::size_t i : kept) prot_seen.insert(table.rows[i][prot_col]);
    if (prot_seen.size() != 2)
        throw DataError("group", "protected column '" + spec.protected_column + "' has " +
                                     std::to_string(prot_seen.size()) +
                                     " distinct values, expected exactly 2");
    if (!prot_seen.count(spec.privileged_value))
        throw DataError("group", "privileged value '" + spec.privileged_value +
                                     "' never occurs in column '" + spec.protected_column + "'");

    TabularDataset ds;
    ds.name = spec.name;
    ds.schema = spec.features;
    ds.n_rows = kept.size();
    ds.n_cols = feat_cols.size();
    ds.label_name = spec.label_column;
    ds.protected_name = spec.protected_column;
    ds.protected_values[1] = spec.privileged_value;
    for (const auto& v : prot_seen)
        if (v != spec.privileged_value) ds.protected_values[0] = v;

    // Record representative raw labels for write-out.
    for (const auto& [raw, enc] : label_map)
        if (enc == 0 || enc == 1) ds.label_values[enc] = raw;

    ds.x.resize(ds.n_rows * ds.n_cols);
    ds.y.reserve(ds.n_rows);
    ds.s.reserve(ds.n_rows);
    ds.w.assign(ds.n_rows, 1.0);

    // Category discovery tables (first-seen order) for schemas that leave
    // the category list empty.
    std::vector<std::map<std::string, std::size_t>> cat_index(feat_cols.size());
    std::vector<bool> discover(feat_cols.size(), false);
    for (std::size_t j = 0; j < ds.schema.size(); ++j) {
        auto& col = ds.schema[j];
        if (col.kind != ColumnKind::Categorical) continue;
        discover[j] = col.categories.empty();
        for (std::size_t k = 0; k < col.categories.size(); ++k)
            cat_index[j][col.categories[k]] = k;
    }

    for (std::size_t r = 0; r < kept.size(); ++r) {
        const auto& row = table.rows[kept[r]];

        const std::string& rawy = row[label_col];
        auto ly = label_map.find(rawy);
        if (ly == label_map.end()) {
            if (spec.label_map.empty()) {
                label_map[rawy] = 0;
                if (ds.label_values[0] == "0") ds.label_values[0] = rawy;
                ly = label_map.find(rawy);
            } else {
                throw DataError("label", "label value '" + rawy + "' is not covered by label_map");
            }
        }
        if (ly->second != 0 && ly->second != 1)
            throw DataError("label", "label_map must target {0,1}");
        ds.y.push_back(ly->second);
        ds.s.push_back(row[prot_col] == spec.privileged_value ? 1 : 0);

        for (std::size_t j = 0; j < feat_cols.size(); ++j) {
            const std::string& v = row[feat_cols[j]];
            auto& col = ds.schema[j];
            double enc = 0.0;
            switch (col.kind) {
                case ColumnKind::Continuous:
                    enc = parse_number(v, col.name);
                    break;
                case ColumnKind::Binary: {
                    enc = parse_number(v, col.name);
                    if (enc != 0.0 && enc != 1.0)
                        throw DataError("range", "binary column '" + col.name +
                                                     "' has value '" + v + "'");
                    break;
                }
                case ColumnKind::Categorical: {
                    auto it = cat_index[j].find(v);
                    if (it == cat_index[j].end()) {
                        if (!discover[j])
                            throw DataError("category", "unknown category '" + v +
                                                            "' in column '" + col.name + "'");
                        std::size_t k = col.categories.size();
                        col.categories.push_back(v);
                        cat_index[j][v] = k;
                        it = cat_index[j].find(v);
                    }
                    enc = static_cast<double>(it->second);
                    break;
                }
            }
            ds.x[r * ds.n_cols + j] = enc;
        }
    }

    // A label map given as just the favorable value needs at least one row
    // of each class to be meaningful downstream; presence is checked by the
    // consumers that require it (classifier fits), not here.
    ds.validate();
    if (report) *report = rep;
    return ds;
}

TabularDataset load_csv(const std::string& path, const DatasetSpec& spec, LoadReport* report) {
    return encode_table(csv::read_file(path), spec, report);
}

void write_csv(const TabularDataset& ds, const std::string& path, bool include_weights) {
    std::ofstream out(path);
    if (!out) throw DataError("io", "cannot write '" + path + "'");

    auto rendered = [&](std::size_t i, std::size_t j) {
        const auto& col = ds.schema[j];
        double v = ds.at(i, j);
        if (col.kind == ColumnKind::Categorical)
            return col.categories[static_cast<std::size_t>(v)];
        return format_double(v);
    };

    // When the protected attribute is also a feature carrying the same raw
    // values, one copy serves both roles.  If a transform rewrote the
    // feature (so the values no longer agree), the group flag is written
    // separately under a disambiguated name.
    bool skip_protected = false;
    std::string protected_header = ds.protected_name;
    for (std::size_t j = 0; j < ds.n_cols; ++j) {
        if (ds.schema[j].name != ds.protected_name) continue;
        skip_protected = true;
        for (std::size_t i = 0; i < ds.n_rows && skip_protected; ++i)
            skip_protected = rendered(i, j) == ds.protected_values[ds.s[i]];
        if (!skip_protected) protected_header += "_protected";
        break;
    }

    for (const auto& col : ds.schema) out << csv::format_field(col.name) << ',';
    out << csv::format_field(ds.label_name);
    if (!skip_protected) out << ',' << csv::format_field(protected_header);
    if (include_weights) out << ",weight";
    out << '\n';

    for (std::size_t i = 0; i < ds.n_rows; ++i) {
        for (std::size_t j = 0; j < ds.n_cols; ++j) out << rendered(i, j) << ',';
        out << csv::format_field(ds.label_values[ds.y[i]]);
        if (!skip_protected) out << ',' << csv::format_field(ds.protected_values[ds.s[i]]);
        if (include_weights) out << ',' << format_double(ds.w[i]);
        out << '\n';
    }
}

TabularDataset encode_onehot(const TabularDataset& ds) {
    std::vector<ColumnSchema> schema;
    for (const auto& col : ds.schema) {
        if (col.kind == ColumnKind::Categorical) {
            if (col.categories.empty())
                throw DataError("schema", "categorical column '" + col.name +
                                              "' has no category list");
            for (const auto& cat : col.categories) {
                ColumnSchema c;
                c.name = col.name + "=" + cat;
                c.kind = ColumnKind::Binary;
                schema.push_back(std::move(c));
            }
        } else {
            schema.push_back(col);
        }
    }

    TabularDataset out;
    out.name = ds.name;
    out.schema = std::move(schema);
    out.n_rows = ds.n_rows;
    out.n_cols = out.schema.size();
    out.y = ds.y;
    out.s = ds.s;
    out.w = ds.w;
    out.label_name = ds.label_name;
    out.protected_name = ds.protected_name;
    for (int k = 0; k < 2; ++k) {
        out.label_values[k] = ds.label_values[k];
        out.protected_values[k] = ds.protected_values[k];
    }
    out.x.assign(out.n_rows * out.n_cols, 0.0);
    for (std::size_t i = 0; i < ds.n_rows; ++i) {
        std::size_t o = 0;
        for (std::size_t j = 0; j < ds.n_cols; ++j) {
            const auto& col = ds.schema[j];
            double v = ds.at(i, j);
            if (col.kind == ColumnKind::Categorical) {
                auto k = static_cast<std::size_t>(v);
                if (v != std::floor(v) || k >= col.categories.size())
                    throw DataError("range", "category index " + format_double(v) +
                                                 " out of range in column '" + col.name + "'");
                out.x[i * out.n_cols + o + k] = 1.0;
                o += col.categories.size();
            } else {
                out.x[i * out.n_cols + o] = v;
                ++o;
            }
        }
    }
    return out;
}

TabularDataset discretize(const TabularDataset& ds, int bins) {
    if (bins < 2) throw ConfigError("bins", "bin count must be at least 2");
    TabularDataset out = ds;
    for (std::size_t j = 0; j < ds.n_cols; ++j) {
        auto& col = out.schema[j];
        if (col.kind != ColumnKind::Continuous || col.discretized()) continue;

        std::vector<double> sorted(ds.n_rows);
        for (std::size_t i = 0; i < ds.n_rows; ++i) sorted[i] = ds.at(i, j);
        std::sort(sorted.begin(), sorted.end());

        std::size_t distinct = 1;
        for (std::size_t i = 1; i < sorted.size(); ++i)
            if (sorted[i] != sorted[i - 1]) ++distinct;
        std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(bins), distinct);

        // Equal-frequency edges: cut after every n/k-th order statistic,
        // placing each edge midway between that value and the next strictly
        // greater one so every training value falls cleanly on one side and
        // nearby unseen values bin with their closest neighbours.  Duplicate
        // edges are merged; a cut at the maximum is dropped (its upper bin
        // would be empty).
        std::vector<double> edges;
        for (std::size_t c = 1; c < k; ++c) {
            double lo = sorted[(c * sorted.size()) / k - 1];
            auto next = std::upper_bound(sorted.begin(), sorted.end(), lo);
            if (next == sorted.end()) break;
            double e = lo + (*next - lo) / 2.0;
            if (edges.empty() || e > edges.back()) edges.push_back(e);
        }

        std::size_t n_bins = edges.size() + 1;
        std::vector<double> sums(n_bins, 0.0);
        std::vector<std::size_t> counts(n_bins, 0);
        for (std::size_t i = 0; i < ds.n_rows; ++i) {
            double v = ds.at(i, j);
            auto it = std::lower_bound(edges.begin(), edges.end(), v);
            auto b = static_cast<std::size_t>(it - edges.begin());
            out.x[i * out.n_cols + j] = static_cast<double>(b);
            sums[b] += v;
            counts[b] += 1;
        }
        col.bin_edges = std::move(edges);
        col.bin_means.resize(n_bins);
        for (std::size_t b = 0; b < n_bins; ++b)
            col.bin_means[b] = counts[b] ? sums[b] / static_cast<double>(counts[b]) : 0.0;
    }
    return out;
}

TabularDataset apply_bins(const TabularDataset& ds, const std::vector<ColumnSchema>& fitted) {
    if (fitted.size() != ds.schema.size())
        throw DataError("schema", "fitted schema has different column count");
    TabularDataset out = ds;
    for (std::size_t j = 0; j < ds.n_cols; ++j) {
        const auto& col = fitted[j];
        if (col.kind != ColumnKind::Continuous || !col.discretized()) continue;
        for (std::size_t i = 0; i < ds.n_rows; ++i) {
            double v = ds.at(i, j);
            auto it = std::lower_bound(col.bin_edges.begin(), col.bin_edges.end(), v);
            out.x[i * out.n_cols + j] = static_cast<double>(it - col.bin_edges.begin());
        }
        out.schema[j] = col;
    }
    return out;
}

SplitPair split(const TabularDataset& ds, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0) || !(fraction < 1.0))
        throw ConfigError("fraction", "train fraction must lie strictly between 0 and 1");
    auto n = ds.n_rows;
    auto target = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    if (target == 0 || target >= n)
        throw ConfigError("fraction", "fraction " + std::to_string(fraction) + " leaves a side of the split empty (n=" +
                                          std::to_string(n) + ")");

    // Strata in canonical order (y, s) = (0,0), (0,1), (1,0), (1,1).
    std::vector<std::vector<std::size_t>> strata(4);
    for (std::size_t i = 0; i < n; ++i) strata[ds.y[i] * 2 + ds.s[i]].push_back(i);

    // Largest-remainder allocation of the train quota across strata.
    std::vector<std::size_t> quota(4, 0);
    std::vector<double> remainder(4, -1.0);
    std::size_t assigned = 0;
    for (int c = 0; c < 4; ++c) {
        if (strata[c].empty()) continue;
        double exact = fraction * static_cast<double>(strata[c].size());
        quota[c] = static_cast<std::size_t>(exact);
        remainder[c] = exact - static_cast<double>(quota[c]);
        assigned += quota[c];
    }
    while (assigned < target) {
        int best = -1;
        for (int c = 0; c < 4; ++c) {
            if (strata[c].empty() || quota[c] >= strata[c].size()) continue;
            if (best < 0 || remainder[c] > remainder[best]) best = c;
        }
        if (best < 0) break;
        quota[best] += 1;
        remainder[best] -= 1.0;
        ++assigned;
    }
    while (assigned > target) {
        int best = -1;
        for (int c = 0; c < 4; ++c) {
            if (quota[c] == 0) continue;
            if (best < 0 || remainder[c] < remainder[best]) best = c;
        }
        quota[best] -= 1;
        remainder[best] += 1.0;
        --assigned;
    }

    Rng rng(derive_seed(seed, stage::kSplit));
    std::vector<std::size_t> train_idx, test_idx;
    train_idx.reserve(target);
    test_idx.reserve(n - target);
    for (int c = 0; c < 4; ++c) {
        auto& rows = strata[c];
        rng.shuffle(rows);
        for (std::size_t i = 0; i < rows.size(); ++i)
            (i < quota[c] ? train_idx : test_idx).push_back(rows[i]);
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());

    SplitPair pair;
    pair.train = ds.take_rows(train_idx);
    pair.test = ds.take_rows(test_idx);
    pair.seed = seed;
    return pair;
}

TabularDataset subsample_rows(const TabularDataset& ds, std::size_t limit, std::uint64_t seed) {
    if (limit == 0 || limit >= ds.n_rows) return ds;
    std::vector<std::size_t> idx(ds.n_rows);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(derive_seed(seed, stage::kSubsample));
    rng.shuffle(idx);
    idx.resize(limit);
    std::sort(idx.begin(), idx.end());
    return ds.take_rows(idx);
}

}  // namespace fairboost
