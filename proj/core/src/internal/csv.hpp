#pragma once

// Minimal CSV support shared by the loader and the task presets.  Handles
// RFC-4180 style quoting (embedded commas and doubled quotes); multi-line
// fields are not supported.

#include <string>
#include <vector>

namespace fairboost {

struct DatasetSpec;
struct TabularDataset;
struct LoadReport;

namespace csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

std::vector<std::string> parse_line(const std::string& line);
Table read_file(const std::string& path);
std::string format_field(const std::string& v);
std::size_t column_of(const Table& t, const std::string& name);

}  // namespace csv

/// Encode an in-memory raw table according to a spec (the second half of
/// load_csv, exposed so presets can derive columns before encoding).
TabularDataset encode_table(const csv::Table& table, const DatasetSpec& spec,
                            LoadReport* report);

}  // namespace fairboost
