#pragma once

#include <vector>

#include "fairboost/dataset.hpp"
#include "fairboost/rng.hpp"

namespace fairboost::test {

/// Dataset with continuous feature columns f0..f{d-1} and unit weights.
inline TabularDataset make_dataset(const std::vector<std::vector<double>>& rows,
                                   std::vector<int> y, std::vector<int> s,
                                   std::vector<double> w = {}) {
    TabularDataset ds;
    ds.name = "synthetic";
    ds.n_rows = rows.size();
    ds.n_cols = rows.empty() ? 0 : rows[0].size();
    for (std::size_t j = 0; j < ds.n_cols; ++j) {
        ColumnSchema c;
        c.name = "f" + std::to_string(j);
        c.kind = ColumnKind::Continuous;
        ds.schema.push_back(std::move(c));
    }
    for (const auto& r : rows) ds.x.insert(ds.x.end(), r.begin(), r.end());
    ds.y = std::move(y);
    ds.s = std::move(s);
    ds.w = w.empty() ? std::vector<double>(ds.n_rows, 1.0) : std::move(w);
    ds.validate();
    return ds;
}

/// Random dataset with every (group, label) cell non-empty: two noisy
/// continuous features plus the group flag as a third feature.
inline TabularDataset random_dataset(Rng& rng, std::size_t n_min = 20, std::size_t n_max = 500) {
    std::size_t n = n_min + static_cast<std::size_t>(rng.next_below(n_max - n_min + 1));
    std::vector<std::vector<double>> rows;
    std::vector<int> y, s;
    for (std::size_t i = 0; i < n; ++i) {
        int si, yi;
        if (i < 4) {  // force all four cells non-empty
            si = static_cast<int>(i / 2);
            yi = static_cast<int>(i % 2);
        } else {
            si = rng.next_double() < 0.6 ? 1 : 0;
            yi = rng.next_double() < (si ? 0.7 : 0.4) ? 1 : 0;
        }
        rows.push_back({rng.next_double() + yi, rng.next_double() * 2.0 - 1.0,
                        static_cast<double>(si)});
        y.push_back(yi);
        s.push_back(si);
    }
    return make_dataset(rows, y, s);
}

}  // namespace fairboost::test
