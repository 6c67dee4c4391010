#include "fairboost/preprocess.hpp"

namespace fairboost {

ReweighingModel reweigh_fit(const TabularDataset& train) {
    double cell[2][2] = {{0, 0}, {0, 0}};
    double group[2] = {0, 0};
    double label[2] = {0, 0};
    double total = 0;
    for (std::size_t i = 0; i < train.n_rows; ++i) {
        double wi = train.w[i];
        cell[train.s[i]][train.y[i]] += wi;
        group[train.s[i]] += wi;
        label[train.y[i]] += wi;
        total += wi;
    }
    ReweighingModel model;
    for (int s = 0; s < 2; ++s)
        for (int y = 0; y < 2; ++y) {
            if (cell[s][y] == 0.0)
                throw NumericError("empty_cell",
                                   "reweighing needs every (group,label) cell populated; cell (s=" +
                                       std::to_string(s) + ", y=" + std::to_string(y) + ") is empty");
            model.weight[s][y] = group[s] * label[y] / (total * cell[s][y]);
        }
    return model;
}

TabularDataset reweigh_apply(const TabularDataset& ds, const ReweighingModel& model) {
    TabularDataset out = ds;
    for (std::size_t i = 0; i < ds.n_rows; ++i)
        out.w[i] = ds.w[i] * model.weight[ds.s[i]][ds.y[i]];
    return out;
}

}  // namespace fairboost
