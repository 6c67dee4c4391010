#include "fairboost/metrics.hpp"

#include <cmath>
#include <limits>

namespace fairboost {

double disparate_impact(std::span<const int> predictions, std::span<const int> groups,
                        std::span<const double> weights, std::vector<std::string>* flags) {
    if (predictions.size() != groups.size())
        throw DataError("shape", "predictions and groups differ in length");
    if (!weights.empty() && weights.size() != predictions.size())
        throw DataError("shape", "weights and predictions differ in length");

    double n_priv = 0, n_unpriv = 0, pos_priv = 0, pos_unpriv = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        double wi = weights.empty() ? 1.0 : weights[i];
        if (groups[i] == 1) {
            n_priv += wi;
            if (predictions[i] == 1) pos_priv += wi;
        } else {
            n_unpriv += wi;
            if (predictions[i] == 1) pos_unpriv += wi;
        }
    }
    if (n_priv == 0 || n_unpriv == 0)
        throw DataError("group", "disparate impact needs both groups present");

    double rate_priv = pos_priv / n_priv;
    double rate_unpriv = pos_unpriv / n_unpriv;
    if (rate_priv == 0.0 && rate_unpriv == 0.0) {
        if (flags) flags->push_back("di_both_rates_zero");
        return 1.0;
    }
    if (rate_priv == 0.0) {
        if (flags) flags->push_back("di_privileged_rate_zero");
        return std::numeric_limits<double>::infinity();
    }
    return rate_unpriv / rate_priv;
}

double normalize_di(double di) {
    if (std::isnan(di) || di < 0.0)
        throw ConfigError("di", "disparate impact must be nonnegative");
    if (std::isinf(di)) return 0.0;
    return di <= 1.0 ? di : 1.0 / di;
}

double f1_score(std::span<const int> predictions, std::span<const int> truth,
                std::vector<std::string>* flags) {
    if (predictions.size() != truth.size())
        throw DataError("shape", "predictions and truth differ in length");
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (predictions[i] == 1 && truth[i] == 1) tp += 1;
        else if (predictions[i] == 1) fp += 1;
        else if (truth[i] == 1) fn += 1;
    }
    if (tp + fp + fn == 0.0) {
        if (flags) flags->push_back("f1_degenerate");
        return 0.0;
    }
    return tp / (tp + 0.5 * (fp + fn));
}

double accuracy(std::span<const int> predictions, std::span<const int> truth) {
    if (predictions.size() != truth.size())
        throw DataError("shape", "predictions and truth differ in length");
    if (predictions.empty()) return 0.0;
    double hits = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i)
        if (predictions[i] == truth[i]) hits += 1;
    return hits / static_cast<double>(predictions.size());
}

MetricReport evaluate(std::span<const int> predictions, const TabularDataset& test) {
    if (predictions.size() != test.n_rows)
        throw DataError("shape", "prediction count does not match dataset rows");

    MetricReport rep;
    auto& c = rep.counts;
    for (std::size_t i = 0; i < test.n_rows; ++i) {
        if (test.s[i] == 1) {
            c.n_privileged += 1;
            if (predictions[i] == 1) c.pos_privileged += 1;
        } else {
            c.n_unprivileged += 1;
            if (predictions[i] == 1) c.pos_unprivileged += 1;
        }
        if (predictions[i] == 1 && test.y[i] == 1) c.tp += 1;
        else if (predictions[i] == 1) c.fp += 1;
        else if (test.y[i] == 1) c.fn += 1;
        else c.tn += 1;
    }

    rep.disparate_impact = disparate_impact(predictions, test.s, {}, &rep.flags);
    rep.normalized_di = normalize_di(rep.disparate_impact);
    rep.f1 = f1_score(predictions, test.y, &rep.flags);
    rep.accuracy = accuracy(predictions, test.y);
    return rep;
}

}  // namespace fairboost
