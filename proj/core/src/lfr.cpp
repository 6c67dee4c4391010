#include <algorithm>
#include <cmath>
#include <numeric>

#include "fairboost/errors.hpp"
#include "fairboost/preprocess.hpp"
#include "fairboost/rng.hpp"

// Fair representations via learned prototypes.
//
// Rows are standardized, then softly assigned to k prototype points:
//   M[n][k] = softmax_k(-|z_n - v_k|^2).
// Three loss terms shape the prototypes v and per-prototype label scores u:
//   group_parity   L_z = sum_k | mean_{priv} M[.][k] - mean_{unpriv} M[.][k] |
//   reconstruction L_x = sum_n |z_n - sum_k M[n][k] v_k|^2
//   label_fit      L_y = sum_n cross_entropy(y_n, sum_k M[n][k] u_k)
//   L = a_z L_z + a_x L_x + a_y L_y.
//
// Optimization is plain full-batch projected gradient descent: u is clamped
// to [0,1] after every step, the step size backtracks by halving until the
// loss decreases (so the recorded trace is non-increasing), and it grows
// gently after clean steps.  Gradients are the exact analytic ones,
// including the softmax coupling of M to the prototypes; the |.| and clamp
// points use the standard subgradient/zero conventions.  The predicted
// score sum_k M u is clamped away from {0,1} inside the logarithms only,
// and a sample whose score sits in the clamp region contributes no
// label-fit gradient (the clamped loss is locally constant there).

namespace fairboost {

namespace {

constexpr double kProbEps = 1e-7;

struct Workspace {
    std::size_t n = 0, d = 0, k = 0;
    std::vector<double> m;       // n*k memberships
    std::vector<double> resid;   // n*d reconstruction residuals
    std::vector<double> dly_dp;  // n
    std::vector<double> mu[2];   // k per group
    double count[2] = {0, 0};
};

double eval_loss(const TabularDataset& z, const std::vector<double>& proto,
                 const std::vector<double>& score, const FairRepParams& params,
                 Workspace* ws, FairRepLoss* out_grad) {
    std::size_t n = z.n_rows, d = z.n_cols;
    auto k = static_cast<std::size_t>(params.k);
    ws->n = n;
    ws->d = d;
    ws->k = k;
    ws->m.resize(n * k);
    ws->resid.resize(n * d);
    ws->dly_dp.resize(n);
    ws->mu[0].assign(k, 0.0);
    ws->mu[1].assign(k, 0.0);
    ws->count[0] = ws->count[1] = 0;

    double lx = 0, ly = 0;
    std::vector<double> a(k);
    for (std::size_t i = 0; i < n; ++i) {
        const double* zi = z.row(i);
        double amax = -1e300;
        for (std::size_t c = 0; c < k; ++c) {
            double dist = 0;
            const double* v = proto.data() + c * d;
            for (std::size_t j = 0; j < d; ++j) {
                double diff = zi[j] - v[j];
                dist += diff * diff;
            }
            a[c] = -dist;
            amax = std::max(amax, a[c]);
        }
        double norm = 0;
        double* mi = ws->m.data() + i * k;
        for (std::size_t c = 0; c < k; ++c) {
            mi[c] = std::exp(a[c] - amax);
            norm += mi[c];
        }
        double p = 0;
        for (std::size_t c = 0; c < k; ++c) {
            mi[c] /= norm;
            p += mi[c] * score[c];
        }

        double* ri = ws->resid.data() + i * d;
        for (std::size_t j = 0; j < d; ++j) {
            double xhat = 0;
            for (std::size_t c = 0; c < k; ++c) xhat += mi[c] * proto[c * d + j];
            ri[j] = zi[j] - xhat;
            lx += ri[j] * ri[j];
        }

        bool clamped = p < kProbEps || p > 1.0 - kProbEps;
        double pc = std::clamp(p, kProbEps, 1.0 - kProbEps);
        ly -= z.y[i] == 1 ? std::log(pc) : std::log(1.0 - pc);
        ws->dly_dp[i] = clamped ? 0.0 : (pc - (z.y[i] == 1 ? 1.0 : 0.0)) / (pc * (1.0 - pc));

        int g = z.s[i];
        ws->count[g] += 1;
        for (std::size_t c = 0; c < k; ++c) ws->mu[g][c] += mi[c];
    }

    double lz = 0;
    std::vector<double> sign_k(k, 0.0);
    for (std::size_t c = 0; c < k; ++c) {
        double m1 = ws->count[1] > 0 ? ws->mu[1][c] / ws->count[1] : 0;
        double m0 = ws->count[0] > 0 ? ws->mu[0][c] / ws->count[0] : 0;
        double diff = m1 - m0;
        lz += std::abs(diff);
        sign_k[c] = diff > 0 ? 1.0 : diff < 0 ? -1.0 : 0.0;
    }

    double total = params.a_z * lz + params.a_x * lx + params.a_y * ly;

    if (out_grad) {
        out_grad->total = total;
        out_grad->group_parity = lz;
        out_grad->reconstruction = lx;
        out_grad->label_fit = ly;
        out_grad->d_prototypes.assign(k * d, 0.0);
        out_grad->d_label_score.assign(k, 0.0);

        std::vector<double> g(k);
        for (std::size_t i = 0; i < n; ++i) {
            const double* zi = z.row(i);
            const double* mi = ws->m.data() + i * k;
            const double* ri = ws->resid.data() + i * d;
            double group_term =
                z.s[i] == 1 ? (ws->count[1] > 0 ? 1.0 / ws->count[1] : 0.0)
                            : (ws->count[0] > 0 ? -1.0 / ws->count[0] : 0.0);
            double dot = 0;
            for (std::size_t c = 0; c < k; ++c) {
                double rv = 0;
                const double* v = proto.data() + c * d;
                for (std::size_t j = 0; j < d; ++j) rv += ri[j] * v[j];
                g[c] = params.a_x * (-2.0 * rv) + params.a_y * ws->dly_dp[i] * score[c] +
                       params.a_z * sign_k[c] * group_term;
                dot += g[c] * mi[c];
                out_grad->d_label_score[c] += params.a_y * ws->dly_dp[i] * mi[c];
            }
            for (std::size_t c = 0; c < k; ++c) {
                double b = mi[c] * (g[c] - dot);
                const double* v = proto.data() + c * d;
                double* dv = out_grad->d_prototypes.data() + c * d;
                for (std::size_t j = 0; j < d; ++j)
                    dv[j] += 2.0 * b * (zi[j] - v[j]) - 2.0 * params.a_x * mi[c] * ri[j];
            }
        }
    }
    return total;
}

TabularDataset standardized_view(const TabularDataset& ds, const std::vector<double>& center,
                                 const std::vector<double>& scale) {
    TabularDataset z = ds;
    for (std::size_t i = 0; i < ds.n_rows; ++i)
        for (std::size_t j = 0; j < ds.n_cols; ++j)
            z.x[i * ds.n_cols + j] = (ds.at(i, j) - center[j]) / scale[j];
    return z;
}

}  // namespace

FairRepLoss fair_rep_loss(const TabularDataset& z, const std::vector<double>& prototypes,
                          const std::vector<double>& label_score, const FairRepParams& params) {
    if (params.k < 1 || static_cast<std::size_t>(params.k) * z.n_cols != prototypes.size())
        throw ConfigError("prototypes", "prototype matrix must be k x n_cols");
    if (label_score.size() != static_cast<std::size_t>(params.k))
        throw ConfigError("label_score", "need one label score per prototype");
    Workspace ws;
    FairRepLoss loss;
    eval_loss(z, prototypes, label_score, params, &ws, &loss);
    return loss;
}

FairRepModel fair_rep_fit(const TabularDataset& train, const FairRepParams& params,
                          std::uint64_t seed) {
    std::size_t n = train.n_rows, d = train.n_cols;
    auto k = static_cast<std::size_t>(params.k);
    if (params.k < 1) throw ConfigError("k", "need at least one prototype");
    if (k > n) throw ConfigError("k", "more prototypes than training rows");
    if (params.a_x < 0 || params.a_y < 0 || params.a_z < 0)
        throw ConfigError("loss_weights", "loss weights must be nonnegative");

    FairRepModel model;
    model.params = params;
    model.seed = seed;
    model.center.assign(d, 0.0);
    model.scale.assign(d, 1.0);
    for (std::size_t j = 0; j < d; ++j) {
        double mean = 0;
        for (std::size_t i = 0; i < n; ++i) mean += train.at(i, j);
        mean /= static_cast<double>(n);
        double var = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double c = train.at(i, j) - mean;
            var += c * c;
        }
        var /= static_cast<double>(n);
        model.center[j] = mean;
        model.scale[j] = var > 0 ? std::sqrt(var) : 1.0;
    }

    TabularDataset z = standardized_view(train, model.center, model.scale);

    // Prototypes start at k distinct training rows plus a small jitter so
    // coincident rows cannot produce tied prototypes.  Each prototype's
    // label score starts near its anchor row's label: an uninformative 0.5
    // start lets imbalanced data pull every score to the same side of the
    // decision threshold before the label-fit term can differentiate them.
    Rng rng(seed);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    std::vector<double> proto(k * d);
    std::vector<double> score(k);
    for (std::size_t c = 0; c < k; ++c) {
        const double* row = z.row(order[c]);
        for (std::size_t j = 0; j < d; ++j)
            proto[c * d + j] = row[j] + 0.02 * (rng.next_double() - 0.5);
        score[c] = (train.y[order[c]] == 1 ? 0.9 : 0.1) + 0.02 * (rng.next_double() - 0.5);
    }

    Workspace ws;
    double loss = eval_loss(z, proto, score, params, &ws, nullptr);
    model.loss_trace.push_back(loss);

    FairRepLoss grad;
    std::vector<double> cand_proto(k * d), cand_score(k);
    double step = 1e-3;
    for (int iter = 0; iter < params.max_iter; ++iter) {
        eval_loss(z, proto, score, params, &ws, &grad);
        if (!std::isfinite(grad.total))
            throw NumericError("diverged", "representation loss became non-finite at iteration " +
                                               std::to_string(iter) + " (step " +
                                               std::to_string(step) + ")");

        bool accepted = false;
        double t = step;
        for (int half = 0; half < 40; ++half) {
            for (std::size_t idx = 0; idx < proto.size(); ++idx)
                cand_proto[idx] = proto[idx] - t * grad.d_prototypes[idx];
            for (std::size_t c = 0; c < k; ++c)
                cand_score[c] = std::clamp(score[c] - t * grad.d_label_score[c], 0.0, 1.0);
            double cand_loss = eval_loss(z, cand_proto, cand_score, params, &ws, nullptr);
            if (!std::isfinite(cand_loss))
                throw NumericError("diverged",
                                   "representation loss became non-finite at iteration " +
                                       std::to_string(iter) + " (step " + std::to_string(t) + ")");
            if (cand_loss < loss) {
                double decrease = loss - cand_loss;
                proto.swap(cand_proto);
                score.swap(cand_score);
                loss = cand_loss;
                model.loss_trace.push_back(loss);
                step = half == 0 ? t * 1.25 : t;
                accepted = true;
                model.iterations = iter + 1;
                if (decrease <= params.tol) iter = params.max_iter;  // converged
                break;
            }
            t *= 0.5;
        }
        if (!accepted) break;  // no descent direction at any step size
    }

    model.prototypes = std::move(proto);
    model.label_score = std::move(score);
    return model;
}

TabularDataset fair_rep_transform(const FairRepModel& model, const TabularDataset& ds) {
    std::size_t d = ds.n_cols;
    auto k = static_cast<std::size_t>(model.params.k);
    if (model.center.size() != d)
        throw DataError("shape", "column count does not match the fitted model");

    TabularDataset out = ds;
    std::vector<double> a(k), m(k);
    for (std::size_t i = 0; i < ds.n_rows; ++i) {
        double amax = -1e300;
        for (std::size_t c = 0; c < k; ++c) {
            double dist = 0;
            for (std::size_t j = 0; j < d; ++j) {
                double zij = (ds.at(i, j) - model.center[j]) / model.scale[j];
                double diff = zij - model.prototypes[c * d + j];
                dist += diff * diff;
            }
            a[c] = -dist;
            amax = std::max(amax, a[c]);
        }
        double norm = 0;
        for (std::size_t c = 0; c < k; ++c) {
            m[c] = std::exp(a[c] - amax);
            norm += m[c];
        }
        double p = 0;
        for (std::size_t c = 0; c < k; ++c) {
            m[c] /= norm;
            p += m[c] * model.label_score[c];
        }
        for (std::size_t j = 0; j < d; ++j) {
            double zhat = 0;
            for (std::size_t c = 0; c < k; ++c) zhat += m[c] * model.prototypes[c * d + j];
            out.x[i * d + j] = zhat * model.scale[j] + model.center[j];
        }
        out.y[i] = p >= 0.5 ? 1 : 0;
    }
    // Reconstructed columns are real-valued regardless of their source kind.
    for (auto& col : out.schema) {
        col.kind = ColumnKind::Continuous;
        col.categories.clear();
        col.bin_edges.clear();
        col.bin_means.clear();
    }
    return out;
}

}  // namespace fairboost
