#include <algorithm>
#include <cmath>

#include "fairboost/errors.hpp"
#include "fairboost/models.hpp"

// Weighted ridge logistic regression.
//
// Objective (to be minimized):
//   J(b0, b) = sum_i w_i * log(1 + exp(-m_i)) + (lambda/2) * |b|^2
// where m_i = (2 y_i - 1) * (b0 + b . z_i) and z_i is the standardized
// feature row.  Newton steps solve H d = -g with H = Z' diag(w p (1-p)) Z
// + lambda (excluding the intercept), with a small adaptive ridge if the
// Cholesky factorization stalls, and a halving line search so the recorded
// objective never increases.  Convergence is declared when the gradient
// sup-norm drops below tol * max(1, total weight).

namespace fairboost {

namespace {

/// Solve A x = b for symmetric positive definite A (in place Cholesky).
/// Returns false if a pivot is not positive.
bool cholesky_solve(std::vector<double>& a, std::vector<double>& b, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) {
        double d = a[j * n + j];
        for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
        if (!(d > 0.0)) return false;
        double l = std::sqrt(d);
        a[j * n + j] = l;
        for (std::size_t i = j + 1; i < n; ++i) {
            double v = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) v -= a[i * n + k] * a[j * n + k];
            a[i * n + j] = v / l;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {  // L z = b
        double v = b[i];
        for (std::size_t k = 0; k < i; ++k) v -= a[i * n + k] * b[k];
        b[i] = v / a[i * n + i];
    }
    for (std::size_t ii = n; ii > 0; --ii) {  // L' x = z
        std::size_t i = ii - 1;
        double v = b[i];
        for (std::size_t k = i + 1; k < n; ++k) v -= a[k * n + i] * b[k];
        b[i] = v / a[i * n + i];
    }
    return true;
}

double weighted_nll(const std::vector<double>& z, std::span<const int> y,
                    std::span<const double> w, const std::vector<double>& beta,
                    std::size_t n, std::size_t d, double lambda) {
    double j = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double eta = beta[0];
        const double* zi = z.data() + i * d;
        for (std::size_t k = 0; k < d; ++k) eta += beta[k + 1] * zi[k];
        double m = (y[i] == 1 ? eta : -eta);
        // log(1 + exp(-m)) computed stably for both signs
        j += w[i] * (m > 0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m)));
    }
    double pen = 0;
    for (std::size_t k = 1; k <= d; ++k) pen += beta[k] * beta[k];
    return j + 0.5 * lambda * pen;
}

}  // namespace

LogisticModel logistic_fit(MatrixView x, std::span<const int> y, std::span<const double> w,
                           const LogisticParams& params, std::span<const ColumnKind> kinds) {
    std::size_t n = x.rows, d = x.cols;
    if (y.size() != n || w.size() != n)
        throw DataError("shape", "labels/weights must match the row count");
    if (!kinds.empty() && kinds.size() != d)
        throw DataError("shape", "column kinds must match the column count");
    if (params.l2_lambda < 0) throw ConfigError("l2_lambda", "ridge strength must be >= 0");

    double total_w = 0, pos_w = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(w[i] > 0) || !std::isfinite(w[i]))
            throw DataError("weight", "weights must be strictly positive");
        total_w += w[i];
        if (y[i] == 1) pos_w += w[i];
    }
    if (pos_w == 0 || pos_w == total_w)
        throw NumericError("single_class", "training labels contain a single class");

    LogisticModel model;
    model.params = params;
    model.center.assign(d, 0.0);
    model.scale.assign(d, 1.0);

    // Weighted standardization (population variance) of the chosen columns.
    for (std::size_t jcol = 0; jcol < d; ++jcol) {
        if (!kinds.empty() && kinds[jcol] != ColumnKind::Continuous) continue;
        double mean = 0;
        for (std::size_t i = 0; i < n; ++i) mean += w[i] * x.at(i, jcol);
        mean /= total_w;
        double var = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double c = x.at(i, jcol) - mean;
            var += w[i] * c * c;
        }
        var /= total_w;
        model.center[jcol] = mean;
        model.scale[jcol] = var > 0 ? std::sqrt(var) : 1.0;
    }

    std::vector<double> z(n * d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t jcol = 0; jcol < d; ++jcol)
            z[i * d + jcol] = (x.at(i, jcol) - model.center[jcol]) / model.scale[jcol];

    std::vector<double> beta(d + 1, 0.0);
    double obj = weighted_nll(z, y, w, beta, n, d, params.l2_lambda);
    model.objective_trace.push_back(obj);

    std::vector<double> grad(d + 1), hess((d + 1) * (d + 1)), step(d + 1), cand(d + 1);

    for (int iter = 0; iter < params.max_iter; ++iter) {
        std::fill(grad.begin(), grad.end(), 0.0);
        std::fill(hess.begin(), hess.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double eta = beta[0];
            const double* zi = z.data() + i * d;
            for (std::size_t k = 0; k < d; ++k) eta += beta[k + 1] * zi[k];
            double pi = 1.0 / (1.0 + std::exp(-eta));
            double r = w[i] * (pi - (y[i] == 1 ? 1.0 : 0.0));
            double hw = std::max(w[i] * pi * (1.0 - pi), 1e-12 * w[i]);
            grad[0] += r;
            hess[0] += hw;
            for (std::size_t k = 0; k < d; ++k) {
                grad[k + 1] += r * zi[k];
                double hzk = hw * zi[k];
                hess[(k + 1) * (d + 1)] += hzk;  // column 0
                for (std::size_t l = 0; l <= k; ++l)
                    hess[(k + 1) * (d + 1) + (l + 1)] += hzk * zi[l];
            }
        }
        for (std::size_t k = 1; k <= d; ++k) {
            grad[k] += params.l2_lambda * beta[k];
            hess[k * (d + 1) + k] += params.l2_lambda;
        }
        // mirror the lower triangle
        for (std::size_t a = 0; a < d + 1; ++a)
            for (std::size_t b = a + 1; b < d + 1; ++b)
                hess[a * (d + 1) + b] = hess[b * (d + 1) + a];

        double gmax = 0;
        for (double g : grad) gmax = std::max(gmax, std::abs(g));
        if (gmax <= params.tol * std::max(1.0, total_w)) {
            model.converged = true;
            break;
        }

        // Newton direction, adding ridge to the Hessian until it factors.
        std::vector<double> h = hess;
        step = grad;
        double ridge = 0;
        while (!cholesky_solve(h, step, d + 1)) {
            ridge = ridge == 0 ? 1e-8 : ridge * 10;
            if (ridge > 1e6) throw NumericError("singular", "Newton system is singular");
            h = hess;
            for (std::size_t k = 0; k < d + 1; ++k) h[k * (d + 2)] += ridge;
            step = grad;
        }

        double t = 1.0;
        bool accepted = false;
        for (int half = 0; half < 40; ++half) {
            for (std::size_t k = 0; k < d + 1; ++k) cand[k] = beta[k] - t * step[k];
            double cobj = weighted_nll(z, y, w, cand, n, d, params.l2_lambda);
            if (cobj <= obj) {
                beta = cand;
                obj = cobj;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        model.iterations = iter + 1;
        if (!accepted) {
            model.converged = true;  // no descent possible: at a minimum
            break;
        }
        model.objective_trace.push_back(obj);
    }

    model.intercept = beta[0];
    model.coef.assign(beta.begin() + 1, beta.end());
    return model;
}

Prediction predict(const LogisticModel& model, MatrixView x, double threshold) {
    if (x.cols != model.coef.size())
        throw DataError("shape", "feature count does not match the fitted model");
    Prediction out;
    out.proba.resize(x.rows);
    out.labels.resize(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) {
        double eta = model.intercept;
        for (std::size_t j = 0; j < x.cols; ++j)
            eta += model.coef[j] * (x.at(i, j) - model.center[j]) / model.scale[j];
        double p = 1.0 / (1.0 + std::exp(-eta));
        out.proba[i] = p;
        out.labels[i] = p >= threshold ? 1 : 0;
    }
    return out;
}

}  // namespace fairboost
