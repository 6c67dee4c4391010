#include <algorithm>
#include <cmath>
#include <numeric>

#include "fairboost/errors.hpp"
#include "fairboost/preprocess.hpp"
#include "fairboost/rng.hpp"

// Learned probabilistic map on a discretized domain.
//
// Every feature column must expose a finite cell count (categorical,
// binary, or binned continuous).  A "point" is (feature cells, label); the
// map T gives, for each (group, label, cell) row, a distribution over
// target (label', cell') points.  The fit minimizes the summed per-group
// total-variation distance between the mapped distribution and the original
// one, subject to
//   * a group-parity constraint: each group's mapped favorable rate may
//     deviate from the pooled mapped rate by at most epsilon (relative),
//   * a per-row distortion constraint: the expected distortion of each
//     occurring (cell, label, group) row is at most the cap, where the
//     default distortion charges 1 for a label flip plus the fraction of
//     feature cells changed,
//   * row-stochasticity: each row of T is a probability vector.
//
// The solver is deterministic projected gradient descent on the row
// simplices with a quadratic penalty on the two constraint families,
// backtracking on the merit function and escalating the penalty weight
// when descent stalls.  Each candidate iterate (the identity map is
// iterate zero) is pushed through a repair step - exact per-row projection
// onto the distortion polytope by bisection, then the smallest mix toward
// the pooled distribution that restores rate parity, alternated a few
// times - and certified against the true constraints.  The best certified
// iterate by objective value is kept; if none certifies within the budget
// the fit fails with the most nearly satisfied iterate's worst constraint
// in the message.

namespace fairboost {

namespace {

struct Domain {
    std::vector<std::size_t> counts;      // cells per feature column
    std::vector<std::size_t> strides;     // mixed-radix strides
    std::size_t n_cells = 1;              // product of counts
    std::vector<std::vector<int>> digits; // decode table: cell -> per-column digit

    static Domain build(const std::vector<ColumnSchema>& schema, std::size_t limit) {
        Domain d;
        for (const auto& col : schema) {
            std::size_t c = col.cell_count();
            if (c == 0)
                throw ConfigError("domain", "column '" + col.name +
                                                "' is continuous and not discretized");
            d.counts.push_back(c);
            d.strides.push_back(d.n_cells);
            if (c > limit / std::max<std::size_t>(d.n_cells, 1))
                throw ConfigError("domain", "discretized domain exceeds the cell limit of " +
                                                std::to_string(limit));
            d.n_cells *= c;
        }
        if (d.n_cells > limit)
            throw ConfigError("domain", "discretized domain exceeds the cell limit of " +
                                            std::to_string(limit));
        d.digits.assign(d.n_cells, std::vector<int>(d.counts.size()));
        for (std::size_t cell = 0; cell < d.n_cells; ++cell) {
            std::size_t rest = cell;
            for (std::size_t j = 0; j < d.counts.size(); ++j) {
                d.digits[cell][j] = static_cast<int>(rest % d.counts[j]);
                rest /= d.counts[j];
            }
        }
        return d;
    }

    std::size_t encode(const TabularDataset& ds, std::size_t row) const {
        std::size_t cell = 0;
        for (std::size_t j = 0; j < counts.size(); ++j) {
            double v = ds.at(row, j);
            auto digit = static_cast<long long>(v);
            if (v != std::floor(v) || digit < 0 ||
                digit >= static_cast<long long>(counts[j]))
                throw DataError("domain", "row " + std::to_string(row) + " column '" +
                                              ds.schema[j].name + "' holds " +
                                              std::to_string(v) + ", not a valid cell index");
            cell += static_cast<std::size_t>(digit) * strides[j];
        }
        return cell;
    }
};

double default_distortion(const std::vector<int>& a, int ya, const std::vector<int>& b, int yb) {
    double d = ya == yb ? 0.0 : 1.0;
    if (!a.empty()) {
        int changed = 0;
        for (std::size_t j = 0; j < a.size(); ++j) changed += a[j] != b[j];
        d += static_cast<double>(changed) / static_cast<double>(a.size());
    }
    return d;
}

/// Distortion between points, materialized when small enough.
struct Distortion {
    const Domain& dom;
    std::function<double(const std::vector<int>&, int, const std::vector<int>&, int)> fn;
    std::vector<double> table;  // (2C)^2 when materialized
    std::size_t c2 = 0;         // 2 * n_cells

    Distortion(const Domain& d, const DistMapParams& params) : dom(d) {
        fn = params.distortion ? params.distortion : default_distortion;
        c2 = 2 * dom.n_cells;
        if (c2 * c2 <= std::size_t{20'000'000}) {
            table.resize(c2 * c2);
            for (std::size_t a = 0; a < c2; ++a)
                for (std::size_t b = 0; b < c2; ++b)
                    table[a * c2 + b] = fn(dom.digits[a % dom.n_cells],
                                           static_cast<int>(a / dom.n_cells),
                                           dom.digits[b % dom.n_cells],
                                           static_cast<int>(b / dom.n_cells));
        }
    }

    double at(std::size_t a, std::size_t b) const {
        if (!table.empty()) return table[a * c2 + b];
        return fn(dom.digits[a % dom.n_cells], static_cast<int>(a / dom.n_cells),
                  dom.digits[b % dom.n_cells], static_cast<int>(b / dom.n_cells));
    }
};

/// Euclidean projection onto the probability simplex (Duchi et al.).
void project_simplex(double* v, std::size_t n, std::vector<double>& scratch) {
    scratch.assign(v, v + n);
    std::sort(scratch.begin(), scratch.end(), std::greater<>());
    double acc = 0, theta = 0;
    std::size_t rho = 0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += scratch[i];
        double t = (acc - 1.0) / static_cast<double>(i + 1);
        if (scratch[i] - t > 0) {
            rho = i + 1;
            theta = t;
        }
    }
    (void)rho;
    for (std::size_t i = 0; i < n; ++i) v[i] = std::max(0.0, v[i] - theta);
}

struct FitState {
    FitState(const Domain& d, const Distortion& dl, const DistMapParams& p_)
        : dom(d), delta(dl), params(p_) {}

    const Domain& dom;
    const Distortion& delta;
    const DistMapParams& params;
    std::size_t c = 0, c2 = 0, rows = 0;
    std::vector<double> p[2];      // per-group distribution over (label,cell)
    double pi[2] = {0, 0};         // group mass shares
    std::vector<std::size_t> occ;  // occurring row indices
    std::vector<double> occ_mass;  // p_g(row point) for each occurring row

    static int group_of(std::size_t row, std::size_t c2) { return static_cast<int>(row / c2); }

    double objective(const std::vector<double>& t, std::vector<double> q[2]) const {
        double f = 0;
        for (int g = 0; g < 2; ++g) {
            q[g].assign(c2, 0.0);
            for (std::size_t oi = 0; oi < occ.size(); ++oi) {
                std::size_t r = occ[oi];
                if (group_of(r, c2) != g) continue;
                double mass = occ_mass[oi];
                const double* row = t.data() + r * c2;
                for (std::size_t cc = 0; cc < c2; ++cc) q[g][cc] += mass * row[cc];
            }
            for (std::size_t cc = 0; cc < c2; ++cc) f += 0.5 * std::abs(q[g][cc] - p[g][cc]);
        }
        return f;
    }

    void rates(const std::vector<double> q[2], double out_rate[2], double* pooled) const {
        for (int g = 0; g < 2; ++g) {
            out_rate[g] = 0;
            for (std::size_t cell = 0; cell < c; ++cell) out_rate[g] += q[g][c + cell];
        }
        *pooled = pi[0] * out_rate[0] + pi[1] * out_rate[1];
    }

    double row_distortion(const std::vector<double>& t, std::size_t r) const {
        std::size_t point = r % c2;
        const double* row = t.data() + r * c2;
        double e = 0;
        for (std::size_t cc = 0; cc < c2; ++cc)
            if (row[cc] > 0) e += row[cc] * delta.at(point, cc);
        return e;
    }
};

/// Project one row onto {t in simplex : t . d <= cap} by bisecting the
/// multiplier on the distortion direction.  d has a zero entry (the
/// diagonal), so the set is never empty for cap >= 0.
void project_row_distortion(double* row, std::size_t n, const FitState& st, std::size_t r,
                            double cap, std::vector<double>& scratch,
                            std::vector<double>& trial) {
    std::size_t point = r % st.c2;
    auto expected = [&](const double* t) {
        double e = 0;
        for (std::size_t cc = 0; cc < n; ++cc)
            if (t[cc] > 0) e += t[cc] * st.delta.at(point, cc);
        return e;
    };
    if (expected(row) <= cap) return;

    double lo = 0, hi = 1;
    trial.resize(n);
    auto attempt = [&](double lambda) {
        for (std::size_t cc = 0; cc < n; ++cc)
            trial[cc] = row[cc] - lambda * st.delta.at(point, cc);
        project_simplex(trial.data(), n, scratch);
        return expected(trial.data());
    };
    while (attempt(hi) > cap) {
        hi *= 2;
        if (hi > 1e12) break;  // cap unreachable (cannot happen with a zero diagonal)
    }
    for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        if (attempt(mid) > cap) lo = mid; else hi = mid;
    }
    attempt(hi);
    std::copy(trial.begin(), trial.end(), row);
}

DistMapCertificate certify(const FitState& st, const std::vector<double>& t, double epsilon,
                           double cap, double tol) {
    DistMapCertificate cert;
    // Row stochasticity over every row.
    for (std::size_t r = 0; r < st.rows; ++r) {
        double sum = 0;
        bool neg = false;
        const double* row = t.data() + r * st.c2;
        for (std::size_t cc = 0; cc < st.c2; ++cc) {
            sum += row[cc];
            neg = neg || row[cc] < -1e-12;
        }
        cert.max_row_error = std::max(cert.max_row_error, std::abs(sum - 1.0));
        if (neg) cert.max_row_error = std::max(cert.max_row_error, 1.0);
    }
    // Distortion on occurring rows.
    std::size_t worst_row = 0;
    for (std::size_t oi = 0; oi < st.occ.size(); ++oi) {
        double e = st.row_distortion(t, st.occ[oi]) - cap;
        if (e > cert.max_distortion_excess) {
            cert.max_distortion_excess = e;
            worst_row = st.occ[oi];
        }
    }
    cert.max_distortion_excess = std::max(cert.max_distortion_excess, 0.0);
    // Group rates.
    std::vector<double> q[2];
    st.objective(t, q);
    double rate[2], pooled = 0;
    st.rates(q, rate, &pooled);
    int worst_group = 0;
    for (int g = 0; g < 2; ++g) {
        double dev = pooled > 0 ? std::abs(rate[g] / pooled - 1.0)
                                : (rate[g] > 0 ? 1e300 : 0.0);
        if (dev > cert.max_rate_deviation) {
            cert.max_rate_deviation = dev;
            worst_group = g;
        }
    }

    cert.feasible = cert.max_row_error <= 1e-6 && cert.max_distortion_excess <= tol &&
                    cert.max_rate_deviation <= epsilon + tol;
    if (!cert.feasible) {
        if (cert.max_rate_deviation > epsilon + tol)
            cert.worst_constraint = "group " + std::to_string(worst_group) +
                                    " favorable rate deviates " +
                                    std::to_string(cert.max_rate_deviation) +
                                    " from the pooled rate (epsilon " + std::to_string(epsilon) + ")";
        else if (cert.max_distortion_excess > tol)
            cert.worst_constraint = "expected distortion of row " + std::to_string(worst_row) +
                                    " exceeds the cap by " +
                                    std::to_string(cert.max_distortion_excess);
        else
            cert.worst_constraint = "a map row is not a probability vector (error " +
                                    std::to_string(cert.max_row_error) + ")";
    }
    return cert;
}

}  // namespace

DistMapModel dist_map_fit(const TabularDataset& train, const DistMapParams& params) {
    if (params.epsilon < 0) throw ConfigError("epsilon", "epsilon must be nonnegative");
    if (params.distortion_cap < 0) throw ConfigError("distortion_cap", "cap must be nonnegative");

    Domain dom = Domain::build(train.schema, params.domain_limit);
    std::size_t c = dom.n_cells, c2 = 2 * c, rows = 2 * c2;
    if (rows * c2 > std::size_t{200'000'000})
        throw ConfigError("domain", "discretized domain too large for a dense map (" +
                                        std::to_string(c) + " cells)");

    Distortion delta(dom, params);
    FitState st{dom, delta, params};
    st.c = c;
    st.c2 = c2;
    st.rows = rows;

    // Weighted empirical distributions per group.
    st.p[0].assign(c2, 0.0);
    st.p[1].assign(c2, 0.0);
    double mass[2] = {0, 0};
    for (std::size_t i = 0; i < train.n_rows; ++i) {
        std::size_t point = static_cast<std::size_t>(train.y[i]) * c + dom.encode(train, i);
        st.p[train.s[i]][point] += train.w[i];
        mass[train.s[i]] += train.w[i];
    }
    if (mass[0] == 0 || mass[1] == 0)
        throw DataError("group", "both groups must be present to fit the map");
    double total = mass[0] + mass[1];
    st.pi[0] = mass[0] / total;
    st.pi[1] = mass[1] / total;
    for (int g = 0; g < 2; ++g)
        for (auto& v : st.p[g]) v /= mass[g];
    for (int g = 0; g < 2; ++g)
        for (std::size_t point = 0; point < c2; ++point)
            if (st.p[g][point] > 0) {
                st.occ.push_back(static_cast<std::size_t>(g) * c2 + point);
                st.occ_mass.push_back(st.p[g][point]);
            }

    // Identity map is iterate zero.
    std::vector<double> t(rows * c2, 0.0);
    for (std::size_t r = 0; r < rows; ++r) t[r * c2 + r % c2] = 1.0;

    std::vector<double> scratch, trial;
    // Alternate two projections until both constraint families hold:
    // (1) per-row distortion caps, (2) group parity.  The parity step shifts
    // output mass between the two labels of the *same* feature cell -- the
    // cheapest possible move under any label-flip-dominated distortion, so
    // it perturbs step (1) as little as possible.  Each group's favorable
    // rate moves by a group-wide fraction, which costs exactly the rate
    // change in per-group total variation; the target rates come from a
    // one-dimensional scan over candidate pooled rates, clamping each
    // group's rate into the allowed band around the candidate and keeping
    // the cheapest assignment whose realized pooled rate still certifies.
    // (Moving both rates to the pooled rate is always such an assignment,
    // but one-sided moves that let the pooled rate drift toward the
    // untouched group are often strictly cheaper.)
    auto repair = [&](std::vector<double> cand) {
        for (int round = 0; round < 40; ++round) {
            for (std::size_t oi = 0; oi < st.occ.size(); ++oi)
                project_row_distortion(cand.data() + st.occ[oi] * c2, c2, st, st.occ[oi],
                                       params.distortion_cap, scratch, trial);
            std::vector<double> q[2];
            st.objective(cand, q);
            double rate[2], pooled;
            st.rates(q, rate, &pooled);
            double dev = 0;
            for (int g = 0; g < 2; ++g)
                if (pooled > 0) dev = std::max(dev, std::abs(rate[g] / pooled - 1.0));
            if (dev <= params.epsilon + params.constraint_tol * 0.5) break;

            // Rebalance fraction per group for a target rate, and whether
            // the move is expressible (also capped by the distortion budget
            // when the default flip-cost-one distortion is in effect).
            auto fraction = [&](int g, double target, double* phi) {
                if (target > rate[g]) {
                    if (rate[g] >= 1.0) return false;
                    *phi = (target - rate[g]) / (1.0 - rate[g]);
                } else if (target < rate[g]) {
                    if (rate[g] <= 0.0) return false;
                    *phi = (rate[g] - target) / rate[g];
                } else {
                    *phi = 0.0;
                }
                return params.distortion || *phi <= params.distortion_cap + 1e-12;
            };

            double lo = std::min(rate[0], rate[1]), hi = std::max(rate[0], rate[1]);
            const int kGrid = 4000;
            double target[2] = {pooled, pooled};  // fallback: full equalization
            double best_cost = 1e300;
            for (int gi = 0; gi <= kGrid; ++gi) {
                double pstar = lo + (hi - lo) * gi / kGrid;
                double band_lo = (1.0 - params.epsilon) * pstar;
                double band_hi = std::min(1.0, (1.0 + params.epsilon) * pstar);
                double t01[2], phi[2];
                double realized = 0;
                for (int g = 0; g < 2; ++g) {
                    t01[g] = std::clamp(rate[g], band_lo, band_hi);
                    realized += st.pi[g] * t01[g];
                }
                bool ok = realized > 0
                              ? std::abs(t01[0] / realized - 1.0) <= params.epsilon &&
                                    std::abs(t01[1] / realized - 1.0) <= params.epsilon
                              : t01[0] == 0.0 && t01[1] == 0.0;
                if (!ok || !fraction(0, t01[0], &phi[0]) || !fraction(1, t01[1], &phi[1]))
                    continue;
                double cost = std::abs(t01[0] - rate[0]) + std::abs(t01[1] - rate[1]);
                if (cost < best_cost) {
                    best_cost = cost;
                    target[0] = t01[0];
                    target[1] = t01[1];
                }
                if (hi == lo) break;
            }

            for (std::size_t oi = 0; oi < st.occ.size(); ++oi) {
                std::size_t r = st.occ[oi];
                int g = static_cast<int>(r / c2);
                double* row = cand.data() + r * c2;
                if (target[g] > rate[g] && rate[g] < 1.0) {
                    // Raise: move a fraction of unfavorable output mass to
                    // the favorable label of the same cell.
                    double phi = (target[g] - rate[g]) / (1.0 - rate[g]);
                    for (std::size_t cell = 0; cell < c; ++cell) {
                        double moved = phi * row[cell];
                        row[cell] -= moved;
                        row[c + cell] += moved;
                    }
                } else if (target[g] < rate[g] && rate[g] > 0.0) {
                    double phi = (rate[g] - target[g]) / rate[g];
                    for (std::size_t cell = 0; cell < c; ++cell) {
                        double moved = phi * row[c + cell];
                        row[c + cell] -= moved;
                        row[cell] += moved;
                    }
                }
            }
        }
        return cand;
    };

    DistMapModel model;
    model.domain = train.schema;
    model.cell_counts = dom.counts;
    model.n_cells = c;
    model.params = params;

    bool have_best = false;
    double best_objective = 0;
    std::vector<double> best_map;
    DistMapCertificate best_cert;
    DistMapCertificate closest;  // least-violating, for the failure message
    double closest_score = 1e300;

    auto consider = [&](const std::vector<double>& cand) {
        DistMapCertificate cert =
            certify(st, cand, params.epsilon, params.distortion_cap, params.constraint_tol);
        std::vector<double> q[2];
        double f = st.objective(cand, q);
        if (cert.feasible) {
            if (!have_best || f < best_objective) {
                have_best = true;
                best_objective = f;
                best_map = cand;
                best_cert = cert;
            }
        } else {
            double score = cert.max_rate_deviation + cert.max_distortion_excess +
                           cert.max_row_error;
            if (score < closest_score) {
                closest_score = score;
                closest = cert;
            }
        }
    };

    consider(repair(t));

    // Penalized projected gradient descent.
    double rho = 10.0;
    std::vector<double> q[2];
    std::vector<double> grad(t.size());
    std::vector<double> cand(t.size());

    auto merit = [&](const std::vector<double>& tt, double penalty_weight) {
        double f = st.objective(tt, q);
        double rate[2], pooled;
        st.rates(q, rate, &pooled);
        double pen = 0;
        for (int g = 0; g < 2; ++g) {
            double dev = pooled > 0 ? std::abs(rate[g] / pooled - 1.0) : 0.0;
            double ex = std::max(0.0, dev - params.epsilon);
            pen += ex * ex;
        }
        for (std::size_t oi = 0; oi < st.occ.size(); ++oi) {
            double ex = std::max(0.0, st.row_distortion(tt, st.occ[oi]) - params.distortion_cap);
            pen += ex * ex;
        }
        return f + penalty_weight * pen;
    };

    double fm = merit(t, rho);
    double step = 0.5;
    for (int iter = 0; iter < params.max_iter; ++iter) {
        // Gradient of the merit at t (subgradients at the kinks).
        double f = st.objective(t, q);
        (void)f;
        double rate[2], pooled;
        st.rates(q, rate, &pooled);

        std::fill(grad.begin(), grad.end(), 0.0);
        for (std::size_t oi = 0; oi < st.occ.size(); ++oi) {
            std::size_t r = st.occ[oi];
            int g = FitState::group_of(r, c2);
            double massr = st.occ_mass[oi];
            double* gr = grad.data() + r * c2;

            // total-variation term
            for (std::size_t cc = 0; cc < c2; ++cc) {
                double diff = q[g][cc] - st.p[g][cc];
                gr[cc] += massr * 0.5 * (diff > 0 ? 1.0 : diff < 0 ? -1.0 : 0.0);
            }
            // rate-parity penalty
            if (pooled > 0) {
                for (int gg = 0; gg < 2; ++gg) {
                    double dev = rate[gg] / pooled - 1.0;
                    double ex = std::max(0.0, std::abs(dev) - params.epsilon);
                    if (ex == 0) continue;
                    double outer = rho * 2.0 * ex * (dev > 0 ? 1.0 : -1.0);
                    double drg = (gg == g ? massr : 0.0);
                    double drbar = st.pi[g] * massr;
                    double common = outer * (drg * pooled - rate[gg] * drbar) / (pooled * pooled);
                    for (std::size_t cell = 0; cell < c; ++cell) gr[c + cell] += common;
                }
            }
            // distortion penalty
            double ex = std::max(0.0, st.row_distortion(t, r) - params.distortion_cap);
            if (ex > 0) {
                std::size_t point = r % c2;
                for (std::size_t cc = 0; cc < c2; ++cc)
                    gr[cc] += rho * 2.0 * ex * delta.at(point, cc);
            }
        }

        bool accepted = false;
        double s = step;
        for (int half = 0; half < 25; ++half) {
            cand = t;
            for (std::size_t oi = 0; oi < st.occ.size(); ++oi) {
                std::size_t r = st.occ[oi];
                double* row = cand.data() + r * c2;
                const double* gr = grad.data() + r * c2;
                for (std::size_t cc = 0; cc < c2; ++cc) row[cc] -= s * gr[cc];
                project_simplex(row, c2, scratch);
            }
            double fc = merit(cand, rho);
            if (fc < fm - 1e-14) {
                t.swap(cand);
                fm = fc;
                step = half == 0 ? s * 1.5 : s;
                accepted = true;
                break;
            }
            s *= 0.5;
        }
        model.iterations = iter + 1;

        if (!accepted) {
            if (rho >= 1e8) break;  // stalled at the highest penalty
            rho *= 10.0;
            fm = merit(t, rho);
            step = std::max(step, 1e-3);
            continue;
        }
        if ((iter + 1) % 10 == 0) consider(repair(t));
    }
    consider(repair(t));

    if (!have_best)
        throw NumericError("infeasible", "no feasible map found within " +
                                             std::to_string(params.max_iter) +
                                             " iterations; closest iterate fails: " +
                                             closest.worst_constraint);

    model.map = std::move(best_map);
    model.objective = best_objective;
    model.certificate = best_cert;
    return model;
}

DistMapCertificate dist_map_certify(const DistMapModel& model, const TabularDataset& train) {
    Domain dom = Domain::build(model.domain, model.params.domain_limit);
    Distortion delta(dom, model.params);
    FitState st{dom, delta, model.params};
    st.c = dom.n_cells;
    st.c2 = 2 * dom.n_cells;
    st.rows = 2 * st.c2;
    st.p[0].assign(st.c2, 0.0);
    st.p[1].assign(st.c2, 0.0);
    double mass[2] = {0, 0};
    for (std::size_t i = 0; i < train.n_rows; ++i) {
        std::size_t point = static_cast<std::size_t>(train.y[i]) * dom.n_cells + dom.encode(train, i);
        st.p[train.s[i]][point] += train.w[i];
        mass[train.s[i]] += train.w[i];
    }
    double total = mass[0] + mass[1];
    for (int g = 0; g < 2; ++g) {
        st.pi[g] = total > 0 ? mass[g] / total : 0.0;
        if (mass[g] > 0)
            for (auto& v : st.p[g]) v /= mass[g];
    }
    for (int g = 0; g < 2; ++g)
        for (std::size_t point = 0; point < st.c2; ++point)
            if (st.p[g][point] > 0) {
                st.occ.push_back(static_cast<std::size_t>(g) * st.c2 + point);
                st.occ_mass.push_back(st.p[g][point]);
            }
    return certify(st, model.map, model.params.epsilon, model.params.distortion_cap,
                   model.params.constraint_tol);
}

TabularDataset dist_map_transform(const DistMapModel& model, const TabularDataset& ds,
                                  std::uint64_t seed) {
    Domain dom = Domain::build(model.domain, model.params.domain_limit);
    if (ds.n_cols != model.domain.size())
        throw DataError("shape", "column count does not match the fitted map");

    TabularDataset out = ds;
    out.schema = model.domain;
    std::size_t c = dom.n_cells, c2 = 2 * c;
    for (std::size_t i = 0; i < ds.n_rows; ++i) {
        std::size_t cell = dom.encode(ds, i);
        std::size_t r = (static_cast<std::size_t>(ds.s[i]) * 2 + static_cast<std::size_t>(ds.y[i])) * c +
                        cell;
        // Header-documented row order is (group*2+label)*n_cells+cell, which
        // is exactly group * c2 + label * c + cell.
        const double* row = model.map.data() + r * c2;

        Rng rng(derive_seed(seed, stage::kTransform, i));
        double u = rng.next_double();
        double acc = 0;
        std::size_t pick = c2 - 1;
        for (std::size_t cc = 0; cc < c2; ++cc) {
            acc += row[cc];
            if (u < acc) {
                pick = cc;
                break;
            }
        }

        int new_y = static_cast<int>(pick / c);
        std::size_t new_cell = pick % c;
        out.y[i] = new_y;
        for (std::size_t j = 0; j < dom.counts.size(); ++j) {
            int digit = dom.digits[new_cell][j];
            const auto& col = model.domain[j];
            double v = static_cast<double>(digit);
            if (col.kind == ColumnKind::Continuous && col.discretized())
                v = col.bin_means[static_cast<std::size_t>(digit)];
            out.x[i * ds.n_cols + j] = v;
        }
    }
    return out;
}

}  // namespace fairboost
