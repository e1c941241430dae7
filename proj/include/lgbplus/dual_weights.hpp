#pragma once

#include <algorithm>
#include <vector>

#include "booster.hpp"
#include "dataset.hpp"
#include "errors.hpp"
#include "matrix.hpp"

namespace lgbplus {

// ============================================================================
// Observation-weight attribution (alternating variant)
//
// Every forecast is expressed as a weighted combination of training targets.
// With W_0 the uniform 1/N matrix and H_t the step's weight rows (leaf
// averaging for trees, the univariate hat matrix for linear steps), the
// training weight state evolves as
//     W_t = W_{t-1} + rate_t * H_t * (I - W_{t-1}),
// and a query row carries w*_t = w*_{t-1} + rate_t * a_t(x) * (I - W_{t-1}).
// Each step's increment accumulates into the tree or the linear channel;
// W_0 is reported as its own base channel. Because every increment's row sums
// to zero, the weights apply to the *original* training targets even though
// the recursion runs in standardized space.
//
// The running state is dense N x N, which is fine for the few-hundred-row
// settings this targets; sizes above `max_weight_rows` are refused outright.
// ============================================================================

inline constexpr int max_weight_rows = 2048;

struct WeightMatrices {
    Matrix base;   // rows queried x N_train
    Matrix linear;
    Matrix tree;

    Matrix total() const {
        Matrix t = base;
        for (std::size_t i = 0; i < t.data.size(); ++i) t.data[i] += linear.data[i];
        for (std::size_t i = 0; i < t.data.size(); ++i) t.data[i] += tree.data[i];
        return t;
    }
};

namespace detail {

struct WeightReplay {
    WeightMatrices train;
    WeightMatrices query;
};

inline WeightReplay replay_weights(const BoostModel& model, const Dataset& train,
                                   const Matrix* query_raw) {
    if (model.variant != Variant::alternating)
        throw ConfigError("dual weights: observation-weight attribution is "
                          "implemented for the alternating variant only");
    validate_dataset(train);
    if (train.n_cols() != model.n_features())
        throw DataError("dual weights: training data does not match the model");
    const int n = train.n_rows();
    if (n > max_weight_rows)
        throw DataError("dual weights: training size " + std::to_string(n) +
                        " exceeds the dense-state limit of " +
                        std::to_string(max_weight_rows));

    const Matrix xs = model.standardizer.apply(train.x);
    Matrix xq;
    int n_query = 0;
    if (query_raw) {
        if (query_raw->cols != model.n_features())
            throw DataError("dual weights: query columns do not match the model");
        if (!query_raw->all_finite())
            throw DataError("dual weights: non-finite query value");
        xq = model.standardizer.apply(*query_raw);
        n_query = xq.rows;
    }

    const double unif = 1.0 / static_cast<double>(n);
    Matrix W(n, n, unif);      // running total weight state
    Matrix L(n, n, 0.0);       // linear-channel accumulator
    Matrix T(n, n, 0.0);       // tree-channel accumulator
    Matrix qL(n_query, n, 0.0);
    Matrix qT(n_query, n, 0.0);

    std::vector<int> train_leaf(static_cast<std::size_t>(n));
    std::vector<int> query_leaf(static_cast<std::size_t>(n_query));
    std::vector<double> incr(static_cast<std::size_t>(n));
    std::vector<double> row_u(static_cast<std::size_t>(n));
    std::vector<double> row_v(static_cast<std::size_t>(n));

    for (const BoostStep& step : model.steps) {
        const double rate = step.rate;
        if (step.kind == StepKind::tree) {
            const ShallowTree& tree = step.tree();
            // Leaf membership is recomputed by routing, so deserialized
            // models work the same as freshly fitted ones.
            for (int i = 0; i < n; ++i)
                train_leaf[static_cast<std::size_t>(i)] = tree.route(xs.row(i));
            for (int qi = 0; qi < n_query; ++qi)
                query_leaf[static_cast<std::size_t>(qi)] = tree.route(xq.row(qi));

            std::vector<std::vector<int>> buckets(tree.nodes.size());
            for (int i = 0; i < n; ++i)
                buckets[static_cast<std::size_t>(train_leaf[static_cast<std::size_t>(i)])]
                    .push_back(i);

            for (std::size_t leaf = 0; leaf < buckets.size(); ++leaf) {
                const auto& members = buckets[leaf];
                if (members.empty()) continue;
                const double share = 1.0 / static_cast<double>(members.size());

                // rate * (H_t - H_t W)[row in leaf]; identical for every
                // member of the leaf, so compute once.
                std::fill(incr.begin(), incr.end(), 0.0);
                for (int i : members) {
                    const double* wrow = &W.data[static_cast<std::size_t>(i) * n];
                    for (int j = 0; j < n; ++j)
                        incr[static_cast<std::size_t>(j)] += wrow[j];
                }
                for (int j = 0; j < n; ++j)
                    incr[static_cast<std::size_t>(j)] =
                        rate * (-share * incr[static_cast<std::size_t>(j)]);
                for (int i : members)
                    incr[static_cast<std::size_t>(i)] += rate * share;

                for (int i : members) {
                    double* wrow = &W.data[static_cast<std::size_t>(i) * n];
                    double* trow = &T.data[static_cast<std::size_t>(i) * n];
                    for (int j = 0; j < n; ++j) {
                        wrow[j] += incr[static_cast<std::size_t>(j)];
                        trow[j] += incr[static_cast<std::size_t>(j)];
                    }
                }
                for (int qi = 0; qi < n_query; ++qi) {
                    if (query_leaf[static_cast<std::size_t>(qi)] !=
                        static_cast<int>(leaf))
                        continue;
                    double* qrow = &qT.data[static_cast<std::size_t>(qi) * n];
                    for (int j = 0; j < n; ++j)
                        qrow[j] += incr[static_cast<std::size_t>(j)];
                }
            }
        } else {
            const LinearTerm& term = step.linear();
            if (term.n_fit != n)
                throw InternalError("dual weights: linear step was not fit on "
                                    "the full sample");

            // row_u = (1/n) 1' (I - W); row_v = d' (I - W) with d the fitted
            // column's deviations. A hat row at point z is then
            // u + (d_z / sxx) * v.
            for (int j = 0; j < n; ++j) row_u[static_cast<std::size_t>(j)] = 0.0;
            for (int i = 0; i < n; ++i) {
                const double* wrow = &W.data[static_cast<std::size_t>(i) * n];
                for (int j = 0; j < n; ++j)
                    row_u[static_cast<std::size_t>(j)] += wrow[j];
            }
            for (int j = 0; j < n; ++j)
                row_u[static_cast<std::size_t>(j)] =
                    unif * (1.0 - row_u[static_cast<std::size_t>(j)]);

            const bool constant = term.is_constant();
            if (!constant) {
                for (int j = 0; j < n; ++j) row_v[static_cast<std::size_t>(j)] = 0.0;
                for (int i = 0; i < n; ++i) {
                    const double di = xs(i, term.column) - term.mean_x;
                    const double* wrow = &W.data[static_cast<std::size_t>(i) * n];
                    for (int j = 0; j < n; ++j)
                        row_v[static_cast<std::size_t>(j)] -= di * wrow[j];
                }
                for (int j = 0; j < n; ++j)
                    row_v[static_cast<std::size_t>(j)] +=
                        xs(j, term.column) - term.mean_x;
            }

            // row_u/row_v already captured the pre-step W, so rows can be
            // updated in place.
            for (int i = 0; i < n; ++i) {
                const double scale =
                    constant ? 0.0 : (xs(i, term.column) - term.mean_x) / term.sxx;
                double* wrow = &W.data[static_cast<std::size_t>(i) * n];
                double* lrow = &L.data[static_cast<std::size_t>(i) * n];
                for (int j = 0; j < n; ++j) {
                    const double inc =
                        rate * (row_u[static_cast<std::size_t>(j)] +
                                scale * row_v[static_cast<std::size_t>(j)]);
                    lrow[j] += inc;
                    wrow[j] += inc;
                }
            }
            for (int qi = 0; qi < n_query; ++qi) {
                const double scale =
                    constant ? 0.0 : (xq(qi, term.column) - term.mean_x) / term.sxx;
                double* qrow = &qL.data[static_cast<std::size_t>(qi) * n];
                for (int j = 0; j < n; ++j)
                    qrow[j] += rate * (row_u[static_cast<std::size_t>(j)] +
                                       scale * row_v[static_cast<std::size_t>(j)]);
            }
        }
    }

    WeightReplay out;
    out.train.base = Matrix(n, n, unif);
    out.train.linear = std::move(L);
    out.train.tree = std::move(T);
    out.query.base = Matrix(n_query, n, unif);
    out.query.linear = std::move(qL);
    out.query.tree = std::move(qT);

    // Guarded path: the API never calibrates alternating models, but a
    // hand-built one scales cleanly. The linear/tree channels scale by beta;
    // the base channel absorbs the remaining (1-beta) pull toward the
    // training mean when the target was standardized.
    if (model.calibration_beta) {
        const double beta = *model.calibration_beta;
        const bool scale_base = !model.standardizer.target_mean.has_value();
        for (WeightMatrices* wm : {&out.train, &out.query}) {
            for (double& v : wm->linear.data) v *= beta;
            for (double& v : wm->tree.data) v *= beta;
            if (scale_base)
                for (double& v : wm->base.data) v *= beta;
        }
    }
    return out;
}

} // namespace detail

// Final training-row weight state (queried rows == training rows).
inline WeightMatrices train_weight_state(const BoostModel& model,
                                         const Dataset& train) {
    return detail::replay_weights(model, train, nullptr).train;
}

// Weight attribution for arbitrary query rows; the training recursion is
// replayed on demand.
inline WeightMatrices test_weights(const BoostModel& model, const Dataset& train,
                                   const Matrix& x_query) {
    return detail::replay_weights(model, train, &x_query).query;
}

// ============================================================================
// Window ranking
// ============================================================================

struct WindowEntry {
    int start = 0;
    double total = 0.0;
    double base = 0.0;
    double linear = 0.0;
    double tree = 0.0;
};

// Sliding-window sums of one query row's total weight over consecutive
// training indices, ranked descending; ties rank by lowest start index.
inline std::vector<WindowEntry> top_weighted_windows(const WeightMatrices& attr,
                                                     int row, int window) {
    const int n_train = attr.base.cols;
    if (window < 1) throw ConfigError("top_weighted_windows: window must be >= 1");
    if (window > n_train)
        throw ConfigError("top_weighted_windows: window exceeds training size");
    if (row < 0 || row >= attr.base.rows)
        throw ConfigError("top_weighted_windows: row out of range");

    std::vector<WindowEntry> entries;
    entries.reserve(static_cast<std::size_t>(n_train - window + 1));
    for (int start = 0; start + window <= n_train; ++start) {
        WindowEntry e;
        e.start = start;
        for (int j = start; j < start + window; ++j) {
            e.base += attr.base(row, j);
            e.linear += attr.linear(row, j);
            e.tree += attr.tree(row, j);
        }
        e.total = e.base + e.linear + e.tree;
        entries.push_back(e);
    }
    std::stable_sort(entries.begin(), entries.end(),
                     [](const WindowEntry& a, const WindowEntry& b) {
                         return a.total > b.total;
                     });
    return entries;
}

} // namespace lgbplus
