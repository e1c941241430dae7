#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "errors.hpp"
#include "matrix.hpp"

namespace lgbplus {

// ============================================================================
// Greedy univariate linear update
//
// One boosting candidate: pick the column most absolutely correlated with the
// current residuals, fit a univariate OLS on the step's rows, apply with
// shrinkage. The stored fit statistics (mean_x, sxx, n_fit) make the exact
// hat-matrix row recoverable for observation-weight attribution.
// ============================================================================

struct LinearTerm {
    int column = -1; // -1 marks an intercept-only (constant) term
    double alpha = 0.0;
    double beta = 0.0;
    int n_fit = 0;
    double mean_x = 0.0;
    double sxx = 0.0; // sum of squared deviations of the fitted column
    std::vector<int> fit_rows;

    bool is_constant() const { return column < 0; }
};

inline double predict_linear(const LinearTerm& term, std::span<const double> x_row) {
    if (term.is_constant()) return term.alpha;
    const double v = x_row[static_cast<std::size_t>(term.column)];
    if (!std::isfinite(v))
        throw DataError("non-finite feature value in linear prediction");
    return term.alpha + term.beta * v;
}

namespace detail {

struct ColumnStats {
    double mean_x = 0.0;
    double sxx = 0.0;
    double sxr = 0.0;
};

inline ColumnStats column_stats(const Matrix& x, int col,
                                const std::vector<int>& rows,
                                const std::vector<double>& resid,
                                double mean_r) {
    ColumnStats st;
    double sx = 0.0;
    for (int r : rows) sx += x(r, col);
    st.mean_x = sx / static_cast<double>(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double dx = x(rows[i], col) - st.mean_x;
        st.sxx += dx * dx;
        st.sxr += dx * (resid[i] - mean_r);
    }
    return st;
}

} // namespace detail

// Candidate column maximizing |Corr(x_col, r)| over `rows` (resid[i] pairs
// with rows[i]). Pearson correlation with the sample (n-1) convention; the
// convention cancels in the argmax. Ties resolve to the lowest column index.
// Returns nullopt when the correlation is undefined for every candidate
// (all candidate columns degenerate, or the residuals have zero variance);
// the caller decides how to degrade.
inline std::optional<int> select_feature(const Matrix& x,
                                         const std::vector<int>& rows,
                                         const std::vector<double>& resid,
                                         const std::vector<int>& candidates) {
    if (candidates.empty()) throw ConfigError("select_feature: no candidates");
    if (rows.size() < 3)
        throw DataError("select_feature: needs at least 3 rows");
    if (resid.size() != rows.size())
        throw InternalError("select_feature: residual/row count mismatch");

    const double n1 = static_cast<double>(rows.size() - 1);
    const double mean_r = mean_of(resid);
    double srr = 0.0;
    for (double r : resid) {
        const double d = r - mean_r;
        srr += d * d;
    }
    if (!(srr > 0.0)) return std::nullopt;

    std::optional<int> best;
    double best_abs = -1.0;
    for (int c : candidates) {
        const auto st = detail::column_stats(x, c, rows, resid, mean_r);
        if (!(st.sxx > 0.0)) continue; // degenerate column on these rows
        const double corr = (st.sxr / n1) / std::sqrt((st.sxx / n1) * (srr / n1));
        const double a = std::abs(corr);
        if (a > best_abs) {
            best_abs = a;
            best = c;
        }
    }
    return best;
}

// Closed-form univariate OLS of the residuals on one column over `rows`.
inline LinearTerm fit_linear(const Matrix& x, int column,
                             const std::vector<int>& rows,
                             const std::vector<double>& resid) {
    if (rows.empty()) throw DataError("fit_linear: empty input");
    if (resid.size() != rows.size())
        throw InternalError("fit_linear: residual/row count mismatch");

    const double mean_r = mean_of(resid);
    const auto st = detail::column_stats(x, column, rows, resid, mean_r);
    if (!(st.sxx > 0.0))
        throw DataError("fit_linear: column has zero variance on the fit rows");

    LinearTerm t;
    t.column = column;
    t.beta = st.sxr / st.sxx;
    t.alpha = mean_r - t.beta * st.mean_x;
    t.n_fit = static_cast<int>(rows.size());
    t.mean_x = st.mean_x;
    t.sxx = st.sxx;
    t.fit_rows = rows;
    return t;
}

// Intercept-only fallback when no slope is fittable: predicts the residual
// mean; its weight row is uniform over the fit rows.
inline LinearTerm fit_constant(const std::vector<int>& rows,
                               const std::vector<double>& resid) {
    if (rows.empty()) throw DataError("fit_constant: empty input");
    LinearTerm t;
    t.column = -1;
    t.alpha = mean_of(resid);
    t.beta = 0.0;
    t.n_fit = static_cast<int>(rows.size());
    t.fit_rows = rows;
    return t;
}

// Hat-matrix row of the univariate regression evaluated at x_row:
// 1/n + (x_q - mean_x)(x_j - mean_x)/sxx on the fit rows, 0 elsewhere.
// Dot product with the fit-time residuals reproduces predict_linear.
inline std::vector<double> hat_weight_row(const LinearTerm& term,
                                          std::span<const double> x_row,
                                          const Matrix& x_train, int n_train) {
    if (term.fit_rows.empty())
        throw InternalError("hat_weight_row: term has no recorded fit rows");
    std::vector<double> w(static_cast<std::size_t>(n_train), 0.0);
    const double unif = 1.0 / static_cast<double>(term.n_fit);
    if (term.is_constant()) {
        for (int j : term.fit_rows) w[static_cast<std::size_t>(j)] = unif;
        return w;
    }
    const double dq = x_row[static_cast<std::size_t>(term.column)] - term.mean_x;
    for (int j : term.fit_rows) {
        const double dj = x_train(j, term.column) - term.mean_x;
        w[static_cast<std::size_t>(j)] = unif + dq * dj / term.sxx;
    }
    return w;
}

} // namespace lgbplus
