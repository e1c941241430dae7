#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "booster.hpp"
#include "dataset.hpp"
#include "errors.hpp"
#include "matrix.hpp"

namespace lgbplus {

// ============================================================================
// Expanding-window evaluation
//
// Time-ordered data, strictly expanding training windows, models re-estimated
// on a fixed schedule. Direct h-step targets are the caller's responsibility
// (the target column arrives pre-shifted); `horizon` acts as the gap between
// the last usable training row and the forecast row. No information from
// rows beyond a window's train end enters its fit, by construction: fits see
// a row slice only.
// ============================================================================

struct WindowPlan {
    int first_train_end = 0; // rows [0, first_train_end) form the first window
    int refit_every = 1;     // periods between re-estimations
    int horizon = 1;         // gap: forecast row t trains on rows [0, t-horizon]
    int last_target = -1;    // last forecast row; -1 means the final row
};

struct EvalMethod {
    Hyper hyper;
    std::uint64_t seed = 0;
    int ensemble = 1;
    bool calibrate = true; // competition variant only
};

struct EvalOutput {
    std::vector<int> period;
    std::vector<double> actual;
    std::vector<double> forecast;
    std::vector<double> linear_comp;
    std::vector<double> tree_comp;
    double rmse = 0.0;
    std::optional<double> benchmark_rmse;
    std::optional<double> rmse_ratio;
};

namespace detail {

inline Dataset slice_rows(const Dataset& d, int end) {
    Dataset out;
    out.x = Matrix(end, d.n_cols());
    out.y.assign(d.y.begin(), d.y.begin() + end);
    for (int r = 0; r < end; ++r)
        for (int c = 0; c < d.n_cols(); ++c) out.x(r, c) = d.x(r, c);
    out.column_names = d.column_names;
    return out;
}

} // namespace detail

inline EvalOutput expanding_eval(const Dataset& data, const WindowPlan& plan,
                                 const EvalMethod& method,
                                 const std::vector<double>* benchmark = nullptr) {
    validate_dataset(data);
    const int n = data.n_rows();
    if (plan.horizon < 1) throw ConfigError("expanding_eval: horizon must be >= 1");
    if (plan.refit_every < 1)
        throw ConfigError("expanding_eval: refit_every must be >= 1");
    if (plan.first_train_end < 2)
        throw ConfigError("expanding_eval: first training window too small to fit");
    const int last = plan.last_target < 0 ? n - 1 : plan.last_target;
    if (last >= n) throw ConfigError("expanding_eval: last_target out of range");
    const int first_forecast = plan.first_train_end + plan.horizon - 1;
    if (first_forecast > last)
        throw ConfigError("expanding_eval: no forecastable rows in the plan");
    if (benchmark && static_cast<int>(benchmark->size()) != n)
        throw DataError("expanding_eval: benchmark column length mismatch");

    EvalOutput out;
    std::optional<Ensemble> model;
    int fitted_train_end = -1;

    for (int t = first_forecast; t <= last; ++t) {
        const bool refit_due = (t - first_forecast) % plan.refit_every == 0;
        if (refit_due || !model) {
            const int train_end = t - plan.horizon + 1;
            if (train_end > fitted_train_end) {
                const Dataset window = detail::slice_rows(data, train_end);
                model = fit_ensemble(window, method.hyper, method.ensemble,
                                     method.seed, method.calibrate);
                fitted_train_end = train_end;
            }
        }

        Matrix q(1, data.n_cols());
        for (int c = 0; c < data.n_cols(); ++c) q(0, c) = data.x(t, c);
        const auto parts = predict_decomposed(*model, q);

        out.period.push_back(t);
        out.actual.push_back(data.y[static_cast<std::size_t>(t)]);
        out.forecast.push_back(parts[0].sum());
        out.linear_comp.push_back(parts[0].linear);
        out.tree_comp.push_back(parts[0].tree);
    }

    double sse = 0.0;
    for (std::size_t i = 0; i < out.actual.size(); ++i) {
        const double e = out.actual[i] - out.forecast[i];
        sse += e * e;
    }
    out.rmse = std::sqrt(sse / static_cast<double>(out.actual.size()));

    if (benchmark) {
        double bse = 0.0;
        for (std::size_t i = 0; i < out.period.size(); ++i) {
            const double e =
                out.actual[i] -
                (*benchmark)[static_cast<std::size_t>(out.period[i])];
            bse += e * e;
        }
        out.benchmark_rmse = std::sqrt(bse / static_cast<double>(out.period.size()));
        out.rmse_ratio = out.rmse / *out.benchmark_rmse;
    }
    return out;
}

} // namespace lgbplus
