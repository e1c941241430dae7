#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dataset.hpp"
#include "errors.hpp"
#include "linear.hpp"
#include "matrix.hpp"
#include "rng.hpp"
#include "tree.hpp"

namespace lgbplus {

// ============================================================================
// Hybrid tree/linear boosting
//
// Two training loops over the same additive state:
//   competition — per step, draw a subsample, build a shallow-tree candidate
//     and a greedy univariate linear candidate, score both full candidate
//     models on a judge set (out-of-bag, validation, or training) and keep
//     the winner; ties go to the tree.
//   alternating — per cycle, T full-sample tree updates followed by one
//     full-sample greedy linear correction; no subsampling, no judging.
//
// Because every update is either a tree or a linear term, each forecast
// splits exactly into base + linear-channel + tree-channel.
// ============================================================================

enum class Variant { competition, alternating };
enum class JudgeSet { oob, validation, training };

inline std::string to_string(Variant v) {
    return v == Variant::competition ? "competition" : "alternating";
}
inline std::string to_string(JudgeSet j) {
    switch (j) {
    case JudgeSet::oob: return "oob";
    case JudgeSet::validation: return "validation";
    default: return "training";
    }
}

struct Hyper {
    Variant variant = Variant::competition;
    int steps = -1;       // M: boosting steps (competition) or cycles
                          // (alternating); -1 resolves to the variant default
    double eta = 0.1;     // competition learning rate
    double q = 0.75;      // competition row-subsample fraction
    double rho = 0.5;     // competition feature-subset fraction (linear candidate)
    JudgeSet judge = JudgeSet::oob;
    int patience = 0;     // early-stopping patience on a validation set; 0 = off
    int trees_per_cycle = 10; // T (alternating)
    double eta_tree = 0.1;    // alternating tree rate
    double eta_lin = 0.1;     // alternating linear rate; 0 disables the channel
    int max_depth = 3;
    int min_leaf = 5;
    bool standardize_target = true;

    static constexpr int default_competition_steps = 500;
    static constexpr int default_alternating_cycles = 50;

    int resolved_steps() const {
        if (steps != -1) return steps;
        return variant == Variant::competition ? default_competition_steps
                                               : default_alternating_cycles;
    }
};

enum class StepKind { tree, linear };

struct JudgeRecord {
    double loss_tree = 0.0;
    std::optional<double> loss_lin; // absent when the linear candidate was unavailable
    JudgeSet judge = JudgeSet::oob;
    bool linear_degenerate = false;
};

struct BoostStep {
    StepKind kind = StepKind::tree;
    std::variant<ShallowTree, LinearTerm> learner;
    double rate = 0.0;
    int step_index = 0;
    std::optional<JudgeRecord> judge;

    const ShallowTree& tree() const { return std::get<ShallowTree>(learner); }
    const LinearTerm& linear() const { return std::get<LinearTerm>(learner); }

    // Prediction in fit (standardized) space.
    double predict(std::span<const double> xs_row) const {
        if (kind == StepKind::tree) return tree().predict(xs_row);
        return predict_linear(linear(), xs_row);
    }
};

struct BoostModel {
    Variant variant = Variant::competition;
    double base = 0.0; // F_0 in fit space, the mean of the (standardized) target
    std::vector<BoostStep> steps;
    std::optional<double> calibration_beta;
    Hyper hyper;
    Standardizer standardizer;
    std::uint64_t seed = 0;
    std::vector<std::string> column_names;

    int n_features() const { return standardizer.n_cols(); }
};

struct Ensemble {
    std::vector<BoostModel> members;

    int size() const { return static_cast<int>(members.size()); }
};

struct DecomposedPrediction {
    double base = 0.0;
    double linear = 0.0;
    double tree = 0.0;

    double sum() const { return base + linear + tree; }
};

// ============================================================================
// Prediction
// ============================================================================

namespace detail {

inline void check_predict_input(const BoostModel& model, const Matrix& raw) {
    if (raw.cols != model.n_features())
        throw DataError("predict: expected " + std::to_string(model.n_features()) +
                        " columns, got " + std::to_string(raw.cols));
    if (!raw.all_finite()) throw DataError("predict: non-finite input value");
}

// Fit-space accumulation, calibration excluded.
inline double accumulate_fit_space(const BoostModel& model,
                                   std::span<const double> xs_row) {
    double acc = model.base;
    for (const BoostStep& s : model.steps) acc += s.rate * s.predict(xs_row);
    return acc;
}

inline DecomposedPrediction decompose_fit_space(const BoostModel& model,
                                                std::span<const double> xs_row) {
    DecomposedPrediction d;
    d.base = model.base;
    for (const BoostStep& s : model.steps) {
        const double v = s.rate * s.predict(xs_row);
        if (s.kind == StepKind::tree)
            d.tree += v;
        else
            d.linear += v;
    }
    return d;
}

inline double to_original_units(const BoostModel& model, double fit_space_pred) {
    const double beta = model.calibration_beta.value_or(1.0);
    double v = beta * fit_space_pred;
    if (model.standardizer.target_mean)
        v = v * *model.standardizer.target_std + *model.standardizer.target_mean;
    return v;
}

inline DecomposedPrediction to_original_units(const BoostModel& model,
                                              const DecomposedPrediction& d) {
    const double beta = model.calibration_beta.value_or(1.0);
    DecomposedPrediction out{beta * d.base, beta * d.linear, beta * d.tree};
    if (model.standardizer.target_mean) {
        const double sd = *model.standardizer.target_std;
        out.base = out.base * sd + *model.standardizer.target_mean;
        out.linear *= sd;
        out.tree *= sd;
    }
    return out;
}

} // namespace detail

inline std::vector<double> predict(const BoostModel& model, const Matrix& raw) {
    detail::check_predict_input(model, raw);
    const Matrix xs = model.standardizer.apply(raw);
    std::vector<double> out(static_cast<std::size_t>(raw.rows));
    for (int r = 0; r < raw.rows; ++r)
        out[static_cast<std::size_t>(r)] =
            detail::to_original_units(model, detail::accumulate_fit_space(model, xs.row(r)));
    return out;
}

inline std::vector<DecomposedPrediction> predict_decomposed(const BoostModel& model,
                                                            const Matrix& raw) {
    detail::check_predict_input(model, raw);
    const Matrix xs = model.standardizer.apply(raw);
    std::vector<DecomposedPrediction> out(static_cast<std::size_t>(raw.rows));
    for (int r = 0; r < raw.rows; ++r)
        out[static_cast<std::size_t>(r)] =
            detail::to_original_units(model, detail::decompose_fit_space(model, xs.row(r)));
    return out;
}

inline std::vector<double> predict(const Ensemble& ens, const Matrix& raw) {
    if (ens.members.empty()) throw ConfigError("predict: empty ensemble");
    std::vector<double> acc(static_cast<std::size_t>(raw.rows), 0.0);
    for (const BoostModel& m : ens.members) {
        const auto p = predict(m, raw);
        for (std::size_t i = 0; i < p.size(); ++i) acc[i] += p[i];
    }
    const double inv = 1.0 / static_cast<double>(ens.members.size());
    for (double& v : acc) v *= inv;
    return acc;
}

inline std::vector<DecomposedPrediction> predict_decomposed(const Ensemble& ens,
                                                            const Matrix& raw) {
    if (ens.members.empty()) throw ConfigError("predict: empty ensemble");
    std::vector<DecomposedPrediction> acc(static_cast<std::size_t>(raw.rows));
    for (const BoostModel& m : ens.members) {
        const auto p = predict_decomposed(m, raw);
        for (std::size_t i = 0; i < p.size(); ++i) {
            acc[i].base += p[i].base;
            acc[i].linear += p[i].linear;
            acc[i].tree += p[i].tree;
        }
    }
    const double inv = 1.0 / static_cast<double>(ens.members.size());
    for (auto& d : acc) {
        d.base *= inv;
        d.linear *= inv;
        d.tree *= inv;
    }
    return acc;
}

// Non-owning view addressing a single model or an ensemble uniformly.
class Predictor {
public:
    Predictor(const BoostModel& m) : single_(&m) {}
    Predictor(const Ensemble& e) : ensemble_(&e) {}

    std::vector<double> predict(const Matrix& raw) const {
        return single_ ? lgbplus::predict(*single_, raw)
                       : lgbplus::predict(*ensemble_, raw);
    }
    std::vector<DecomposedPrediction> predict_decomposed(const Matrix& raw) const {
        return single_ ? lgbplus::predict_decomposed(*single_, raw)
                       : lgbplus::predict_decomposed(*ensemble_, raw);
    }
    int n_features() const {
        return single_ ? single_->n_features()
                       : ensemble_->members.front().n_features();
    }

private:
    const BoostModel* single_ = nullptr;
    const Ensemble* ensemble_ = nullptr;
};

// ============================================================================
// Training loops
// ============================================================================

namespace detail {

// Linear candidate for one boosting step, with graceful degradation: constant
// (intercept-only) term when the residuals have zero variance, nullopt when
// no candidate column has variance on the fit rows.
inline std::optional<LinearTerm> linear_candidate(const Matrix& xs,
                                                  const std::vector<int>& rows,
                                                  const std::vector<double>& resid,
                                                  const std::vector<int>& candidates,
                                                  bool constant_when_degenerate) {
    const double mean_r = mean_of(resid);
    double srr = 0.0;
    for (double r : resid) {
        const double d = r - mean_r;
        srr += d * d;
    }
    if (!(srr > 0.0)) return fit_constant(rows, resid);
    if (rows.size() < 3) {
        if (constant_when_degenerate) return fit_constant(rows, resid);
        return std::nullopt;
    }
    const auto col = select_feature(xs, rows, resid, candidates);
    if (!col) {
        if (constant_when_degenerate) return fit_constant(rows, resid);
        return std::nullopt;
    }
    return fit_linear(xs, *col, rows, resid);
}

inline double judge_mse(const std::vector<double>& ys, const std::vector<double>& F,
                        const Matrix& xs, const std::vector<int>& judge_rows,
                        double rate, const ShallowTree* tree, const LinearTerm* lin) {
    double s = 0.0;
    for (int j : judge_rows) {
        const double cand = tree ? tree->predict(xs.row(j)) : predict_linear(*lin, xs.row(j));
        const double e = ys[static_cast<std::size_t>(j)] -
                         (F[static_cast<std::size_t>(j)] + rate * cand);
        s += e * e;
    }
    return s / static_cast<double>(judge_rows.size());
}

inline std::vector<int> all_rows(int n) {
    std::vector<int> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = i;
    return v;
}

} // namespace detail

// Algorithmic core of the competition variant. Residual state is maintained
// on all N rows; candidates are fit on the per-step subsample only.
// `validation_rows`, when given, are held out of every subsample and serve as
// the judge set (judge = validation) and/or the early-stopping monitor.
inline BoostModel fit_competition(const Dataset& data, Hyper hyper,
                                  std::uint64_t seed,
                                  const std::vector<int>& validation_rows = {}) {
    hyper.variant = Variant::competition;
    const int M = hyper.resolved_steps();
    if (M < 1) throw ConfigError("fit_competition: M must be >= 1");
    if (!(hyper.eta > 0.0)) throw ConfigError("fit_competition: eta must be > 0");
    if (!(hyper.q > 0.0) || hyper.q > 1.0)
        throw ConfigError("fit_competition: q must be in (0, 1]");
    if (!(hyper.rho > 0.0) || hyper.rho > 1.0)
        throw ConfigError("fit_competition: rho must be in (0, 1]");
    if (hyper.judge == JudgeSet::oob && hyper.q >= 1.0)
        throw ConfigError("fit_competition: OOB judging requires q < 1");
    if (hyper.judge == JudgeSet::validation && validation_rows.empty())
        throw ConfigError("fit_competition: validation judge needs validation rows");

    auto [standardizer, ds] = standardize_fit(data, hyper.standardize_target);
    const Matrix& xs = ds.x;
    const std::vector<double>& ys = ds.y;
    const int n = ds.n_rows();
    const int p = ds.n_cols();

    std::vector<char> is_validation(static_cast<std::size_t>(n), 0);
    for (int v : validation_rows) {
        if (v < 0 || v >= n)
            throw ConfigError("fit_competition: validation row out of range");
        is_validation[static_cast<std::size_t>(v)] = 1;
    }
    std::vector<int> eligible;
    for (int i = 0; i < n; ++i)
        if (!is_validation[static_cast<std::size_t>(i)]) eligible.push_back(i);
    if (static_cast<int>(eligible.size()) < 2)
        throw ConfigError("fit_competition: fewer than 2 trainable rows");

    BoostModel model;
    model.variant = Variant::competition;
    model.hyper = hyper;
    model.hyper.steps = M;
    model.standardizer = standardizer;
    model.seed = seed;
    model.column_names = data.column_names;
    model.base = mean_of(ys);

    std::vector<double> F(static_cast<std::size_t>(n), model.base);

    double best_val = std::numeric_limits<double>::infinity();
    int since_best = 0;

    for (int t = 1; t <= M; ++t) {
        const auto split = draw_subsample(
            static_cast<int>(eligible.size()), hyper.q,
            {seed, purpose::subsample, static_cast<std::uint64_t>(t), 0});

        std::vector<int> bag(split.in_bag.size());
        for (std::size_t i = 0; i < split.in_bag.size(); ++i)
            bag[i] = eligible[static_cast<std::size_t>(split.in_bag[i])];

        std::vector<double> resid(bag.size());
        for (std::size_t i = 0; i < bag.size(); ++i)
            resid[i] = ys[static_cast<std::size_t>(bag[i])] -
                       F[static_cast<std::size_t>(bag[i])];

        ShallowTree tree =
            fit_tree(xs, bag, resid, hyper.max_depth, hyper.min_leaf);

        const auto subset = draw_feature_subset(
            p, hyper.rho, {seed, purpose::feature_subset, static_cast<std::uint64_t>(t), 0});
        auto lin = detail::linear_candidate(xs, bag, resid, subset,
                                            /*constant_when_degenerate=*/false);

        std::vector<int> judge_rows;
        switch (hyper.judge) {
        case JudgeSet::oob:
            judge_rows.reserve(split.out_of_bag.size());
            for (int i : split.out_of_bag)
                judge_rows.push_back(eligible[static_cast<std::size_t>(i)]);
            break;
        case JudgeSet::validation:
            judge_rows = validation_rows;
            break;
        case JudgeSet::training:
            judge_rows = eligible;
            break;
        }

        JudgeRecord record;
        record.judge = hyper.judge;
        record.loss_tree =
            detail::judge_mse(ys, F, xs, judge_rows, hyper.eta, &tree, nullptr);

        BoostStep step;
        step.rate = hyper.eta;
        step.step_index = t;
        if (lin) {
            record.loss_lin =
                detail::judge_mse(ys, F, xs, judge_rows, hyper.eta, nullptr, &*lin);
            if (record.loss_tree <= *record.loss_lin) {
                step.kind = StepKind::tree;
                step.learner = std::move(tree);
            } else {
                step.kind = StepKind::linear;
                step.learner = std::move(*lin);
            }
        } else {
            record.linear_degenerate = true;
            step.kind = StepKind::tree;
            step.learner = std::move(tree);
        }
        step.judge = record;

        for (int i = 0; i < n; ++i)
            F[static_cast<std::size_t>(i)] += step.rate * step.predict(xs.row(i));
        model.steps.push_back(std::move(step));

        if (hyper.patience > 0 && !validation_rows.empty()) {
            double s = 0.0;
            for (int v : validation_rows) {
                const double e = ys[static_cast<std::size_t>(v)] -
                                 F[static_cast<std::size_t>(v)];
                s += e * e;
            }
            const double val_mse = s / static_cast<double>(validation_rows.size());
            if (val_mse < best_val) {
                best_val = val_mse;
                since_best = 0;
            } else if (++since_best >= hyper.patience) {
                break;
            }
        }
    }
    return model;
}

// Algorithmic core of the alternating variant: per cycle, T sequential
// full-sample tree fits on the running residuals, then one full-sample greedy
// linear correction over all columns. eta_lin = 0 disables the linear channel
// entirely, reducing the model to plain tree boosting with M*T trees.
inline BoostModel fit_alternating(const Dataset& data, Hyper hyper,
                                  std::uint64_t seed) {
    hyper.variant = Variant::alternating;
    const int M = hyper.resolved_steps();
    if (M < 1) throw ConfigError("fit_alternating: M must be >= 1");
    if (hyper.trees_per_cycle < 1)
        throw ConfigError("fit_alternating: T must be >= 1");
    if (!(hyper.eta_tree > 0.0))
        throw ConfigError("fit_alternating: eta_tree must be > 0");
    if (hyper.eta_lin < 0.0)
        throw ConfigError("fit_alternating: eta_lin must be >= 0");

    auto [standardizer, ds] = standardize_fit(data, hyper.standardize_target);
    const Matrix& xs = ds.x;
    const std::vector<double>& ys = ds.y;
    const int n = ds.n_rows();

    BoostModel model;
    model.variant = Variant::alternating;
    model.hyper = hyper;
    model.hyper.steps = M;
    model.standardizer = standardizer;
    model.seed = seed;
    model.column_names = data.column_names;
    model.base = mean_of(ys);

    const std::vector<int> rows = detail::all_rows(n);
    const std::vector<int> all_cols = detail::all_rows(ds.n_cols());
    std::vector<double> F(static_cast<std::size_t>(n), model.base);
    std::vector<double> resid(static_cast<std::size_t>(n));

    int t = 0;
    for (int m = 1; m <= M; ++m) {
        for (int k = 0; k < hyper.trees_per_cycle; ++k) {
            for (int i = 0; i < n; ++i)
                resid[static_cast<std::size_t>(i)] =
                    ys[static_cast<std::size_t>(i)] - F[static_cast<std::size_t>(i)];
            ShallowTree tree =
                fit_tree(xs, rows, resid, hyper.max_depth, hyper.min_leaf);

            BoostStep step;
            step.kind = StepKind::tree;
            step.rate = hyper.eta_tree;
            step.step_index = ++t;
            step.learner = std::move(tree);
            for (int i = 0; i < n; ++i)
                F[static_cast<std::size_t>(i)] += step.rate * step.predict(xs.row(i));
            model.steps.push_back(std::move(step));
        }

        if (hyper.eta_lin == 0.0) continue; // disabled channel

        for (int i = 0; i < n; ++i)
            resid[static_cast<std::size_t>(i)] =
                ys[static_cast<std::size_t>(i)] - F[static_cast<std::size_t>(i)];
        auto lin = detail::linear_candidate(xs, rows, resid, all_cols,
                                            /*constant_when_degenerate=*/true);

        BoostStep step;
        step.kind = StepKind::linear;
        step.rate = hyper.eta_lin;
        step.step_index = ++t;
        step.learner = std::move(*lin);
        for (int i = 0; i < n; ++i)
            F[static_cast<std::size_t>(i)] += step.rate * step.predict(xs.row(i));
        model.steps.push_back(std::move(step));
    }
    return model;
}

inline BoostModel fit(const Dataset& data, const Hyper& hyper, std::uint64_t seed,
                      const std::vector<int>& validation_rows = {}) {
    return hyper.variant == Variant::competition
               ? fit_competition(data, hyper, seed, validation_rows)
               : fit_alternating(data, hyper, seed);
}

// ============================================================================
// Calibration
// ============================================================================

// No-intercept regression coefficient of y on yhat.
inline double calibration_beta(std::span<const double> yhat,
                               std::span<const double> y,
                               bool* degenerate = nullptr) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < yhat.size(); ++i) {
        num += yhat[i] * y[i];
        den += yhat[i] * yhat[i];
    }
    if (!(den > 0.0)) {
        if (degenerate) *degenerate = true;
        return 1.0;
    }
    if (degenerate) *degenerate = false;
    return num / den;
}

// Post-hoc scale correction, competition variant only: regress the training
// targets on the in-sample fit through the origin and store the slope. The
// regression runs in fit space, where both sides are standardized.
inline BoostModel calibrate(BoostModel model, const Dataset& data,
                            bool* degenerate = nullptr) {
    if (model.variant != Variant::competition)
        throw ConfigError("calibrate: only the competition variant is calibrated");
    validate_dataset(data);
    if (data.n_cols() != model.n_features())
        throw DataError("calibrate: data does not match the model's columns");

    const Matrix xs = model.standardizer.apply(data.x);
    const std::vector<double> ys = model.standardizer.apply_target(data.y);
    std::vector<double> yhat(static_cast<std::size_t>(data.n_rows()));
    for (int r = 0; r < data.n_rows(); ++r)
        yhat[static_cast<std::size_t>(r)] =
            detail::accumulate_fit_space(model, xs.row(r));
    model.calibration_beta = calibration_beta(yhat, ys, degenerate);
    return model;
}

// ============================================================================
// Ensembling
// ============================================================================

// E independent fits with member-derived seeds (member 0 keeps the base
// seed). Competition members are calibrated before averaging unless
// `apply_calibration` is false.
inline Ensemble fit_ensemble(const Dataset& data, const Hyper& hyper, int size,
                             std::uint64_t base_seed,
                             bool apply_calibration = true) {
    if (size < 1) throw ConfigError("fit_ensemble: size must be >= 1");
    Ensemble ens;
    ens.members.reserve(static_cast<std::size_t>(size));
    for (int e = 0; e < size; ++e) {
        BoostModel m = fit(data, hyper, member_seed(base_seed, e));
        if (apply_calibration && hyper.variant == Variant::competition)
            m = calibrate(std::move(m), data);
        ens.members.push_back(std::move(m));
    }
    return ens;
}

// ============================================================================
// Training summaries
// ============================================================================

struct FitSummary {
    int steps_total = 0;
    int tree_steps = 0;
    int linear_steps = 0;
    int degenerate_linear_steps = 0;
    double linear_share = 0.0;
    double in_sample_mse = 0.0;
};

inline FitSummary summarize_fit(const BoostModel& model, const Dataset& data) {
    FitSummary s;
    s.steps_total = static_cast<int>(model.steps.size());
    for (const BoostStep& st : model.steps) {
        if (st.kind == StepKind::tree)
            ++s.tree_steps;
        else
            ++s.linear_steps;
        if (st.judge && st.judge->linear_degenerate) ++s.degenerate_linear_steps;
        if (st.kind == StepKind::linear && st.linear().is_constant())
            ++s.degenerate_linear_steps;
    }
    if (s.steps_total > 0)
        s.linear_share =
            static_cast<double>(s.linear_steps) / static_cast<double>(s.steps_total);
    const auto yhat = predict(model, data.x);
    s.in_sample_mse = mse_of(yhat, data.y);
    return s;
}

} // namespace lgbplus
