// Command-line front end: fit, predict, explain, weights, simulate, evaluate.
//
// Exit codes: 0 success, 2 config fault, 3 data fault, 4 internal invariant
// violation. All outputs (files and the stdout summary) are deterministic
// given the echoed configuration.

#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "lgbplus/lgbplus.hpp"

namespace lp = lgbplus;
using nlohmann::json;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_data = 3;
constexpr int exit_internal = 4;

lp::Variant parse_variant(const std::string& v) {
    if (v == "plus") return lp::Variant::competition;
    if (v == "alt") return lp::Variant::alternating;
    throw lp::ConfigError("unknown variant '" + v + "' (expected plus|alt)");
}

std::string variant_flag(lp::Variant v) {
    return v == lp::Variant::competition ? "plus" : "alt";
}

lp::JudgeSet parse_judge(const std::string& j) {
    if (j == "oob") return lp::JudgeSet::oob;
    if (j == "validation") return lp::JudgeSet::validation;
    if (j == "training") return lp::JudgeSet::training;
    throw lp::ConfigError("unknown judge '" + j +
                          "' (expected oob|validation|training)");
}

struct HyperFlags {
    std::string variant = "plus";
    int M = -1;
    double eta = 0.1;
    double q = 0.75;
    double rho = 0.5;
    std::string judge = "oob";
    int patience = 0;
    int T = 10;
    double eta_tree = 0.1;
    double eta_lin = 0.1;
    int max_depth = 3;
    int min_leaf = 5;
    bool no_standardize_target = false;

    lp::Hyper resolve() const {
        lp::Hyper h;
        h.variant = parse_variant(variant);
        h.steps = M;
        h.eta = eta;
        h.q = q;
        h.rho = rho;
        h.judge = parse_judge(judge);
        h.patience = patience;
        h.trees_per_cycle = T;
        h.eta_tree = eta_tree;
        h.eta_lin = eta_lin;
        h.max_depth = max_depth;
        h.min_leaf = min_leaf;
        h.standardize_target = !no_standardize_target;
        return h;
    }
};

void add_hyper_flags(CLI::App* cmd, HyperFlags& f) {
    cmd->add_option("--variant", f.variant, "Estimator variant: plus|alt")
        ->default_val("plus");
    cmd->add_option("--M", f.M,
                    "Boosting steps (plus) or cycles (alt); default 500 / 50");
    cmd->add_option("--eta", f.eta, "Learning rate (plus)")->default_val(0.1);
    cmd->add_option("--q", f.q, "Row-subsample fraction (plus)")->default_val(0.75);
    cmd->add_option("--rho", f.rho, "Feature-subset fraction for the linear candidate (plus)")
        ->default_val(0.5);
    cmd->add_option("--judge", f.judge, "Judge set: oob|validation|training")
        ->default_val("oob");
    cmd->add_option("--patience", f.patience,
                    "Early-stopping patience on the validation tail; 0 = off")
        ->default_val(0);
    cmd->add_option("--T", f.T, "Tree updates per cycle (alt)")->default_val(10);
    cmd->add_option("--eta_tree", f.eta_tree, "Tree learning rate (alt)")
        ->default_val(0.1);
    cmd->add_option("--eta_lin", f.eta_lin,
                    "Linear learning rate (alt); 0 disables the channel")
        ->default_val(0.1);
    cmd->add_option("--max_depth", f.max_depth, "Tree depth cap")->default_val(3);
    cmd->add_option("--min_leaf", f.min_leaf, "Minimum rows per leaf")->default_val(5);
    cmd->add_flag("--no_standardize_target", f.no_standardize_target,
                  "Leave the target unstandardized");
}

json hyper_json(const lp::Hyper& h) {
    return lp::detail::hyper_to_json(h);
}

void emit(const json& j) { std::cout << j.dump(2) << '\n'; }

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

struct FitArgs {
    std::string data_path, target, out_path, groups_path;
    HyperFlags hyper;
    std::uint64_t seed = 42;
    int ensemble = 1;
    bool no_calibrate = false;
    int validation_tail = 0;
};

int cmd_fit(const FitArgs& a) {
    lp::Dataset data = lp::load_dataset_csv(a.data_path, a.target);
    const lp::Hyper hyper = a.hyper.resolve();
    const bool calibrate = !a.no_calibrate;

    std::vector<int> validation;
    for (int i = data.n_rows() - a.validation_tail; i < data.n_rows(); ++i)
        if (i >= 0) validation.push_back(i);
    if (a.validation_tail > 0 && hyper.variant != lp::Variant::competition)
        throw lp::ConfigError("--validation_tail applies to the plus variant only");

    lp::Ensemble ens;
    for (int e = 0; e < a.ensemble; ++e) {
        lp::BoostModel m =
            hyper.variant == lp::Variant::competition
                ? lp::fit_competition(data, hyper, lp::member_seed(a.seed, e),
                                      validation)
                : lp::fit_alternating(data, hyper, lp::member_seed(a.seed, e));
        if (calibrate && hyper.variant == lp::Variant::competition)
            m = lp::calibrate(std::move(m), data);
        ens.members.push_back(std::move(m));
    }
    lp::save_ensemble_file(a.out_path, ens);

    int tree_steps = 0, linear_steps = 0, steps_total = 0;
    for (const auto& m : ens.members) {
        const auto s = lp::summarize_fit(m, data);
        tree_steps += s.tree_steps;
        linear_steps += s.linear_steps;
        steps_total += s.steps_total;
    }
    const auto yhat = lp::predict(ens, data.x);
    json summary{{"in_sample_mse", lp::mse_of(yhat, data.y)},
                 {"steps_total", steps_total},
                 {"tree_steps", tree_steps},
                 {"linear_steps", linear_steps},
                 {"linear_share", steps_total > 0
                                      ? static_cast<double>(linear_steps) /
                                            static_cast<double>(steps_total)
                                      : 0.0}};
    if (ens.members.size() == 1 && ens.members.front().calibration_beta)
        summary["calibration_beta"] = *ens.members.front().calibration_beta;

    emit(json{{"command", "fit"},
              {"config", json{{"data", a.data_path},
                              {"target", a.target},
                              {"out", a.out_path},
                              {"seed", a.seed},
                              {"ensemble", a.ensemble},
                              {"calibrate", calibrate},
                              {"validation_tail", a.validation_tail},
                              {"hyper", hyper_json(hyper)}}},
              {"summary", summary}});
    return exit_ok;
}

// ---------------------------------------------------------------------------
// predict
// ---------------------------------------------------------------------------

struct PredictArgs {
    std::string model_path, data_path, out_path;
    bool decompose = false;
};

// Reorders CSV columns to the model schema; missing columns are reported
// one by one.
lp::Matrix align_features(const lp::CsvTable& table,
                          const std::vector<std::string>& model_cols) {
    std::vector<int> idx;
    std::string missing;
    for (const auto& name : model_cols) {
        const int c = lp::find_column(table.header, name);
        if (c < 0)
            missing += (missing.empty() ? "" : ", ") + name;
        else
            idx.push_back(c);
    }
    if (!missing.empty())
        throw lp::DataError("input CSV is missing model columns: " + missing);
    lp::Matrix m(table.values.rows, static_cast<int>(idx.size()));
    for (int r = 0; r < m.rows; ++r)
        for (std::size_t c = 0; c < idx.size(); ++c)
            m(r, static_cast<int>(c)) = table.values(r, idx[c]);
    return m;
}

int cmd_predict(const PredictArgs& a) {
    const lp::ModelFile mf = lp::load_model_file(a.model_path);
    const lp::CsvTable table = lp::read_csv(a.data_path);
    const lp::Matrix x = align_features(table, mf.primary().column_names);

    std::ostringstream out;
    if (a.decompose) {
        const auto parts = mf.predictor().predict_decomposed(x);
        out << "row,forecast,base,linear,tree\n";
        for (int r = 0; r < x.rows; ++r) {
            const auto& d = parts[static_cast<std::size_t>(r)];
            out << r << ',' << lp::format_double(d.sum()) << ','
                << lp::format_double(d.base) << ',' << lp::format_double(d.linear)
                << ',' << lp::format_double(d.tree) << '\n';
        }
    } else {
        const auto yhat = mf.predictor().predict(x);
        out << "row,forecast\n";
        for (int r = 0; r < x.rows; ++r)
            out << r << ',' << lp::format_double(yhat[static_cast<std::size_t>(r)])
                << '\n';
    }
    lp::write_text_file(a.out_path, out.str());

    emit(json{{"command", "predict"},
              {"config", json{{"model", a.model_path},
                              {"data", a.data_path},
                              {"out", a.out_path},
                              {"decompose", a.decompose}}},
              {"rows", x.rows}});
    return exit_ok;
}

// ---------------------------------------------------------------------------
// explain
// ---------------------------------------------------------------------------

struct ExplainArgs {
    std::string model_path, data_path, target, out_path, groups_path;
    int repeats = 30;
    std::uint64_t seed = 42;
};

int cmd_explain(const ExplainArgs& a) {
    const lp::ModelFile mf = lp::load_model_file(a.model_path);
    lp::Dataset data = lp::load_dataset_csv(a.data_path, a.target);
    if (data.column_names != mf.primary().column_names)
        throw lp::DataError("evaluation CSV columns do not match the model");

    const lp::FeatureGroups groups =
        a.groups_path.empty() ? lp::singleton_groups(data)
                              : lp::read_group_file(a.groups_path, data.column_names);

    const auto report = lp::variable_importance(mf.predictor(), data, groups,
                                                a.repeats, a.seed);

    std::ostringstream out;
    out << "group,vi_total_mean,vi_total_std,vi_linear_mean,vi_trees_mean,"
           "cross_mean,n_repeats\n";
    for (const auto& g : report.groups) {
        out << g.group << ',' << lp::format_double(lp::mean_of_vec(g.vi_total))
            << ',' << lp::format_double(lp::std_of_vec(g.vi_total)) << ','
            << lp::format_double(lp::mean_of_vec(g.vi_linear)) << ','
            << lp::format_double(lp::mean_of_vec(g.vi_trees)) << ','
            << lp::format_double(lp::mean_of_vec(g.cross)) << ','
            << report.n_repeats << '\n';
    }
    lp::write_text_file(a.out_path, out.str());

    emit(json{{"command", "explain"},
              {"config", json{{"model", a.model_path},
                              {"data", a.data_path},
                              {"target", a.target},
                              {"groups", a.groups_path},
                              {"repeats", a.repeats},
                              {"seed", a.seed},
                              {"out", a.out_path}}},
              {"mse_baseline", report.mse_baseline},
              {"n_groups", report.groups.size()}});
    return exit_ok;
}

// ---------------------------------------------------------------------------
// weights
// ---------------------------------------------------------------------------

struct WeightsArgs {
    std::string model_path, train_path, target, query_path, out_path, windows_out;
    int window = 0;
};

int cmd_weights(const WeightsArgs& a) {
    const lp::ModelFile mf = lp::load_model_file(a.model_path);
    if (mf.is_ensemble)
        throw lp::ConfigError("weights: requires a single-model file (ensemble "
                              "attribution is not defined)");
    const lp::BoostModel& model = mf.primary();
    if (model.variant != lp::Variant::alternating)
        throw lp::ConfigError(
            "weights: competition-variant models are not supported; "
            "observation-weight attribution is implemented for the alternating "
            "variant only");

    lp::Dataset train = lp::load_dataset_csv(a.train_path, a.target);
    if (train.column_names != model.column_names)
        throw lp::DataError("training CSV columns do not match the model");

    lp::Matrix query;
    if (a.query_path.empty()) {
        query = train.x;
    } else {
        const lp::CsvTable qt = lp::read_csv(a.query_path);
        query = align_features(qt, model.column_names);
    }

    const lp::WeightMatrices attr = lp::test_weights(model, train, query);
    const lp::Matrix total = attr.total();

    // Master identity check before anything is written.
    const auto forecasts = lp::predict(model, query);
    double max_abs_forecast = 1.0;
    for (double f : forecasts) max_abs_forecast = std::max(max_abs_forecast, std::abs(f));
    const double tol = 1e-8 * max_abs_forecast;
    for (int r = 0; r < total.rows; ++r) {
        double dot = 0.0;
        for (int j = 0; j < total.cols; ++j)
            dot += total(r, j) * train.y[static_cast<std::size_t>(j)];
        if (std::abs(dot - forecasts[static_cast<std::size_t>(r)]) > tol)
            throw lp::InternalError(
                "weights: dual-weight identity violated on query row " +
                std::to_string(r));
    }

    const int n_train = total.cols;
    std::ostringstream out;
    out << "query_row,train_index,w_base,w_linear,w_tree,w_total";
    if (a.window > 0) out << ",w_total_ma";
    out << '\n';
    for (int r = 0; r < total.rows; ++r) {
        for (int j = 0; j < n_train; ++j) {
            out << r << ',' << j << ',' << lp::format_double(attr.base(r, j)) << ','
                << lp::format_double(attr.linear(r, j)) << ','
                << lp::format_double(attr.tree(r, j)) << ','
                << lp::format_double(total(r, j));
            if (a.window > 0) {
                // centered moving average, truncated at the edges
                const int half = a.window / 2;
                const int lo = std::max(0, j - half);
                const int hi = std::min(n_train - 1, j + half);
                double s = 0.0;
                for (int k = lo; k <= hi; ++k) s += total(r, k);
                out << ',' << lp::format_double(s / static_cast<double>(hi - lo + 1));
            }
            out << '\n';
        }
    }
    lp::write_text_file(a.out_path, out.str());

    if (a.window > 0 && !a.windows_out.empty()) {
        std::ostringstream wout;
        wout << "query_row,rank,start,w_total,w_base,w_linear,w_tree\n";
        for (int r = 0; r < total.rows; ++r) {
            const auto ranked = lp::top_weighted_windows(attr, r, a.window);
            for (std::size_t k = 0; k < ranked.size(); ++k) {
                const auto& e = ranked[k];
                wout << r << ',' << k << ',' << e.start << ','
                     << lp::format_double(e.total) << ','
                     << lp::format_double(e.base) << ','
                     << lp::format_double(e.linear) << ','
                     << lp::format_double(e.tree) << '\n';
            }
        }
        lp::write_text_file(a.windows_out, wout.str());
    }

    emit(json{{"command", "weights"},
              {"config", json{{"model", a.model_path},
                              {"train", a.train_path},
                              {"target", a.target},
                              {"query", a.query_path},
                              {"out", a.out_path},
                              {"windows_out", a.windows_out},
                              {"window", a.window}}},
              {"query_rows", total.rows},
              {"train_rows", n_train}});
    return exit_ok;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateArgs {
    std::string out_path, manifest_path;
    std::vector<std::string> dgps;
    std::vector<double> snrs{0.5, 1.0, 2.0};
    std::vector<int> ns{250, 500, 1000};
    std::vector<std::string> methods;
    int reps = 10;
    int n_test = 1000;
    std::uint64_t seed = 42;
    int ensemble = 5;
    bool noiseless = false;
};

int cmd_simulate(const SimulateArgs& a) {
    std::vector<std::string> dgps = a.dgps;
    if (dgps.empty())
        for (lp::DgpName d : lp::all_dgps()) dgps.push_back(lp::to_string(d));
    std::vector<std::string> methods =
        a.methods.empty() ? lp::bench_method_names() : a.methods;

    std::vector<lp::DgpSpec> grid;
    for (const auto& d : dgps)
        for (double snr : a.snrs)
            for (int n : a.ns) {
                lp::DgpSpec spec;
                spec.name = lp::dgp_from_string(d);
                spec.snr = snr;
                spec.n_train = n;
                spec.n_test = a.n_test;
                spec.n_reps = a.reps;
                spec.noiseless = a.noiseless;
                grid.push_back(spec);
            }

    lp::BenchMethodConfig cfg;
    cfg.ensemble = a.ensemble;
    const lp::BenchResult result = lp::run_bench(grid, methods, a.seed, cfg);

    std::ostringstream out;
    out << "dgp,snr,n,method,r2_mean,r2_std\n";
    for (const auto& c : result.cells) {
        out << c.dgp << ',' << lp::format_double(c.snr) << ',' << c.n << ','
            << c.method << ',';
        if (c.error.empty())
            out << lp::format_double(c.r2_mean) << ','
                << lp::format_double(c.r2_std) << '\n';
        else
            out << "error,error\n";
    }
    lp::write_text_file(a.out_path, out.str());

    json manifest{{"command", "simulate"},
                  {"seed", a.seed},
                  {"dgps", dgps},
                  {"snrs", a.snrs},
                  {"n_train", a.ns},
                  {"n_test", a.n_test},
                  {"reps", a.reps},
                  {"methods", methods},
                  {"ensemble", a.ensemble},
                  {"calibrate", cfg.calibrate},
                  {"noiseless", a.noiseless},
                  {"r2_definition", "1 - SSE/SST, SST about the test-set mean"},
                  {"hyper_competition", hyper_json(cfg.competition)},
                  {"hyper_alternating", hyper_json(cfg.alternating)},
                  {"out", a.out_path}};
    if (!a.manifest_path.empty())
        lp::write_text_file(a.manifest_path, manifest.dump(2) + "\n");

    json errors = json::array();
    for (const auto& c : result.cells)
        if (!c.error.empty())
            errors.push_back(json{{"dgp", c.dgp},
                                  {"snr", c.snr},
                                  {"n", c.n},
                                  {"method", c.method},
                                  {"error", c.error}});
    manifest["cell_errors"] = errors;
    emit(manifest);
    return exit_ok;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

struct EvaluateArgs {
    std::string data_path, target, out_path, benchmark_col;
    HyperFlags hyper;
    int first_train_end = 0;
    int refit_every = 8;
    int horizon = 1;
    int last_target = -1;
    std::uint64_t seed = 42;
    int ensemble = 1;
    bool no_calibrate = false;
};

int cmd_evaluate(const EvaluateArgs& a) {
    const lp::CsvTable table = lp::read_csv(a.data_path);
    std::vector<std::string> drop;
    std::vector<double> benchmark;
    const bool has_benchmark = !a.benchmark_col.empty();
    if (has_benchmark) {
        const int c = lp::find_column(table.header, a.benchmark_col);
        if (c < 0)
            throw lp::DataError("benchmark column '" + a.benchmark_col +
                                "' not found in CSV header");
        for (int r = 0; r < table.values.rows; ++r)
            benchmark.push_back(table.values(r, c));
        drop.push_back(a.benchmark_col);
    }
    const lp::Dataset data = lp::dataset_from_table(table, a.target, drop);

    lp::WindowPlan plan;
    plan.first_train_end = a.first_train_end;
    plan.refit_every = a.refit_every;
    plan.horizon = a.horizon;
    plan.last_target = a.last_target;

    lp::EvalMethod method;
    method.hyper = a.hyper.resolve();
    method.seed = a.seed;
    method.ensemble = a.ensemble;
    method.calibrate = !a.no_calibrate;

    const lp::EvalOutput res =
        lp::expanding_eval(data, plan, method, has_benchmark ? &benchmark : nullptr);

    std::ostringstream out;
    out << "period,actual,forecast,linear_component,tree_component\n";
    for (std::size_t i = 0; i < res.period.size(); ++i)
        out << res.period[i] << ',' << lp::format_double(res.actual[i]) << ','
            << lp::format_double(res.forecast[i]) << ','
            << lp::format_double(res.linear_comp[i]) << ','
            << lp::format_double(res.tree_comp[i]) << '\n';
    lp::write_text_file(a.out_path, out.str());

    json summary{{"command", "evaluate"},
                 {"config", json{{"data", a.data_path},
                                 {"target", a.target},
                                 {"benchmark", a.benchmark_col},
                                 {"first_train_end", a.first_train_end},
                                 {"refit_every", a.refit_every},
                                 {"horizon", a.horizon},
                                 {"last_target", a.last_target},
                                 {"seed", a.seed},
                                 {"ensemble", a.ensemble},
                                 {"calibrate", !a.no_calibrate},
                                 {"hyper", hyper_json(method.hyper)},
                                 {"out", a.out_path}}},
                 {"forecasts", res.period.size()},
                 {"rmse", res.rmse}};
    if (res.rmse_ratio) {
        summary["benchmark_rmse"] = *res.benchmark_rmse;
        summary["rmse_ratio"] = *res.rmse_ratio;
    }
    emit(summary);
    return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hybrid tree/linear gradient boosting"};
    app.require_subcommand(1);

    FitArgs fit_args;
    auto* fit = app.add_subcommand("fit", "Fit a model and write a model file");
    fit->add_option("--data", fit_args.data_path, "Training CSV")->required();
    fit->add_option("--target", fit_args.target, "Target column name")->required();
    fit->add_option("--out", fit_args.out_path, "Output model file")->required();
    add_hyper_flags(fit, fit_args.hyper);
    fit->add_option("--seed", fit_args.seed, "Base seed")->default_val(42);
    fit->add_option("--ensemble", fit_args.ensemble, "Ensemble size")->default_val(1);
    fit->add_flag("--no_calibrate", fit_args.no_calibrate,
                  "Skip post-hoc calibration (plus variant)");
    fit->add_option("--validation_tail", fit_args.validation_tail,
                    "Hold out the last k rows for validation judging / early stopping")
        ->default_val(0);

    PredictArgs pred_args;
    auto* pred = app.add_subcommand("predict", "Forecast rows of a feature CSV");
    pred->add_option("--model", pred_args.model_path, "Model file")->required();
    pred->add_option("--data", pred_args.data_path, "Feature CSV")->required();
    pred->add_option("--out", pred_args.out_path, "Output CSV")->required();
    pred->add_flag("--decompose", pred_args.decompose,
                   "Emit base/linear/tree columns summing to the forecast");

    ExplainArgs exp_args;
    auto* exp = app.add_subcommand("explain",
                                   "Permutation variable importance report");
    exp->add_option("--model", exp_args.model_path, "Model file")->required();
    exp->add_option("--data", exp_args.data_path, "Evaluation CSV (with target)")
        ->required();
    exp->add_option("--target", exp_args.target, "Target column name")->required();
    exp->add_option("--out", exp_args.out_path, "Output CSV")->required();
    exp->add_option("--groups", exp_args.groups_path,
                    "Group file (group id, comma-separated column names)");
    exp->add_option("--repeats", exp_args.repeats, "Permutation repeats")
        ->default_val(30);
    exp->add_option("--seed", exp_args.seed, "Permutation seed")->default_val(42);

    WeightsArgs w_args;
    auto* wts = app.add_subcommand("weights",
                                   "Observation-weight attribution (alt variant)");
    wts->add_option("--model", w_args.model_path, "Model file")->required();
    wts->add_option("--train", w_args.train_path, "Training CSV (with target)")
        ->required();
    wts->add_option("--target", w_args.target, "Target column name")->required();
    wts->add_option("--query", w_args.query_path,
                    "Query feature CSV (defaults to the training rows)");
    wts->add_option("--out", w_args.out_path, "Weights CSV")->required();
    wts->add_option("--windows_out", w_args.windows_out,
                    "Ranked sliding-window CSV (needs --window)");
    wts->add_option("--window", w_args.window,
                    "Window length for the ranking and the moving-average column")
        ->default_val(0);

    SimulateArgs sim_args;
    auto* sim = app.add_subcommand("simulate", "Monte Carlo benchmark grid");
    sim->add_option("--out", sim_args.out_path, "Results CSV")->required();
    sim->add_option("--manifest", sim_args.manifest_path, "Run manifest JSON");
    sim->add_option("--dgp", sim_args.dgps, "DGP names (default: all eight)")
        ->delimiter(',');
    sim->add_option("--snr", sim_args.snrs, "Signal-to-noise ratios")
        ->delimiter(',');
    sim->add_option("--n", sim_args.ns, "Training sample sizes")->delimiter(',');
    sim->add_option("--methods", sim_args.methods,
                    "Methods: ols,lgb_trees_only,lgb_plus,lgb_alt")
        ->delimiter(',');
    sim->add_option("--reps", sim_args.reps, "Replications per cell")->default_val(10);
    sim->add_option("--n_test", sim_args.n_test, "Test rows per replication")
        ->default_val(1000);
    sim->add_option("--seed", sim_args.seed, "Master seed")->default_val(42);
    sim->add_option("--ensemble", sim_args.ensemble,
                    "Ensemble size for lgb_plus")
        ->default_val(5);
    sim->add_flag("--noiseless", sim_args.noiseless, "Zero noise (SNR -> infinity)");

    EvaluateArgs ev_args;
    auto* ev = app.add_subcommand("evaluate", "Expanding-window evaluation");
    ev->add_option("--data", ev_args.data_path, "Time-ordered CSV")->required();
    ev->add_option("--target", ev_args.target, "Target column name")->required();
    ev->add_option("--out", ev_args.out_path, "Per-period forecast CSV")->required();
    ev->add_option("--benchmark", ev_args.benchmark_col,
                   "Benchmark forecast column (excluded from features)");
    ev->add_option("--first_train_end", ev_args.first_train_end,
                   "Rows in the first training window")
        ->required();
    ev->add_option("--refit_every", ev_args.refit_every, "Refit cadence")
        ->default_val(8);
    ev->add_option("--horizon", ev_args.horizon, "Train/forecast gap")->default_val(1);
    ev->add_option("--last_target", ev_args.last_target,
                   "Last forecast row (-1 = final row)")
        ->default_val(-1);
    add_hyper_flags(ev, ev_args.hyper);
    ev->add_option("--seed", ev_args.seed, "Base seed")->default_val(42);
    ev->add_option("--ensemble", ev_args.ensemble, "Ensemble size")->default_val(1);
    ev->add_flag("--no_calibrate", ev_args.no_calibrate,
                 "Skip calibration (plus variant)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    }

    try {
        if (*fit) return cmd_fit(fit_args);
        if (*pred) return cmd_predict(pred_args);
        if (*exp) return cmd_explain(exp_args);
        if (*wts) return cmd_weights(w_args);
        if (*sim) return cmd_simulate(sim_args);
        if (*ev) return cmd_evaluate(ev_args);
        std::cerr << "config error: no subcommand given\n";
        return exit_config;
    } catch (const lp::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const lp::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return exit_data;
    } catch (const lp::InternalError& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return exit_internal;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return exit_internal;
    }
}
