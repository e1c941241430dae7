#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "booster.hpp"
#include "dataset.hpp"
#include "errors.hpp"
#include "matrix.hpp"
#include "rng.hpp"

namespace lgbplus {

// ============================================================================
// Monte Carlo benchmark harness
//
// Eight closed-form signal functions over P = 6 i.i.d. Uniform[0,1]
// predictors, Gaussian noise calibrated to a target signal-to-noise ratio,
// and out-of-sample R^2 on a fixed test set. Noise variance is Var(f)/SNR
// with Var(f) estimated once per (dgp, seed) on a dedicated 100k calibration
// draw, so train and test share a common noise scale across replications.
// The mixture signal divides its linear and nonlinear components by their
// calibration-sample standard deviations before summing.
// ============================================================================

enum class DgpName {
    linear,
    friedman1,
    product_log,
    mixture,
    trig_log,
    soft_radial,
    step_ucurve,
    rotated_sine
};

inline constexpr int dgp_dim = 6;
inline constexpr int dgp_calibration_draws = 100000;

inline const std::array<DgpName, 8>& all_dgps() {
    static const std::array<DgpName, 8> names = {
        DgpName::linear,      DgpName::friedman1,  DgpName::product_log,
        DgpName::mixture,     DgpName::trig_log,   DgpName::soft_radial,
        DgpName::step_ucurve, DgpName::rotated_sine};
    return names;
}

inline std::string to_string(DgpName d) {
    switch (d) {
    case DgpName::linear: return "linear";
    case DgpName::friedman1: return "friedman1";
    case DgpName::product_log: return "product_log";
    case DgpName::mixture: return "mixture";
    case DgpName::trig_log: return "trig_log";
    case DgpName::soft_radial: return "soft_radial";
    case DgpName::step_ucurve: return "step_ucurve";
    default: return "rotated_sine";
    }
}

inline DgpName dgp_from_string(const std::string& s) {
    for (DgpName d : all_dgps())
        if (to_string(d) == s) return d;
    throw ConfigError("unknown DGP '" + s + "'");
}

struct DgpSpec {
    DgpName name = DgpName::linear;
    double snr = 1.0;
    int n_train = 250;
    int n_test = 1000;
    int n_reps = 10;
    bool noiseless = false; // SNR -> infinity limit: y = f(x) exactly
};

namespace detail {

inline constexpr double pi_v = 3.141592653589793238462643383279502884;

inline double mixture_linear_part(std::span<const double> x) {
    return 2.0 * x[0] + 1.5 * x[1];
}

inline double mixture_nonlinear_part(std::span<const double> x) {
    return 3.0 * std::sin(pi_v * x[2] * x[3]) + 2.0 * (x[4] - 0.5) * (x[4] - 0.5);
}

inline double raw_signal(DgpName name, std::span<const double> x,
                         double mix_scale_lin, double mix_scale_nonlin) {
    switch (name) {
    case DgpName::linear:
        return 2.0 * (x[0] - 0.5) - (x[1] - 0.5) + 3.0 * (x[2] - 0.5) +
               1.5 * (x[3] - 0.5) + 0.5 * (x[4] - 0.5);
    case DgpName::friedman1:
        return 10.0 * std::sin(pi_v * x[0] * x[1]) +
               20.0 * (x[2] - 0.5) * (x[2] - 0.5) + 10.0 * x[3] + 5.0 * x[4];
    case DgpName::product_log:
        return x[0] * x[1] + std::log(x[2] + x[3] + 2.0);
    case DgpName::mixture:
        return mixture_linear_part(x) / mix_scale_lin +
               mixture_nonlinear_part(x) / mix_scale_nonlin;
    case DgpName::trig_log:
        return std::sin(pi_v * (x[0] + x[1] + x[2])) + std::log(1.0 + x[3] * x[3]);
    case DgpName::soft_radial: {
        double d2 = 0.0;
        for (int i = 0; i < dgp_dim; ++i) d2 += (x[i] - 0.5) * (x[i] - 0.5);
        return 1.0 / (1.0 + 5.0 * d2);
    }
    case DgpName::step_ucurve:
        return 3.0 * (x[0] > 0.3 && x[0] < 0.7 ? 1.0 : 0.0) +
               2.0 * (x[1] > 0.5 ? 1.0 : 0.0) - (x[1] < 0.2 ? 1.0 : 0.0) +
               4.0 * (x[2] - 0.5) * (x[2] - 0.5) + 3.0 * std::abs(x[3] - 0.5) +
               2.0 * (x[4] > 0.25 && x[4] < 0.75 && x[5] > 0.5 ? 1.0 : 0.0);
    default: // rotated_sine
        return std::sin(3.0 * (x[0] + x[1] + x[2] + x[3]));
    }
}

inline double sample_std(double sum, double sum_sq, int n) {
    const double mean = sum / static_cast<double>(n);
    const double ss = sum_sq - static_cast<double>(n) * mean * mean;
    return std::sqrt(std::max(0.0, ss / static_cast<double>(n - 1)));
}

} // namespace detail

// Calibrated signal evaluator. Construction draws the 100k calibration
// sample, fixes the mixture component scales, and sets the noise sd.
class Dgp {
public:
    static Dgp make(DgpName name, double snr, std::uint64_t seed,
                    bool noiseless = false) {
        if (!(snr > 0.0)) throw ConfigError("snr must be > 0");
        Dgp d;
        d.name_ = name;

        Rng rng({seed, purpose::dgp_calibration, static_cast<std::uint64_t>(name), 0});
        std::vector<std::array<double, dgp_dim>> sample(dgp_calibration_draws);
        for (auto& row : sample)
            for (double& v : row) v = rng.uniform01();

        if (name == DgpName::mixture) {
            double sl = 0, sl2 = 0, sn = 0, sn2 = 0;
            for (const auto& row : sample) {
                const double l = detail::mixture_linear_part(row);
                const double nl = detail::mixture_nonlinear_part(row);
                sl += l;
                sl2 += l * l;
                sn += nl;
                sn2 += nl * nl;
            }
            d.mix_scale_lin_ = detail::sample_std(sl, sl2, dgp_calibration_draws);
            d.mix_scale_nonlin_ = detail::sample_std(sn, sn2, dgp_calibration_draws);
        }

        double sf = 0, sf2 = 0;
        for (const auto& row : sample) {
            const double f = detail::raw_signal(name, row, d.mix_scale_lin_,
                                                d.mix_scale_nonlin_);
            sf += f;
            sf2 += f * f;
        }
        const double sd_f = detail::sample_std(sf, sf2, dgp_calibration_draws);
        d.signal_var_ = sd_f * sd_f;
        d.noise_sd_ = noiseless ? 0.0 : sd_f / std::sqrt(snr);
        return d;
    }

    double signal(std::span<const double> x) const {
        return detail::raw_signal(name_, x, mix_scale_lin_, mix_scale_nonlin_);
    }

    DgpName name() const { return name_; }
    double signal_variance() const { return signal_var_; }
    double noise_sd() const { return noise_sd_; }

private:
    DgpName name_ = DgpName::linear;
    double mix_scale_lin_ = 1.0;
    double mix_scale_nonlin_ = 1.0;
    double signal_var_ = 0.0;
    double noise_sd_ = 0.0;
};

namespace detail {

inline Dataset draw_dgp_dataset(const Dgp& dgp, int n, std::uint64_t seed,
                                std::uint64_t x_purpose, std::uint64_t noise_purpose,
                                std::uint64_t rep) {
    Dataset d;
    d.x = Matrix(n, dgp_dim);
    d.y.resize(static_cast<std::size_t>(n));
    d.column_names = {"x1", "x2", "x3", "x4", "x5", "x6"};

    Rng rx({seed, x_purpose, static_cast<std::uint64_t>(dgp.name()), rep});
    Rng rn({seed, noise_purpose, static_cast<std::uint64_t>(dgp.name()), rep});
    for (int i = 0; i < n; ++i) {
        for (int c = 0; c < dgp_dim; ++c) d.x(i, c) = rx.uniform01();
        d.y[static_cast<std::size_t>(i)] =
            dgp.signal(d.x.row(i)) + dgp.noise_sd() * rn.normal();
    }
    return d;
}

} // namespace detail

// One replication: train and test share the DGP's calibration but draw
// independent rows. Deterministic per (spec, rep, seed).
inline std::pair<Dataset, Dataset> generate(const DgpSpec& spec, int rep,
                                            std::uint64_t seed) {
    if (spec.n_train < 2 || spec.n_test < 2)
        throw ConfigError("generate: sample sizes must be >= 2");
    const Dgp dgp = Dgp::make(spec.name, spec.snr, seed, spec.noiseless);
    const auto r = static_cast<std::uint64_t>(rep);
    Dataset train = detail::draw_dgp_dataset(dgp, spec.n_train, seed,
                                             purpose::dgp_train_x,
                                             purpose::dgp_train_noise, r);
    Dataset test = detail::draw_dgp_dataset(dgp, spec.n_test, seed,
                                            purpose::dgp_test_x,
                                            purpose::dgp_test_noise, r);
    return {std::move(train), std::move(test)};
}

// ============================================================================
// OLS baseline
// ============================================================================

struct OlsModel {
    double intercept = 0.0;
    std::vector<double> coef;
};

// Full least-squares fit over all predictors, via the normal equations with
// a Cholesky solve.
inline OlsModel fit_ols(const Dataset& train) {
    validate_dataset(train);
    const int n = train.n_rows();
    const int p = train.n_cols();
    if (n <= p) throw DataError("fit_ols: needs more rows than predictors");

    const int d = p + 1; // intercept last
    std::vector<double> a(static_cast<std::size_t>(d) * d, 0.0);
    std::vector<double> b(static_cast<std::size_t>(d), 0.0);
    auto A = [&](int r, int c) -> double& {
        return a[static_cast<std::size_t>(r) * d + c];
    };

    for (int i = 0; i < n; ++i) {
        for (int r = 0; r < p; ++r) {
            const double xr = train.x(i, r);
            for (int c = r; c < p; ++c) A(r, c) += xr * train.x(i, c);
            A(r, p) += xr;
            b[static_cast<std::size_t>(r)] += xr * train.y[static_cast<std::size_t>(i)];
        }
        A(p, p) += 1.0;
        b[static_cast<std::size_t>(p)] += train.y[static_cast<std::size_t>(i)];
    }
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < r; ++c) A(r, c) = A(c, r);

    // Cholesky factorization; a non-positive pivot signals rank deficiency.
    std::vector<double> l(static_cast<std::size_t>(d) * d, 0.0);
    auto Lm = [&](int r, int c) -> double& {
        return l[static_cast<std::size_t>(r) * d + c];
    };
    const double tol = 1e-12 * std::max(1.0, A(0, 0));
    for (int j = 0; j < d; ++j) {
        double diag = A(j, j);
        for (int k = 0; k < j; ++k) diag -= Lm(j, k) * Lm(j, k);
        if (!(diag > tol)) throw DataError("fit_ols: rank-deficient design");
        Lm(j, j) = std::sqrt(diag);
        for (int i = j + 1; i < d; ++i) {
            double s = A(i, j);
            for (int k = 0; k < j; ++k) s -= Lm(i, k) * Lm(j, k);
            Lm(i, j) = s / Lm(j, j);
        }
    }
    // Forward then backward substitution.
    std::vector<double> z(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
        double s = b[static_cast<std::size_t>(i)];
        for (int k = 0; k < i; ++k) s -= Lm(i, k) * z[static_cast<std::size_t>(k)];
        z[static_cast<std::size_t>(i)] = s / Lm(i, i);
    }
    std::vector<double> sol(static_cast<std::size_t>(d));
    for (int i = d - 1; i >= 0; --i) {
        double s = z[static_cast<std::size_t>(i)];
        for (int k = i + 1; k < d; ++k) s -= Lm(k, i) * sol[static_cast<std::size_t>(k)];
        sol[static_cast<std::size_t>(i)] = s / Lm(i, i);
    }

    OlsModel m;
    m.coef.assign(sol.begin(), sol.begin() + p);
    m.intercept = sol[static_cast<std::size_t>(p)];
    return m;
}

inline std::vector<double> predict(const OlsModel& m, const Matrix& x) {
    if (x.cols != static_cast<int>(m.coef.size()))
        throw DataError("ols predict: column mismatch");
    std::vector<double> out(static_cast<std::size_t>(x.rows));
    for (int i = 0; i < x.rows; ++i) {
        double v = m.intercept;
        for (int c = 0; c < x.cols; ++c)
            v += m.coef[static_cast<std::size_t>(c)] * x(i, c);
        out[static_cast<std::size_t>(i)] = v;
    }
    return out;
}

// Out-of-sample R^2 = 1 - SSE/SST with SST about the evaluation-set mean.
inline double r_squared(std::span<const double> y, std::span<const double> yhat) {
    const double m = mean_of(y);
    double sse = 0.0, sst = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double e = y[i] - yhat[i];
        sse += e * e;
        const double d = y[i] - m;
        sst += d * d;
    }
    if (!(sst > 0.0)) throw DataError("r_squared: zero-variance evaluation target");
    return 1.0 - sse / sst;
}

// ============================================================================
// Grid runner
// ============================================================================

inline const std::vector<std::string>& bench_method_names() {
    static const std::vector<std::string> names = {"ols", "lgb_trees_only",
                                                   "lgb_plus", "lgb_alt"};
    return names;
}

struct BenchMethodConfig {
    Hyper competition;  // used by lgb_plus
    Hyper alternating;  // used by lgb_alt and (with eta_lin = 0) lgb_trees_only
    int ensemble = 5;   // competition ensemble size
    bool calibrate = false; // benchmark fits are uncalibrated

    BenchMethodConfig() {
        competition.variant = Variant::competition;
        alternating.variant = Variant::alternating;
    }
};

struct BenchCell {
    std::string dgp;
    double snr = 0.0;
    int n = 0;
    std::string method;
    double r2_mean = 0.0;
    double r2_std = 0.0;
    std::vector<double> r2_reps;
    std::string error; // non-empty when the cell aborted
};

struct BenchResult {
    std::vector<BenchCell> cells;
};

inline BenchResult run_bench(const std::vector<DgpSpec>& grid,
                             const std::vector<std::string>& methods,
                             std::uint64_t seed,
                             const BenchMethodConfig& cfg = {}) {
    if (grid.empty()) throw ConfigError("run_bench: empty grid");
    if (methods.empty()) throw ConfigError("run_bench: no methods selected");
    for (const auto& m : methods) {
        bool known = false;
        for (const auto& k : bench_method_names()) known = known || k == m;
        if (!known) throw ConfigError("run_bench: unknown method '" + m + "'");
    }

    BenchResult result;
    for (const DgpSpec& spec : grid) {
        std::vector<BenchCell> cells;
        for (const auto& m : methods) {
            BenchCell c;
            c.dgp = to_string(spec.name);
            c.snr = spec.snr;
            c.n = spec.n_train;
            c.method = m;
            cells.push_back(std::move(c));
        }

        for (int rep = 0; rep < spec.n_reps; ++rep) {
            const auto [train, test] = generate(spec, rep, seed);
            for (std::size_t mi = 0; mi < methods.size(); ++mi) {
                BenchCell& cell = cells[mi];
                if (!cell.error.empty()) continue;
                const std::uint64_t fit_seed = derive_seed(
                    {seed, purpose::bench_fit,
                     static_cast<std::uint64_t>(spec.name) * 1000003ULL +
                         static_cast<std::uint64_t>(rep),
                     mi});
                try {
                    std::vector<double> yhat;
                    if (methods[mi] == "ols") {
                        yhat = predict(fit_ols(train), test.x);
                    } else if (methods[mi] == "lgb_plus") {
                        const Ensemble e =
                            fit_ensemble(train, cfg.competition, cfg.ensemble,
                                         fit_seed, cfg.calibrate);
                        yhat = predict(e, test.x);
                    } else if (methods[mi] == "lgb_alt") {
                        yhat = predict(fit_alternating(train, cfg.alternating, fit_seed),
                                       test.x);
                    } else { // lgb_trees_only
                        Hyper h = cfg.alternating;
                        h.eta_lin = 0.0;
                        yhat = predict(fit_alternating(train, h, fit_seed), test.x);
                    }
                    cell.r2_reps.push_back(r_squared(test.y, yhat));
                } catch (const std::exception& e) {
                    cell.error = e.what();
                    cell.r2_reps.clear();
                }
            }
        }

        for (BenchCell& cell : cells) {
            if (!cell.r2_reps.empty()) {
                cell.r2_mean = mean_of(cell.r2_reps);
                double ss = 0.0;
                for (double r : cell.r2_reps) {
                    const double d = r - cell.r2_mean;
                    ss += d * d;
                }
                cell.r2_std = cell.r2_reps.size() > 1
                                  ? std::sqrt(ss / static_cast<double>(
                                                       cell.r2_reps.size() - 1))
                                  : 0.0;
            }
            result.cells.push_back(std::move(cell));
        }
    }
    return result;
}

} // namespace lgbplus
