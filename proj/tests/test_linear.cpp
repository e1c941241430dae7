#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <vector>

#include "lgbplus/lgbplus.hpp"
#include "test_util.hpp"

using namespace lgbplus;

namespace {

std::vector<int> iota_rows(int n) {
    std::vector<int> v(static_cast<std::size_t>(n));
    std::iota(v.begin(), v.end(), 0);
    return v;
}

// Textbook two-pass Pearson correlation, kept independent of the library path.
double oracle_corr(const Matrix& x, int col, const std::vector<int>& rows,
                   const std::vector<double>& r) {
    double mx = 0, mr = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        mx += x(rows[i], col);
        mr += r[i];
    }
    mx /= static_cast<double>(rows.size());
    mr /= static_cast<double>(rows.size());
    double sxx = 0, srr = 0, sxr = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double dx = x(rows[i], col) - mx;
        const double dr = r[i] - mr;
        sxx += dx * dx;
        srr += dr * dr;
        sxr += dx * dr;
    }
    return sxr / std::sqrt(sxx * srr);
}

} // namespace

TEST_CASE("select_feature: perfect correlation wins") {
    auto d = testutil::random_dataset(12, 4, 3);
    std::vector<double> r(12);
    for (int i = 0; i < 12; ++i) r[static_cast<std::size_t>(i)] = d.x(i, 2);
    const auto k = select_feature(d.x, iota_rows(12), r, {0, 1, 2, 3});
    REQUIRE(k.has_value());
    CHECK(*k == 2);
}

TEST_CASE("select_feature: matches a brute-force |corr| scan") {
    // residuals orthogonalized against all candidates; selection must still
    // agree with the exhaustive scan
    Rng rng(StreamKey{123, purpose::generic, 0, 0});
    Matrix x(6, 3);
    for (double& v : x.data) v = rng.normal();
    std::vector<double> r(6);
    for (double& v : r) v = rng.normal();
    for (int c = 0; c < 3; ++c) {
        std::vector<int> rows = iota_rows(6);
        const double corr_num = [&] {
            double mx = 0, mr = 0;
            for (int i = 0; i < 6; ++i) {
                mx += x(i, c);
                mr += r[static_cast<std::size_t>(i)];
            }
            mx /= 6;
            mr /= 6;
            double sxx = 0, sxr = 0;
            for (int i = 0; i < 6; ++i) {
                sxx += (x(i, c) - mx) * (x(i, c) - mx);
                sxr += (x(i, c) - mx) * (r[static_cast<std::size_t>(i)] - mr);
            }
            return sxr / sxx;
        }();
        for (int i = 0; i < 6; ++i) {
            double mx = 0;
            for (int j = 0; j < 6; ++j) mx += x(j, c);
            r[static_cast<std::size_t>(i)] -= corr_num * (x(i, c) - mx / 6);
        }
    }

    const auto k = select_feature(x, iota_rows(6), r, {0, 1, 2});
    REQUIRE(k.has_value());
    int best = -1;
    double best_abs = -1.0;
    for (int c = 0; c < 3; ++c) {
        const double a = std::abs(oracle_corr(x, c, iota_rows(6), r));
        if (a > best_abs) {
            best_abs = a;
            best = c;
        }
    }
    CHECK(*k == best);
}

TEST_CASE("select_feature: ties resolve to the lowest column index") {
    Matrix x(6, 2);
    for (int i = 0; i < 6; ++i) {
        x(i, 0) = static_cast<double>(i);
        x(i, 1) = static_cast<double>(i); // exact duplicate
    }
    std::vector<double> r = {0.1, 0.4, 0.2, 0.9, 0.8, 1.1};
    const auto k = select_feature(x, iota_rows(6), r, {0, 1});
    REQUIRE(k.has_value());
    CHECK(*k == 0);
}

TEST_CASE("select_feature: degenerate cases return nullopt") {
    Matrix x(4, 1, 3.0); // constant column
    std::vector<double> r = {0.1, 0.5, -0.2, 0.4};
    CHECK_FALSE(select_feature(x, iota_rows(4), r, {0}).has_value());

    Matrix x2(4, 1);
    for (int i = 0; i < 4; ++i) x2(i, 0) = i;
    std::vector<double> constant_r = {2.0, 2.0, 2.0, 2.0};
    CHECK_FALSE(select_feature(x2, iota_rows(4), constant_r, {0}).has_value());
}

TEST_CASE("fit_linear: closed-form cases") {
    Matrix x(3, 1);
    for (int i = 0; i < 3; ++i) x(i, 0) = i;

    const auto ident = fit_linear(x, 0, iota_rows(3), {0.0, 1.0, 2.0});
    CHECK(ident.alpha == Catch::Approx(0.0).margin(1e-14));
    CHECK(ident.beta == Catch::Approx(1.0).margin(1e-14));

    const auto flat = fit_linear(x, 0, iota_rows(3), {5.0, 5.0, 5.0});
    CHECK(flat.alpha == Catch::Approx(5.0).margin(1e-14));
    CHECK(flat.beta == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("fit_linear: four-point instance matches the normal equations") {
    Matrix x(4, 1);
    x(0, 0) = 1;
    x(1, 0) = 2;
    x(2, 0) = 4;
    x(3, 0) = 7;
    const std::vector<double> r = {0.3, -1.1, 2.0, 0.5};
    const auto term = fit_linear(x, 0, iota_rows(4), r);

    // oracle: beta = Sxr/Sxx, alpha = rbar - beta*xbar
    const double xbar = (1 + 2 + 4 + 7) / 4.0;
    const double rbar = (0.3 - 1.1 + 2.0 + 0.5) / 4.0;
    double sxx = 0, sxr = 0;
    for (int i = 0; i < 4; ++i) {
        sxx += (x(i, 0) - xbar) * (x(i, 0) - xbar);
        sxr += (x(i, 0) - xbar) * (r[static_cast<std::size_t>(i)] - rbar);
    }
    CHECK(term.beta == Catch::Approx(sxr / sxx).margin(1e-12));
    CHECK(term.alpha == Catch::Approx(rbar - (sxr / sxx) * xbar).margin(1e-12));

    CHECK(predict_linear(term, std::vector<double>{3.0}) ==
          Catch::Approx(term.alpha + 3.0 * term.beta).margin(1e-14));

    Matrix flat(4, 1, 2.0);
    CHECK_THROWS_AS(fit_linear(flat, 0, iota_rows(4), r), DataError);
}

TEST_CASE("predict_linear: trivial cases") {
    LinearTerm t;
    t.column = 0;
    t.alpha = 0.0;
    t.beta = 1.0;
    CHECK(predict_linear(t, std::vector<double>{0.5}) == 0.5);

    t.alpha = 5.0;
    t.beta = 0.0;
    CHECK(predict_linear(t, std::vector<double>{-3.1}) == 5.0);

    CHECK_THROWS_AS(
        predict_linear(t, std::vector<double>{std::numeric_limits<double>::infinity()}),
        DataError);
}

TEST_CASE("hat_weight_row: uniform at the fitted mean, reproduces the fit") {
    auto d = testutil::random_dataset(9, 2, 41);
    std::vector<double> r(d.y);
    const auto term = fit_linear(d.x, 1, iota_rows(9), r);

    std::vector<double> at_mean = {0.0, term.mean_x};
    const auto w0 = hat_weight_row(term, at_mean, d.x, 9);
    for (double w : w0) CHECK(w == Catch::Approx(1.0 / 9.0).margin(1e-12));

    Rng rng(StreamKey{5, purpose::generic, 0, 0});
    for (int t = 0; t < 50; ++t) {
        std::vector<double> q = {0.0, rng.normal() * 2.0};
        const auto w = hat_weight_row(term, q, d.x, 9);
        double dot = 0.0, sum = 0.0;
        for (int i = 0; i < 9; ++i) {
            dot += w[static_cast<std::size_t>(i)] * r[static_cast<std::size_t>(i)];
            sum += w[static_cast<std::size_t>(i)];
        }
        CHECK(dot == Catch::Approx(predict_linear(term, q)).margin(1e-10));
        CHECK(sum == Catch::Approx(1.0).margin(1e-10));
    }
}

TEST_CASE("greedy updates trace stagewise shrinkage toward OLS") {
    // exactly orthogonal, zero-mean 8x3 design
    const Matrix x = testutil::matrix_from({{+1, +1, +1},
                                            {-1, +1, +1},
                                            {+1, -1, +1},
                                            {-1, -1, +1},
                                            {+1, +1, -1},
                                            {-1, +1, -1},
                                            {+1, -1, -1},
                                            {-1, -1, -1}});
    const std::vector<double> target_beta = {1.0, -0.7, 0.4};
    std::vector<double> r(8, 0.0);
    for (int i = 0; i < 8; ++i)
        for (int c = 0; c < 3; ++c)
            r[static_cast<std::size_t>(i)] +=
                target_beta[static_cast<std::size_t>(c)] * x(i, c);

    const double eta = 0.1;
    std::vector<double> coef(3, 0.0);
    std::vector<double> prev_gap = {1.0, 0.7, 0.4};
    for (int step = 0; step < 400; ++step) {
        const auto k = select_feature(x, iota_rows(8), r, {0, 1, 2});
        REQUIRE(k.has_value());
        const auto term = fit_linear(x, *k, iota_rows(8), r);
        coef[static_cast<std::size_t>(*k)] += eta * term.beta;
        for (int i = 0; i < 8; ++i)
            r[static_cast<std::size_t>(i)] -=
                eta * predict_linear(term, x.row(i));

        const double gap = std::abs(coef[static_cast<std::size_t>(*k)] -
                                    target_beta[static_cast<std::size_t>(*k)]);
        CHECK(gap <= prev_gap[static_cast<std::size_t>(*k)] + 1e-12); // monotone
        prev_gap[static_cast<std::size_t>(*k)] = gap;
    }
    for (int c = 0; c < 3; ++c)
        CHECK(coef[static_cast<std::size_t>(c)] ==
              Catch::Approx(target_beta[static_cast<std::size_t>(c)]).margin(1e-2));
}

TEST_CASE("pure-noise updates hover near zero and spread across columns") {
    const int n = 200, p = 5, steps = 200;
    Rng rng(StreamKey{2024, purpose::generic, 0, 0});
    Matrix x(n, p);
    for (double& v : x.data) v = rng.normal();

    auto run = [&](const std::vector<double>& y0, std::vector<int>* counts) {
        std::vector<double> r = y0;
        double abs_beta = 0.0;
        for (int s = 0; s < steps; ++s) {
            const auto k = select_feature(x, iota_rows(n), r, {0, 1, 2, 3, 4});
            REQUIRE(k.has_value());
            const auto term = fit_linear(x, *k, iota_rows(n), r);
            abs_beta += std::abs(term.beta);
            if (counts) ++(*counts)[static_cast<std::size_t>(*k)];
            for (int i = 0; i < n; ++i)
                r[static_cast<std::size_t>(i)] -=
                    0.1 * predict_linear(term, x.row(i));
        }
        return abs_beta / steps;
    };

    std::vector<double> noise(n), signal(n);
    for (int i = 0; i < n; ++i) {
        noise[static_cast<std::size_t>(i)] = rng.normal();
        signal[static_cast<std::size_t>(i)] =
            x(i, 0) + x(i, 1) + x(i, 2) + x(i, 3) + x(i, 4) +
            0.2 * rng.normal();
    }

    std::vector<int> counts(p, 0);
    const double noise_beta = run(noise, &counts);
    const double signal_beta = run(signal, nullptr);
    CHECK(signal_beta >= 5.0 * noise_beta);

    // near-uniform selection under pure noise (chi-square, 4 dof, p=0.999)
    double chi2 = 0.0;
    const double expected = static_cast<double>(steps) / p;
    for (int c : counts) {
        const double d = c - expected;
        chi2 += d * d / expected;
    }
    CHECK(chi2 < 18.47);
}

TEST_CASE("fit_constant: intercept-only fallback") {
    const auto t = fit_constant(iota_rows(4), {1.0, 2.0, 3.0, 4.0});
    CHECK(t.is_constant());
    CHECK(t.beta == 0.0);
    CHECK(t.alpha == Catch::Approx(2.5));
    CHECK(predict_linear(t, std::vector<double>{99.0}) == Catch::Approx(2.5));

    Matrix dummy(4, 1);
    const auto w = hat_weight_row(t, std::vector<double>{0.0}, dummy, 4);
    for (double v : w) CHECK(v == Catch::Approx(0.25));
}
