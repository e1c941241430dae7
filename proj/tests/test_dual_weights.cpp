#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "lgbplus/lgbplus.hpp"
#include "test_util.hpp"

using namespace lgbplus;

namespace {

Hyper alt_hyper(int M, int T, double eta_lin = 0.1) {
    Hyper h;
    h.variant = Variant::alternating;
    h.steps = M;
    h.trees_per_cycle = T;
    h.eta_lin = eta_lin;
    h.max_depth = 2;
    h.min_leaf = 2;
    return h;
}

BoostModel zero_step_model(double base, int p) {
    BoostModel m;
    m.variant = Variant::alternating;
    m.base = base;
    m.standardizer.means.assign(static_cast<std::size_t>(p), 0.0);
    m.standardizer.stds.assign(static_cast<std::size_t>(p), 1.0);
    m.standardizer.degenerate.assign(static_cast<std::size_t>(p), 0);
    return m;
}

double dot_y(const Matrix& w, int row, const std::vector<double>& y) {
    double s = 0.0;
    for (int j = 0; j < w.cols; ++j)
        s += w(row, j) * y[static_cast<std::size_t>(j)];
    return s;
}

} // namespace

TEST_CASE("train_weight_state: zero-step model is the uniform mean") {
    auto d = testutil::random_dataset(6, 2, 5);
    const BoostModel m = zero_step_model(mean_of(d.y), 2);

    const auto w = train_weight_state(m, d);
    const auto total = w.total();
    for (int r = 0; r < 6; ++r) {
        for (int j = 0; j < 6; ++j) {
            CHECK(w.base(r, j) == Catch::Approx(1.0 / 6.0).margin(1e-15));
            CHECK(w.linear(r, j) == 0.0);
            CHECK(w.tree(r, j) == 0.0);
        }
        CHECK(dot_y(total, r, d.y) == Catch::Approx(mean_of(d.y)).margin(1e-12));
    }
}

TEST_CASE("train_weight_state: a single-leaf tree on centered residuals is a null update") {
    auto d = testutil::random_dataset(8, 2, 9);
    Hyper h = alt_hyper(1, 1, 0.0);
    h.min_leaf = 8; // forces a single leaf
    const auto m = fit_alternating(d, h, 3);
    REQUIRE(m.steps.size() == 1);

    const auto w = train_weight_state(m, d);
    for (double v : w.tree.data) CHECK(std::abs(v) < 1e-12);
    const auto total = w.total();
    for (int r = 0; r < 8; ++r)
        CHECK(dot_y(total, r, d.y) == Catch::Approx(mean_of(d.y)).margin(1e-10));
}

TEST_CASE("train_weight_state: prediction identity on an 8-row model") {
    auto d = testutil::random_dataset(8, 2, 77);
    const auto m = fit_alternating(d, alt_hyper(2, 1), 5);
    const auto w = train_weight_state(m, d);
    const auto total = w.total();
    const auto yhat = predict(m, d.x);
    for (int r = 0; r < 8; ++r)
        CHECK(dot_y(total, r, d.y) ==
              Catch::Approx(yhat[static_cast<std::size_t>(r)]).margin(1e-10));
}

TEST_CASE("test_weights: training-row queries match the training state") {
    auto d = testutil::random_dataset(15, 3, 13);
    const auto m = fit_alternating(d, alt_hyper(3, 2), 7);

    const auto train_state = train_weight_state(m, d);
    const auto query_state = test_weights(m, d, d.x);
    CHECK(query_state.base.data == train_state.base.data);
    CHECK(query_state.linear.data == train_state.linear.data);
    CHECK(query_state.tree.data == train_state.tree.data);
}

TEST_CASE("test_weights: identity in and out of sample, rows sum to one") {
    auto d = testutil::random_dataset(20, 3, 21);
    const auto m = fit_alternating(d, alt_hyper(4, 2), 9);

    const Matrix q = testutil::random_matrix(12, 3, 33);
    const auto attr = test_weights(m, d, q);
    const auto total = attr.total();
    const auto yhat = predict(m, q);
    for (int r = 0; r < q.rows; ++r) {
        CHECK(dot_y(total, r, d.y) ==
              Catch::Approx(yhat[static_cast<std::size_t>(r)]).margin(1e-8));
        double sum = 0.0;
        for (int j = 0; j < total.cols; ++j) sum += total(r, j);
        CHECK(sum == Catch::Approx(1.0).margin(1e-8));

        // channel additivity: total is the left-to-right elementwise sum
        for (int j = 0; j < total.cols; ++j)
            CHECK(total(r, j) ==
                  (attr.base(r, j) + attr.linear(r, j)) + attr.tree(r, j));
    }
}

TEST_CASE("test_weights: channel sums match the forecast decomposition") {
    auto d = testutil::random_dataset(16, 2, 41);
    const auto m = fit_alternating(d, alt_hyper(3, 2), 11);
    const Matrix q = testutil::random_matrix(5, 2, 55);

    const auto attr = test_weights(m, d, q);
    const auto parts = predict_decomposed(m, q);
    for (int r = 0; r < q.rows; ++r) {
        CHECK(dot_y(attr.base, r, d.y) ==
              Catch::Approx(parts[static_cast<std::size_t>(r)].base).margin(1e-9));
        CHECK(dot_y(attr.linear, r, d.y) ==
              Catch::Approx(parts[static_cast<std::size_t>(r)].linear).margin(1e-9));
        CHECK(dot_y(attr.tree, r, d.y) ==
              Catch::Approx(parts[static_cast<std::size_t>(r)].tree).margin(1e-9));
    }
}

TEST_CASE("test_weights: eta_lin = 0 nullifies the linear channel") {
    auto d = testutil::random_dataset(14, 2, 3);
    const auto m = fit_alternating(d, alt_hyper(2, 3, 0.0), 1);
    const auto attr = test_weights(m, d, testutil::random_matrix(4, 2, 8));
    for (double v : attr.linear.data) CHECK(v == 0.0);
}

TEST_CASE("dual weights: deserialized models reproduce fresh-fit weights") {
    auto d = testutil::random_dataset(12, 2, 19);
    const auto m = fit_alternating(d, alt_hyper(2, 2), 23);
    const auto back = parse_model(serialize_model(m));

    const Matrix q = testutil::random_matrix(3, 2, 61);
    const auto a = test_weights(m, d, q);
    const auto b = test_weights(back, d, q);
    CHECK(a.linear.data == b.linear.data);
    CHECK(a.tree.data == b.tree.data);
}

TEST_CASE("dual weights: guarded calibrated path keeps the identity") {
    auto d = testutil::random_dataset(10, 2, 29);
    auto m = fit_alternating(d, alt_hyper(2, 1), 31);
    m.calibration_beta = 1.3; // not reachable through the API

    const Matrix q = testutil::random_matrix(6, 2, 71);
    const auto attr = test_weights(m, d, q);
    const auto total = attr.total();
    const auto yhat = predict(m, q);
    for (int r = 0; r < q.rows; ++r)
        CHECK(dot_y(total, r, d.y) ==
              Catch::Approx(yhat[static_cast<std::size_t>(r)]).margin(1e-8));
}

TEST_CASE("dual weights: refusals") {
    auto d = testutil::random_dataset(20, 2, 37);
    Hyper comp;
    comp.variant = Variant::competition;
    comp.steps = 3;
    comp.max_depth = 2;
    comp.min_leaf = 2;
    const auto cm = fit_competition(d, comp, 1);
    CHECK_THROWS_AS(train_weight_state(cm, d), ConfigError);

    // dense-state limit is checked before any allocation
    Dataset big;
    big.x = Matrix(max_weight_rows + 1, 1);
    for (int i = 0; i <= max_weight_rows; ++i) big.x(i, 0) = i;
    big.y.assign(static_cast<std::size_t>(max_weight_rows + 1), 0.5);
    big.column_names = {"x1"};
    const auto zm = zero_step_model(0.5, 1);
    CHECK_THROWS_AS(train_weight_state(zm, big), DataError);

    Matrix wrong(3, 5);
    const auto am = fit_alternating(d, alt_hyper(1, 1), 2);
    CHECK_THROWS_AS(test_weights(am, d, wrong), DataError);
}

TEST_CASE("top_weighted_windows: rankings and tie rules") {
    // uniform weights: all windows tie, ranking falls back to start order
    WeightMatrices uniform;
    uniform.base = Matrix(1, 8, 1.0 / 8.0);
    uniform.linear = Matrix(1, 8, 0.0);
    uniform.tree = Matrix(1, 8, 0.0);
    const auto tied = top_weighted_windows(uniform, 0, 4);
    REQUIRE(tied.size() == 5);
    for (std::size_t k = 0; k < tied.size(); ++k) {
        CHECK(tied[k].start == static_cast<int>(k));
        CHECK(tied[k].total == Catch::Approx(0.5).margin(1e-12));
    }

    // constructed weights [0,0,.5,.5,0]: the window starting at 2 dominates
    WeightMatrices w;
    w.base = Matrix(1, 5, 0.0);
    w.linear = Matrix(1, 5, 0.0);
    w.tree = Matrix(1, 5, 0.0);
    w.tree(0, 2) = 0.5;
    w.tree(0, 3) = 0.5;
    const auto ranked = top_weighted_windows(w, 0, 2);
    CHECK(ranked[0].start == 2);
    CHECK(ranked[0].total == Catch::Approx(1.0).margin(1e-15));
    CHECK(ranked[0].tree == Catch::Approx(1.0).margin(1e-15));

    // window = 1 ranks individual weights
    const auto singles = top_weighted_windows(w, 0, 1);
    CHECK(singles[0].total == Catch::Approx(0.5));
    CHECK((singles[0].start == 2 || singles[0].start == 3));

    CHECK_THROWS_AS(top_weighted_windows(w, 0, 0), ConfigError);
    CHECK_THROWS_AS(top_weighted_windows(w, 0, 6), ConfigError);
    CHECK_THROWS_AS(top_weighted_windows(w, 2, 2), ConfigError);
}
