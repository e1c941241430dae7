#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "lgbplus/lgbplus.hpp"
#include "test_util.hpp"

using namespace lgbplus;

namespace {

std::vector<int> iota_rows(int n) {
    std::vector<int> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = i;
    return v;
}

double sse_about_mean(const std::vector<double>& v) {
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s;
}

double tree_sse(const ShallowTree& tree, const Matrix& x,
                const std::vector<int>& rows, const std::vector<double>& r) {
    double s = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double e = r[i] - tree.predict(x.row(rows[i]));
        s += e * e;
    }
    return s;
}

// Independent oracle: minimum SSE over all trees of the given depth, found by
// exhaustive enumeration of every midpoint split at every level.
double oracle_min_sse(const Matrix& x, const std::vector<int>& rows,
                      const std::vector<double>& r, int depth, int min_leaf) {
    double best = sse_about_mean(r);
    if (depth == 0 || static_cast<int>(rows.size()) < 2 * min_leaf) return best;
    for (int c = 0; c < x.cols; ++c) {
        std::vector<double> vals;
        for (int row : rows) vals.push_back(x(row, c));
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
        for (std::size_t k = 0; k + 1 < vals.size(); ++k) {
            const double thr = 0.5 * (vals[k] + vals[k + 1]);
            std::vector<int> lrows, rrows;
            std::vector<double> lr, rr;
            for (std::size_t i = 0; i < rows.size(); ++i) {
                if (x(rows[i], c) <= thr) {
                    lrows.push_back(rows[i]);
                    lr.push_back(r[i]);
                } else {
                    rrows.push_back(rows[i]);
                    rr.push_back(r[i]);
                }
            }
            if (static_cast<int>(lrows.size()) < min_leaf ||
                static_cast<int>(rrows.size()) < min_leaf)
                continue;
            const double sse = oracle_min_sse(x, lrows, lr, depth - 1, min_leaf) +
                               oracle_min_sse(x, rrows, rr, depth - 1, min_leaf);
            best = std::min(best, sse);
        }
    }
    return best;
}

} // namespace

TEST_CASE("fit_tree: constant residuals give a single leaf") {
    const Matrix x = testutil::matrix_from({{0.0}, {1.0}, {2.0}, {3.0}});
    const std::vector<double> r = {2.5, 2.5, 2.5, 2.5};
    const auto tree = fit_tree(x, iota_rows(4), r, 3, 1);
    REQUIRE(tree.nodes.size() == 1);
    CHECK(tree.nodes[0].value == Catch::Approx(2.5).margin(1e-15));
}

TEST_CASE("fit_tree: 1-D step residuals split between the groups") {
    const Matrix x = testutil::matrix_from({{0.0}, {1.0}, {2.0}, {3.0}});
    const std::vector<double> r = {0.0, 0.0, 1.0, 1.0};
    const auto tree = fit_tree(x, iota_rows(4), r, 1, 1);

    REQUIRE(tree.nodes.size() == 3);
    CHECK(tree.nodes[0].feature == 0);
    CHECK(tree.nodes[0].threshold == Catch::Approx(1.5));
    CHECK(tree.predict(std::vector<double>{0.5}) == Catch::Approx(0.0));
    CHECK(tree.predict(std::vector<double>{2.5}) == Catch::Approx(1.0));

    // exhaustive scan agrees that this is the best single split
    const double oracle = oracle_min_sse(x, iota_rows(4), r, 1, 1);
    CHECK(tree_sse(tree, x, iota_rows(4), r) == Catch::Approx(oracle).margin(1e-12));
}

TEST_CASE("fit_tree: depth-2 fits match exhaustive enumeration at tiny scale") {
    // Fixed instances where the greedy optimum coincides with the global one,
    // verified against the enumeration oracle.
    for (std::uint64_t seed : {1u, 3u, 5u, 10u, 21u, 24u, 27u, 36u}) {
        Rng rng(StreamKey{seed, purpose::generic, 0, 0});
        Matrix x(8, 2);
        std::vector<double> r(8);
        for (int i = 0; i < 8; ++i) {
            x(i, 0) = rng.uniform01();
            x(i, 1) = rng.uniform01();
            r[static_cast<std::size_t>(i)] = rng.normal();
        }
        const auto tree = fit_tree(x, iota_rows(8), r, 2, 1);
        const double fitted = tree_sse(tree, x, iota_rows(8), r);
        const double oracle = oracle_min_sse(x, iota_rows(8), r, 2, 1);
        INFO("seed " << seed);
        CHECK(fitted == Catch::Approx(oracle).margin(1e-10));
    }
}

TEST_CASE("fit_tree: min_leaf and depth are honored") {
    auto d = testutil::random_dataset(30, 2, 21);
    std::vector<double> r(d.y);
    const auto tree = fit_tree(d.x, iota_rows(30), r, 2, 4);
    CHECK(tree.depth() <= 2);
    for (const auto& node : tree.nodes)
        if (node.is_leaf()) CHECK(node.members.size() >= 4);
}

TEST_CASE("fit_tree: leaf values are member means and members partition rows") {
    auto d = testutil::random_dataset(25, 2, 5);
    std::vector<double> r(d.y);
    const auto tree = fit_tree(d.x, iota_rows(25), r, 3, 3);

    std::vector<int> seen;
    for (const auto& node : tree.nodes) {
        if (!node.is_leaf()) continue;
        double s = 0.0;
        for (int i : node.members) {
            s += r[static_cast<std::size_t>(i)];
            seen.push_back(i);
        }
        CHECK(node.value ==
              Catch::Approx(s / static_cast<double>(node.members.size()))
                  .margin(1e-12));
    }
    std::sort(seen.begin(), seen.end());
    CHECK(seen == iota_rows(25));
}

TEST_CASE("predict_tree: single leaf, boundary ties go left") {
    const Matrix x = testutil::matrix_from({{0.0}, {1.0}, {2.0}, {3.0}});
    const std::vector<double> r = {0.0, 0.0, 1.0, 1.0};

    ShallowTree leaf_only;
    leaf_only.nodes.push_back(TreeNode{});
    leaf_only.nodes[0].value = 0.7;
    CHECK(leaf_only.predict(std::vector<double>{123.0}) == 0.7);

    const auto tree = fit_tree(x, iota_rows(4), r, 1, 1);
    CHECK(tree.predict(std::vector<double>{1.5}) == Catch::Approx(0.0)); // tie -> left

    CHECK_THROWS_AS(
        tree.predict(std::vector<double>{std::numeric_limits<double>::quiet_NaN()}),
        DataError);
}

TEST_CASE("leaf_weight_row: uniform over the routed leaf") {
    const Matrix x = testutil::matrix_from({{0.0}, {1.0}, {2.0}});
    const std::vector<double> r = {1.0, 2.0, 3.0};
    const auto tree = fit_tree(x, iota_rows(3), r, 0, 1); // single leaf
    const auto w = leaf_weight_row(tree, std::vector<double>{0.3}, 3);
    for (double v : w) CHECK(v == Catch::Approx(1.0 / 3.0).margin(1e-15));

    const Matrix x2 = testutil::matrix_from({{0.0}, {1.0}, {2.0}, {3.0}});
    const std::vector<double> r2 = {0.0, 0.0, 1.0, 1.0};
    const auto stump = fit_tree(x2, iota_rows(4), r2, 1, 1);
    const auto w2 = leaf_weight_row(stump, std::vector<double>{0.5}, 4);
    CHECK(w2[0] == Catch::Approx(0.5));
    CHECK(w2[1] == Catch::Approx(0.5));
    CHECK(w2[2] == 0.0);
    CHECK(w2[3] == 0.0);
}

TEST_CASE("leaf_weight_row: dot product with fit residuals equals the prediction") {
    auto d = testutil::random_dataset(40, 3, 31);
    std::vector<double> r(d.y);
    const auto tree = fit_tree(d.x, iota_rows(40), r, 3, 4);

    Rng rng(StreamKey{77, purpose::generic, 0, 0});
    for (int t = 0; t < 100; ++t) {
        std::vector<double> q(3);
        for (double& v : q) v = rng.uniform01() * 2.0 - 1.0;
        const auto w = leaf_weight_row(tree, q, 40);
        double dot = 0.0, sum = 0.0;
        for (int i = 0; i < 40; ++i) {
            dot += w[static_cast<std::size_t>(i)] * r[static_cast<std::size_t>(i)];
            sum += w[static_cast<std::size_t>(i)];
        }
        CHECK(dot == Catch::Approx(tree.predict(q)).margin(1e-10));
        CHECK(sum == Catch::Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("fit_tree: deterministic structure") {
    auto d = testutil::random_dataset(30, 3, 17);
    std::vector<double> r(d.y);
    const auto a = fit_tree(d.x, iota_rows(30), r, 3, 3);
    const auto b = fit_tree(d.x, iota_rows(30), r, 3, 3);
    REQUIRE(a.nodes.size() == b.nodes.size());
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
        CHECK(a.nodes[i].feature == b.nodes[i].feature);
        CHECK(a.nodes[i].threshold == b.nodes[i].threshold);
        CHECK(a.nodes[i].value == b.nodes[i].value);
    }
}

TEST_CASE("fit_tree: shifting residuals shifts leaf values, not structure") {
    auto d = testutil::random_dataset(24, 2, 23);
    std::vector<double> r(d.y);
    std::vector<double> shifted(r);
    const double c = 2.5;
    for (double& v : shifted) v += c;

    const auto a = fit_tree(d.x, iota_rows(24), r, 2, 3);
    const auto b = fit_tree(d.x, iota_rows(24), shifted, 2, 3);
    REQUIRE(a.nodes.size() == b.nodes.size());
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
        CHECK(a.nodes[i].feature == b.nodes[i].feature);
        CHECK(a.nodes[i].threshold == b.nodes[i].threshold);
        if (a.nodes[i].is_leaf())
            CHECK(b.nodes[i].value ==
                  Catch::Approx(a.nodes[i].value + c).margin(1e-12));
    }
}

TEST_CASE("fit_tree: ties break to the lowest column then smallest threshold") {
    // duplicated column: identical gains, column 0 must win
    const Matrix x =
        testutil::matrix_from({{0.0, 0.0}, {1.0, 1.0}, {2.0, 2.0}, {3.0, 3.0}});
    const std::vector<double> r = {0.0, 0.0, 1.0, 1.0};
    const auto tree = fit_tree(x, iota_rows(4), r, 1, 1);
    CHECK(tree.nodes[0].feature == 0);
}

TEST_CASE("fit_tree: empty input errors") {
    Matrix x(0, 1);
    CHECK_THROWS_AS(fit_tree(x, {}, {}, 3, 1), DataError);
}
