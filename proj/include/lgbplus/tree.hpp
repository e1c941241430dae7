#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "errors.hpp"
#include "matrix.hpp"

namespace lgbplus {

// ============================================================================
// Shallow regression tree
//
// Exact greedy CART on squared error: every split maximizes the SSE reduction
// over midpoints of consecutive sorted unique feature values. Ties go to the
// lowest column index, then the smallest threshold; routing ties (value ==
// threshold) go left. Leaf values are arithmetic means of the training
// residuals routed there, which is what makes the leaf-averaging weight rows
// exact.
// ============================================================================

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
    std::vector<int> members; // training rows in this leaf (leaves only)

    bool is_leaf() const { return feature < 0; }
};

struct ShallowTree {
    std::vector<TreeNode> nodes; // node 0 is the root
    int max_depth = 0;
    int min_leaf = 1;
    std::vector<int> fit_rows; // rows the tree was trained on

    bool empty() const { return nodes.empty(); }

    int route(std::span<const double> x_row) const {
        int id = 0;
        for (;;) {
            const TreeNode& n = nodes[static_cast<std::size_t>(id)];
            if (n.is_leaf()) return id;
            const double v = x_row[static_cast<std::size_t>(n.feature)];
            if (!std::isfinite(v))
                throw DataError("non-finite feature value during tree routing");
            id = (v <= n.threshold) ? n.left : n.right;
        }
    }

    double predict(std::span<const double> x_row) const {
        return nodes[static_cast<std::size_t>(route(x_row))].value;
    }

    int depth() const { return depth_below(0); }

private:
    int depth_below(int id) const {
        const TreeNode& n = nodes[static_cast<std::size_t>(id)];
        if (n.is_leaf()) return 0;
        return 1 + std::max(depth_below(n.left), depth_below(n.right));
    }
};

inline double predict_tree(const ShallowTree& tree, std::span<const double> x_row) {
    return tree.predict(x_row);
}

namespace detail {

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

// Best SSE-reducing split for the rows in `pos` (indices into fit_rows).
// Gains below a relative epsilon of the node's raw second moment are treated
// as zero so constant residuals never split on rounding noise.
inline SplitChoice best_split(const Matrix& x, const std::vector<int>& fit_rows,
                              const std::vector<double>& resid,
                              const std::vector<int>& pos, int min_leaf) {
    const int n = static_cast<int>(pos.size());
    SplitChoice best;
    if (n < 2 * min_leaf) return best;

    double sum = 0.0, sum_sq = 0.0;
    for (int p : pos) {
        const double r = resid[static_cast<std::size_t>(p)];
        sum += r;
        sum_sq += r * r;
    }
    const double parent_score = sum * sum / static_cast<double>(n);
    const double gain_floor = 1e-12 * std::max(1e-300, sum_sq);

    std::vector<std::pair<double, double>> vals(static_cast<std::size_t>(n));
    for (int c = 0; c < x.cols; ++c) {
        for (int i = 0; i < n; ++i) {
            const int p = pos[static_cast<std::size_t>(i)];
            vals[static_cast<std::size_t>(i)] = {
                x(fit_rows[static_cast<std::size_t>(p)], c),
                resid[static_cast<std::size_t>(p)]};
        }
        std::sort(vals.begin(), vals.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });

        double left_sum = 0.0;
        for (int i = 0; i + 1 < n; ++i) {
            left_sum += vals[static_cast<std::size_t>(i)].second;
            const double v = vals[static_cast<std::size_t>(i)].first;
            const double v_next = vals[static_cast<std::size_t>(i + 1)].first;
            if (v == v_next) continue; // split only between distinct values
            const int n_left = i + 1;
            const int n_right = n - n_left;
            if (n_left < min_leaf || n_right < min_leaf) continue;
            const double right_sum = sum - left_sum;
            const double gain = left_sum * left_sum / static_cast<double>(n_left) +
                                right_sum * right_sum / static_cast<double>(n_right) -
                                parent_score;
            if (gain > gain_floor && gain > best.gain) {
                best.found = true;
                best.feature = c;
                best.threshold = 0.5 * (v + v_next);
                best.gain = gain;
            }
        }
    }
    return best;
}

} // namespace detail

// Fits a shallow tree to the residuals of `fit_rows` (resid[i] belongs to
// fit_rows[i]). Returns a single leaf when no admissible split strictly
// reduces SSE.
inline ShallowTree fit_tree(const Matrix& x, const std::vector<int>& fit_rows,
                            const std::vector<double>& resid, int max_depth,
                            int min_leaf) {
    if (fit_rows.empty()) throw DataError("fit_tree: empty input");
    if (resid.size() != fit_rows.size())
        throw InternalError("fit_tree: residual/row count mismatch");
    if (min_leaf < 1) throw ConfigError("fit_tree: min_leaf must be >= 1");
    if (max_depth < 0) throw ConfigError("fit_tree: max_depth must be >= 0");

    ShallowTree tree;
    tree.max_depth = max_depth;
    tree.min_leaf = min_leaf;
    tree.fit_rows = fit_rows;

    struct Work {
        int node_id;
        std::vector<int> pos; // indices into fit_rows
        int depth;
    };

    tree.nodes.emplace_back();
    std::vector<Work> stack;
    {
        std::vector<int> all(fit_rows.size());
        for (std::size_t i = 0; i < fit_rows.size(); ++i) all[i] = static_cast<int>(i);
        stack.push_back({0, std::move(all), 0});
    }

    while (!stack.empty()) {
        Work w = std::move(stack.back());
        stack.pop_back();

        detail::SplitChoice split;
        if (w.depth < max_depth)
            split = detail::best_split(x, fit_rows, resid, w.pos, min_leaf);

        TreeNode& node = tree.nodes[static_cast<std::size_t>(w.node_id)];
        if (!split.found) {
            double s = 0.0;
            node.members.reserve(w.pos.size());
            for (int p : w.pos) {
                s += resid[static_cast<std::size_t>(p)];
                node.members.push_back(fit_rows[static_cast<std::size_t>(p)]);
            }
            node.value = s / static_cast<double>(w.pos.size());
            continue;
        }

        node.feature = split.feature;
        node.threshold = split.threshold;

        std::vector<int> left_pos, right_pos;
        for (int p : w.pos) {
            const double v = x(fit_rows[static_cast<std::size_t>(p)], split.feature);
            (v <= split.threshold ? left_pos : right_pos).push_back(p);
        }

        const int left_id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        const int right_id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes[static_cast<std::size_t>(w.node_id)].left = left_id;
        tree.nodes[static_cast<std::size_t>(w.node_id)].right = right_id;

        stack.push_back({right_id, std::move(right_pos), w.depth + 1});
        stack.push_back({left_id, std::move(left_pos), w.depth + 1});
    }
    return tree;
}

// Leaf-averaging weight row: 1/|leaf| on the training rows sharing the leaf
// that x_row routes to, 0 elsewhere. Its dot product with the residuals used
// at fit time equals predict_tree exactly.
inline std::vector<double> leaf_weight_row(const ShallowTree& tree,
                                           std::span<const double> x_row,
                                           int n_train) {
    const TreeNode& leaf = tree.nodes[static_cast<std::size_t>(tree.route(x_row))];
    if (leaf.members.empty())
        throw InternalError("leaf_weight_row: tree has no recorded leaf membership");
    std::vector<double> w(static_cast<std::size_t>(n_train), 0.0);
    const double share = 1.0 / static_cast<double>(leaf.members.size());
    for (int i : leaf.members) w[static_cast<std::size_t>(i)] = share;
    return w;
}

} // namespace lgbplus
