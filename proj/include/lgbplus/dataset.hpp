#pragma once

#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "matrix.hpp"
#include "rng.hpp"

namespace lgbplus {

// ============================================================================
// Feature groups
// ============================================================================

// Named, disjoint sets of column indices. Used by permutation importance;
// when no grouping is supplied, every column forms its own group.
struct FeatureGroups {
    std::vector<std::pair<std::string, std::vector<int>>> groups;

    bool empty() const { return groups.empty(); }
    std::size_t size() const { return groups.size(); }
};

// ============================================================================
// Dataset
// ============================================================================

struct Dataset {
    Matrix x;                              // N x P predictors
    std::vector<double> y;                 // length N targets
    std::vector<std::string> column_names; // length P
    std::optional<FeatureGroups> groups;

    int n_rows() const { return x.rows; }
    int n_cols() const { return x.cols; }
};

inline void validate_groups(const FeatureGroups& g, int n_cols) {
    std::set<int> seen;
    for (const auto& [name, cols] : g.groups) {
        if (cols.empty())
            throw DataError("group '" + name + "' is empty");
        for (int c : cols) {
            if (c < 0 || c >= n_cols)
                throw DataError("group '" + name + "' references column " +
                                std::to_string(c) + " out of range");
            if (!seen.insert(c).second)
                throw DataError("column " + std::to_string(c) +
                                " appears in more than one group");
        }
    }
}

inline void validate_dataset(const Dataset& d) {
    if (d.x.rows < 2) throw DataError("dataset needs at least 2 rows");
    if (d.x.cols < 1) throw DataError("dataset needs at least 1 column");
    if (static_cast<int>(d.y.size()) != d.x.rows)
        throw DataError("target length does not match row count");
    if (!d.x.all_finite())
        throw DataError("non-finite value in predictor matrix");
    for (double v : d.y)
        if (!std::isfinite(v)) throw DataError("non-finite value in target");
    if (!d.column_names.empty() &&
        static_cast<int>(d.column_names.size()) != d.x.cols)
        throw DataError("column name count does not match column count");
    if (d.groups) validate_groups(*d.groups, d.x.cols);
}

inline FeatureGroups singleton_groups(const Dataset& d) {
    FeatureGroups g;
    for (int c = 0; c < d.n_cols(); ++c) {
        std::string name = d.column_names.empty()
                               ? "col" + std::to_string(c)
                               : d.column_names[static_cast<std::size_t>(c)];
        g.groups.emplace_back(std::move(name), std::vector<int>{c});
    }
    return g;
}

// ============================================================================
// Standardization
// ============================================================================

// Column means and sample (n-1) standard deviations. Zero-variance columns
// are flagged degenerate and left unscaled (std recorded as 1, mean still
// removed); they are never dropped, so column indices stay stable.
struct Standardizer {
    std::vector<double> means;
    std::vector<double> stds;
    std::vector<char> degenerate;
    std::optional<double> target_mean;
    std::optional<double> target_std;
    bool target_degenerate = false;

    int n_cols() const { return static_cast<int>(means.size()); }

    Matrix apply(const Matrix& raw) const {
        if (raw.cols != n_cols())
            throw DataError("standardizer/matrix column mismatch");
        Matrix out(raw.rows, raw.cols);
        for (int r = 0; r < raw.rows; ++r)
            for (int c = 0; c < raw.cols; ++c)
                out(r, c) = (raw(r, c) - means[static_cast<std::size_t>(c)]) /
                            stds[static_cast<std::size_t>(c)];
        return out;
    }

    Matrix invert(const Matrix& scaled) const {
        if (scaled.cols != n_cols())
            throw DataError("standardizer/matrix column mismatch");
        Matrix out(scaled.rows, scaled.cols);
        for (int r = 0; r < scaled.rows; ++r)
            for (int c = 0; c < scaled.cols; ++c)
                out(r, c) = scaled(r, c) * stds[static_cast<std::size_t>(c)] +
                            means[static_cast<std::size_t>(c)];
        return out;
    }

    std::vector<double> apply_target(const std::vector<double>& y) const {
        if (!target_mean) return y;
        std::vector<double> out(y.size());
        for (std::size_t i = 0; i < y.size(); ++i)
            out[i] = (y[i] - *target_mean) / *target_std;
        return out;
    }

    std::vector<double> invert_target(const std::vector<double>& ys) const {
        if (!target_mean) return ys;
        std::vector<double> out(ys.size());
        for (std::size_t i = 0; i < ys.size(); ++i)
            out[i] = ys[i] * *target_std + *target_mean;
        return out;
    }
};

namespace detail {
inline std::pair<double, double> mean_and_sample_std(std::span<const double> v) {
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) {
        const double d = x - m;
        ss += d * d;
    }
    const double var = v.size() > 1 ? ss / static_cast<double>(v.size() - 1) : 0.0;
    return {m, std::sqrt(var)};
}
} // namespace detail

// Fits column means/stds on `data` and returns the standardized copy.
// The target is standardized too unless `standardize_target` is false.
inline std::pair<Standardizer, Dataset>
standardize_fit(const Dataset& data, bool standardize_target = true) {
    validate_dataset(data);
    const int n = data.n_rows();
    const int p = data.n_cols();

    Standardizer s;
    s.means.resize(static_cast<std::size_t>(p));
    s.stds.resize(static_cast<std::size_t>(p));
    s.degenerate.assign(static_cast<std::size_t>(p), 0);

    std::vector<double> col(static_cast<std::size_t>(n));
    for (int c = 0; c < p; ++c) {
        for (int r = 0; r < n; ++r) col[static_cast<std::size_t>(r)] = data.x(r, c);
        auto [m, sd] = detail::mean_and_sample_std(col);
        s.means[static_cast<std::size_t>(c)] = m;
        if (sd > 0.0) {
            s.stds[static_cast<std::size_t>(c)] = sd;
        } else {
            s.stds[static_cast<std::size_t>(c)] = 1.0;
            s.degenerate[static_cast<std::size_t>(c)] = 1;
        }
    }

    Dataset out;
    out.x = s.apply(data.x);
    out.column_names = data.column_names;
    out.groups = data.groups;

    if (standardize_target) {
        auto [m, sd] = detail::mean_and_sample_std(data.y);
        s.target_mean = m;
        if (sd > 0.0) {
            s.target_std = sd;
        } else {
            s.target_std = 1.0;
            s.target_degenerate = true;
        }
        out.y = s.apply_target(data.y);
    } else {
        out.y = data.y;
    }
    return {s, out};
}

inline Dataset unstandardize(const Standardizer& s, const Dataset& scaled) {
    Dataset out;
    out.x = s.invert(scaled.x);
    out.y = s.invert_target(scaled.y);
    out.column_names = scaled.column_names;
    out.groups = scaled.groups;
    return out;
}

// ============================================================================
// Subsampling
// ============================================================================

// Without-replacement row split used per boosting step: in_bag of size
// floor(q*n), out_of_bag the complement. Deterministic given the stream key.
struct SubsampleSplit {
    std::vector<int> in_bag;
    std::vector<int> out_of_bag;
    StreamKey seed_path;
};

inline SubsampleSplit draw_subsample(int n, double q, const StreamKey& key) {
    if (!(q > 0.0) || q > 1.0)
        throw ConfigError("subsample fraction q must be in (0, 1]");
    const int k = static_cast<int>(std::floor(q * static_cast<double>(n)));
    if (k < 2) throw ConfigError("subsample too small: floor(q*n) must be >= 2");

    Rng rng(key);
    SubsampleSplit split;
    split.seed_path = key;
    split.in_bag = rng.sample_without_replacement(n, k);

    std::vector<char> in(static_cast<std::size_t>(n), 0);
    for (int i : split.in_bag) in[static_cast<std::size_t>(i)] = 1;
    for (int i = 0; i < n; ++i)
        if (!in[static_cast<std::size_t>(i)]) split.out_of_bag.push_back(i);
    return split;
}

inline std::vector<int> draw_feature_subset(int p, double rho, const StreamKey& key) {
    if (!(rho > 0.0) || rho > 1.0)
        throw ConfigError("feature fraction rho must be in (0, 1]");
    const int k = static_cast<int>(std::floor(rho * static_cast<double>(p)));
    if (k < 1) throw ConfigError("feature subset empty: floor(rho*p) must be >= 1");
    Rng rng(key);
    return rng.sample_without_replacement(p, k);
}

} // namespace lgbplus
