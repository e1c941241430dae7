#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "booster.hpp"
#include "errors.hpp"

namespace lgbplus {

// ============================================================================
// Model files
//
// A model file is one JSON document: variant, hyperparameters, seed, base,
// optional calibration scalar, standardizer, column names, and the full step
// list with nested tree nodes. Numbers use round-trip-exact encoding and key
// order is stable, so identical models serialize to identical bytes.
// Learners are stored structurally (splits, thresholds, leaf values, OLS
// coefficients); per-step row memberships are re-derivable from the seed and
// the training data and are not stored.
// ============================================================================

inline constexpr int model_format_version = 1;

using json = nlohmann::json;

namespace detail {

inline json node_to_json(const ShallowTree& tree, int id) {
    const TreeNode& n = tree.nodes[static_cast<std::size_t>(id)];
    if (n.is_leaf()) return json{{"value", n.value}};
    return json{{"column", n.feature},
                {"threshold", n.threshold},
                {"left", node_to_json(tree, n.left)},
                {"right", node_to_json(tree, n.right)}};
}

inline int node_from_json(const json& j, ShallowTree& tree) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    if (j.contains("value")) {
        tree.nodes[static_cast<std::size_t>(id)].value = j.at("value").get<double>();
        return id;
    }
    tree.nodes[static_cast<std::size_t>(id)].feature = j.at("column").get<int>();
    tree.nodes[static_cast<std::size_t>(id)].threshold =
        j.at("threshold").get<double>();
    const int left = node_from_json(j.at("left"), tree);
    const int right = node_from_json(j.at("right"), tree);
    tree.nodes[static_cast<std::size_t>(id)].left = left;
    tree.nodes[static_cast<std::size_t>(id)].right = right;
    return id;
}

inline json hyper_to_json(const Hyper& h) {
    return json{{"variant", to_string(h.variant)},
                {"M", h.steps},
                {"eta", h.eta},
                {"q", h.q},
                {"rho", h.rho},
                {"judge", to_string(h.judge)},
                {"patience", h.patience},
                {"T", h.trees_per_cycle},
                {"eta_tree", h.eta_tree},
                {"eta_lin", h.eta_lin},
                {"max_depth", h.max_depth},
                {"min_leaf", h.min_leaf},
                {"standardize_target", h.standardize_target}};
}

inline Variant variant_from_string(const std::string& s) {
    if (s == "competition") return Variant::competition;
    if (s == "alternating") return Variant::alternating;
    throw DataError("unknown variant '" + s + "' in model file");
}

inline JudgeSet judge_from_string(const std::string& s) {
    if (s == "oob") return JudgeSet::oob;
    if (s == "validation") return JudgeSet::validation;
    if (s == "training") return JudgeSet::training;
    throw DataError("unknown judge set '" + s + "' in model file");
}

inline Hyper hyper_from_json(const json& j) {
    Hyper h;
    h.variant = variant_from_string(j.at("variant").get<std::string>());
    h.steps = j.at("M").get<int>();
    h.eta = j.at("eta").get<double>();
    h.q = j.at("q").get<double>();
    h.rho = j.at("rho").get<double>();
    h.judge = judge_from_string(j.at("judge").get<std::string>());
    h.patience = j.at("patience").get<int>();
    h.trees_per_cycle = j.at("T").get<int>();
    h.eta_tree = j.at("eta_tree").get<double>();
    h.eta_lin = j.at("eta_lin").get<double>();
    h.max_depth = j.at("max_depth").get<int>();
    h.min_leaf = j.at("min_leaf").get<int>();
    h.standardize_target = j.at("standardize_target").get<bool>();
    return h;
}

inline json standardizer_to_json(const Standardizer& s) {
    json j{{"means", s.means},
           {"stds", s.stds},
           {"degenerate", std::vector<int>(s.degenerate.begin(), s.degenerate.end())}};
    if (s.target_mean) {
        j["target_mean"] = *s.target_mean;
        j["target_std"] = *s.target_std;
        j["target_degenerate"] = s.target_degenerate;
    }
    return j;
}

inline Standardizer standardizer_from_json(const json& j) {
    Standardizer s;
    s.means = j.at("means").get<std::vector<double>>();
    s.stds = j.at("stds").get<std::vector<double>>();
    const auto deg = j.at("degenerate").get<std::vector<int>>();
    s.degenerate.assign(deg.begin(), deg.end());
    if (j.contains("target_mean")) {
        s.target_mean = j.at("target_mean").get<double>();
        s.target_std = j.at("target_std").get<double>();
        s.target_degenerate = j.at("target_degenerate").get<bool>();
    }
    return s;
}

inline json step_to_json(const BoostStep& s) {
    json j{{"kind", s.kind == StepKind::tree ? "tree" : "linear"},
           {"rate", s.rate},
           {"step_index", s.step_index}};
    if (s.judge) {
        json jr{{"loss_tree", s.judge->loss_tree},
                {"set", to_string(s.judge->judge)},
                {"linear_degenerate", s.judge->linear_degenerate}};
        if (s.judge->loss_lin) jr["loss_lin"] = *s.judge->loss_lin;
        j["judge"] = jr;
    }
    if (s.kind == StepKind::tree) {
        const ShallowTree& t = s.tree();
        j["tree"] = json{{"max_depth", t.max_depth},
                         {"min_leaf", t.min_leaf},
                         {"root", node_to_json(t, 0)}};
    } else {
        const LinearTerm& t = s.linear();
        j["linear"] = json{{"column", t.column}, {"alpha", t.alpha},
                           {"beta", t.beta},     {"n_fit", t.n_fit},
                           {"mean_x", t.mean_x}, {"sxx", t.sxx}};
    }
    return j;
}

inline BoostStep step_from_json(const json& j) {
    BoostStep s;
    const std::string kind = j.at("kind").get<std::string>();
    s.rate = j.at("rate").get<double>();
    s.step_index = j.at("step_index").get<int>();
    if (j.contains("judge")) {
        const json& jr = j.at("judge");
        JudgeRecord r;
        r.loss_tree = jr.at("loss_tree").get<double>();
        r.judge = judge_from_string(jr.at("set").get<std::string>());
        r.linear_degenerate = jr.at("linear_degenerate").get<bool>();
        if (jr.contains("loss_lin")) r.loss_lin = jr.at("loss_lin").get<double>();
        s.judge = r;
    }
    if (kind == "tree") {
        s.kind = StepKind::tree;
        const json& jt = j.at("tree");
        ShallowTree t;
        t.max_depth = jt.at("max_depth").get<int>();
        t.min_leaf = jt.at("min_leaf").get<int>();
        node_from_json(jt.at("root"), t);
        s.learner = std::move(t);
    } else if (kind == "linear") {
        s.kind = StepKind::linear;
        const json& jl = j.at("linear");
        LinearTerm t;
        t.column = jl.at("column").get<int>();
        t.alpha = jl.at("alpha").get<double>();
        t.beta = jl.at("beta").get<double>();
        t.n_fit = jl.at("n_fit").get<int>();
        t.mean_x = jl.at("mean_x").get<double>();
        t.sxx = jl.at("sxx").get<double>();
        s.learner = std::move(t);
    } else {
        throw DataError("unknown step kind '" + kind + "' in model file");
    }
    return s;
}

} // namespace detail

inline json model_to_json(const BoostModel& m) {
    json j{{"format_version", model_format_version},
           {"variant", to_string(m.variant)},
           {"seed", m.seed},
           {"base", m.base},
           {"hyper", detail::hyper_to_json(m.hyper)},
           {"standardizer", detail::standardizer_to_json(m.standardizer)},
           {"column_names", m.column_names}};
    if (m.calibration_beta) j["calibration_beta"] = *m.calibration_beta;
    json steps = json::array();
    for (const BoostStep& s : m.steps) steps.push_back(detail::step_to_json(s));
    j["steps"] = std::move(steps);
    return j;
}

inline BoostModel model_from_json(const json& j) {
    if (!j.contains("format_version") ||
        j.at("format_version").get<int>() != model_format_version)
        throw DataError("unsupported model file format version");
    BoostModel m;
    m.variant = detail::variant_from_string(j.at("variant").get<std::string>());
    m.seed = j.at("seed").get<std::uint64_t>();
    m.base = j.at("base").get<double>();
    m.hyper = detail::hyper_from_json(j.at("hyper"));
    m.standardizer = detail::standardizer_from_json(j.at("standardizer"));
    m.column_names = j.at("column_names").get<std::vector<std::string>>();
    if (j.contains("calibration_beta"))
        m.calibration_beta = j.at("calibration_beta").get<double>();
    for (const json& js : j.at("steps"))
        m.steps.push_back(detail::step_from_json(js));
    return m;
}

inline std::string serialize_model(const BoostModel& m) {
    return model_to_json(m).dump();
}

inline BoostModel parse_model(const std::string& text) {
    try {
        return model_from_json(json::parse(text));
    } catch (const json::exception& e) {
        throw DataError(std::string("model parse error: ") + e.what());
    }
}

// Files hold either one model object or {"format_version", "ensemble":
// {"size", "members": [...]}}.
struct ModelFile {
    bool is_ensemble = false;
    Ensemble ensemble; // single models load as a one-member ensemble

    const BoostModel& primary() const { return ensemble.members.front(); }
    Predictor predictor() const { return Predictor(ensemble); }
};

inline void save_model_file(const std::string& path, const BoostModel& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    out << serialize_model(m) << '\n';
}

inline void save_ensemble_file(const std::string& path, const Ensemble& e) {
    if (e.members.empty()) throw ConfigError("cannot save an empty ensemble");
    if (e.members.size() == 1) {
        save_model_file(path, e.members.front());
        return;
    }
    json members = json::array();
    for (const BoostModel& m : e.members) members.push_back(model_to_json(m));
    json j{{"format_version", model_format_version},
           {"ensemble", json{{"size", e.size()}, {"members", std::move(members)}}}};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    out << j.dump() << '\n';
}

inline ModelFile load_model_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    json j;
    try {
        j = json::parse(buf.str());
    } catch (const json::exception& e) {
        throw DataError(std::string("model parse error: ") + e.what());
    }
    ModelFile f;
    if (j.contains("ensemble")) {
        if (!j.contains("format_version") ||
            j.at("format_version").get<int>() != model_format_version)
            throw DataError("unsupported model file format version");
        f.is_ensemble = true;
        for (const json& jm : j.at("ensemble").at("members"))
            f.ensemble.members.push_back(model_from_json(jm));
        if (f.ensemble.members.empty())
            throw DataError("ensemble model file has no members");
    } else {
        f.ensemble.members.push_back(model_from_json(j));
    }
    return f;
}

} // namespace lgbplus
