#pragma once

#include "setar/dgp.hpp"
#include "setar/evaluate.hpp"
#include "setar/io.hpp"
#include "setar/metrics.hpp"
#include "setar/parallel.hpp"
#include "setar/serialize.hpp"
#include "setar/setar_forest.hpp"
#include "setar/setar_tree.hpp"

#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>

namespace setar::cli {

using json = nlohmann::ordered_json;

enum class ModelKind { tree, forest, pr };

/// Every knob of every subcommand. Fields a subcommand does not use are ignored.
struct RunConfig {
    std::string subcommand;

    std::string input;
    std::string covariate_config;
    std::string model;
    std::string model_out;
    std::string out;
    std::string report_out;
    std::string forecasts;
    std::string actuals;
    std::string training;

    std::size_t lag = 0;   ///< 0 selects the lag heuristic
    std::size_t horizon = 8;
    std::optional<std::size_t> seasonality;
    double epsilon = metrics::kDefaultEpsilon;

    ModelKind model_kind = ModelKind::tree;
    StoppingConfig stopping;
    std::size_t grid_size = 15;
    ForestConfig forest;
    unsigned threads = 0;
    std::uint64_t seed = 1;

    dgp::DgpConfig simulation;

    void validate() const;
};

struct PhaseTimes {
    double train_ms = 0.0;
    double forecast_ms = 0.0;
    double evaluate_ms = 0.0;
};

struct RunReport {
    json config;
    PhaseTimes timing;
    json model;
    std::optional<metrics::EvaluationReport> evaluation;

    json to_json() const;
};

inline const char* kind_name(ModelKind k) {
    switch (k) {
    case ModelKind::tree:
        return "tree";
    case ModelKind::forest:
        return "forest";
    case ModelKind::pr:
        return "pr";
    }
    return "tree";
}

inline const char* sim_kind_name(dgp::Kind k) {
    switch (k) {
    case dgp::Kind::chaotic_logistic:
        return "chaotic-logistic";
    case dgp::Kind::mackey_glass:
        return "mackey-glass";
    case dgp::Kind::setar2:
        return "setar2";
    }
    return "chaotic-logistic";
}

inline dgp::Kind parse_sim_kind(const std::string& s) {
    if (s == "chaotic-logistic") return dgp::Kind::chaotic_logistic;
    if (s == "mackey-glass") return dgp::Kind::mackey_glass;
    if (s == "setar2") return dgp::Kind::setar2;
    throw UsageError("unknown simulation kind '" + s + "'");
}

inline void RunConfig::validate() const {
    const auto need = [&](const std::string& value, const char* flag) {
        if (value.empty()) throw UsageError(subcommand + " requires " + flag);
    };
    const auto forbid = [&](const std::string& value, const char* flag) {
        if (!value.empty()) throw UsageError(std::string(flag) + " cannot be used with " + subcommand);
    };
    if (horizon < 1) throw UsageError("--horizon must be at least 1");
    if (seasonality && *seasonality < 1) throw UsageError("--seasonality must be at least 1");
    if (grid_size < 1) throw UsageError("--grid-size must be at least 1");
    stopping.validate();
    if (subcommand == "simulate") {
        need(out, "--out");
        if (simulation.length < 2) throw UsageError("--length must be at least 2");
    } else if (subcommand == "train" || subcommand == "train-forest") {
        need(input, "--input");
        need(model_out, "--model-out");
        forbid(model, "--model");
        if (subcommand == "train-forest") forest.validate();
    } else if (subcommand == "forecast") {
        need(model, "--model");
        need(input, "--input");
        need(out, "--out");
        forbid(model_out, "--model-out");
    } else if (subcommand == "evaluate") {
        need(forecasts, "--forecasts");
        need(actuals, "--actuals");
        need(training, "--training");
        need(out, "--out");
    } else if (subcommand == "run") {
        need(input, "--input");
        forbid(model, "--model");
        if (model_kind == ModelKind::forest) forest.validate();
    } else {
        throw UsageError("unknown subcommand '" + subcommand + "'");
    }
}

inline json stopping_json(const StoppingConfig& s) {
    return json{{"criterion", io::criterion_name(s.criterion)},
                {"alpha0", s.alpha0},
                {"significance_divider", s.significance_divider},
                {"error_threshold", s.error_threshold},
                {"max_depth", s.max_depth}};
}

inline json config_json(const RunConfig& c, std::size_t lag_used, unsigned threads) {
    json j{{"subcommand", c.subcommand},
           {"input", c.input},
           {"covariate_config", c.covariate_config},
           {"model", c.model},
           {"model_out", c.model_out},
           {"out", c.out},
           {"lag", lag_used},
           {"horizon", c.horizon},
           {"seasonality", c.seasonality ? json(*c.seasonality) : json(nullptr)},
           {"epsilon", c.epsilon},
           {"model_kind", kind_name(c.model_kind)},
           {"stopping", stopping_json(c.stopping)},
           {"grid_size", c.grid_size},
           {"threads", threads},
           {"seed", c.seed}};
    if (c.model_kind == ModelKind::forest || c.subcommand == "train-forest") {
        const auto& f = c.forest;
        j["forest"] = json{{"trees", f.n_trees},
                           {"bagging_fraction", f.bagging_fraction},
                           {"feature_fraction", f.feature_fraction},
                           {"seed", f.seed},
                           {"randomize", io::detail::randomization_name(f.randomization)},
                           {"alpha0_range", {f.alpha0_range.lo, f.alpha0_range.hi}},
                           {"divider_range", {f.divider_range.lo, f.divider_range.hi}},
                           {"error_threshold_range", {f.error_threshold_range.lo, f.error_threshold_range.hi}},
                           {"average_per_step", f.average_per_step}};
    }
    if (c.subcommand == "simulate") {
        j["simulation"] = json{{"kind", sim_kind_name(c.simulation.kind)},
                               {"n", c.simulation.n_series},
                               {"length", c.simulation.length},
                               {"seed", c.simulation.seed}};
    }
    return j;
}

inline json tree_summary(const SetarTree& tree) {
    json splits = json::array();
    const auto names = tree.column_names();
    for (const auto& node : tree.nodes) {
        if (node.is_leaf) continue;
        splits.push_back({{"depth", node.depth},
                          {"column", names[node.decision.column_index]},
                          {"threshold", node.decision.threshold}});
    }
    return json{{"depth", tree.summary.depth_reached},
                {"leaves", tree.summary.leaf_count},
                {"rows_per_leaf", tree.summary.rows_per_leaf},
                {"splits", splits}};
}

inline json evaluation_json(const metrics::EvaluationReport& r) {
    json per = json::array();
    for (const auto& s : r.per_series) {
        per.push_back({{"id", s.id}, {"msmape", s.msmape}, {"mase", s.mase ? json(*s.mase) : json(nullptr)}});
    }
    const auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    return json{{"per_series", per},
                {"aggregates",
                 {{"mean_msmape", num(r.mean_msmape)},
                  {"median_msmape", num(r.median_msmape)},
                  {"mean_mase", num(r.mean_mase)},
                  {"median_mase", num(r.median_mase)},
                  {"mase_undefined", r.mase_undefined}}},
                {"horizon", r.horizon},
                {"seasonality", r.seasonality},
                {"epsilon", r.epsilon}};
}

inline json RunReport::to_json() const {
    json j{{"config", config},
           {"timing_ms",
            {{"train", timing.train_ms}, {"forecast", timing.forecast_ms}, {"evaluate", timing.evaluate_ms}}},
           {"model", model}};
    if (evaluation) j["evaluation"] = evaluation_json(*evaluation);
    return j;
}

/// A trained model of any kind, behind one forecast call.
struct TrainedModel {
    ModelKind kind = ModelKind::tree;
    SetarTree tree;   ///< tree and pr (a pr baseline is stored as a single-leaf tree)
    SetarForest forest;

    ForecastMatrix forecast(const SeriesCollection& collection, std::size_t horizon, unsigned threads) const {
        if (kind == ModelKind::forest) return forecast_forest(forest, collection, horizon, threads);
        return setar::forecast(tree, collection, horizon);
    }

    std::string serialize() const {
        return kind == ModelKind::forest ? io::forest_to_string(forest) : io::tree_to_string(tree);
    }

    json summary() const {
        if (kind != ModelKind::forest) {
            auto j = tree_summary(tree);
            j["kind"] = kind_name(kind);
            return j;
        }
        json trees = json::array();
        for (std::size_t i = 0; i < forest.trees.size(); ++i) {
            auto t = tree_summary(forest.trees[i]);
            t["stopping"] = stopping_json(forest.tree_configs[i]);
            trees.push_back(std::move(t));
        }
        return json{{"kind", "forest"}, {"trees", trees}};
    }
};

/// The pooled-regression baseline as a single-leaf tree.
inline SetarTree pr_as_tree(const EmbeddedMatrix& matrix) {
    SetarTree tree;
    tree.layout = matrix.layout;
    tree.config.max_depth = 0;
    tree.nodes.push_back(TreeNode{});
    tree.leaves.push_back(train_pr_baseline(matrix));
    tree.summary.leaf_count = 1;
    tree.summary.rows_per_leaf.push_back(matrix.rows());
    return tree;
}

inline TrainedModel train_model(const EmbeddedMatrix& matrix, const RunConfig& c, unsigned threads) {
    TrainedModel m;
    m.kind = c.model_kind;
    switch (c.model_kind) {
    case ModelKind::pr:
        m.tree = pr_as_tree(matrix);
        break;
    case ModelKind::tree: {
        TreeConfig tc;
        tc.stopping = c.stopping;
        tc.search.grid_size = c.grid_size;
        tc.search.threads = threads;
        m.tree = train_tree(matrix, tc);
        m.tree.leaf_rows.clear();
        break;
    }
    case ModelKind::forest: {
        ForestConfig fc = c.forest;
        fc.base = c.stopping;
        fc.search.grid_size = c.grid_size;
        fc.threads = threads;
        m.forest = train_forest(matrix, fc);
        break;
    }
    }
    return m;
}

inline double elapsed_ms(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

inline std::map<std::string, CovariateKind> load_kinds(const RunConfig& c) {
    if (c.covariate_config.empty()) return {};
    return io::parse_covariate_kinds(io::read_file(c.covariate_config));
}

inline std::size_t choose_lag(const RunConfig& c) {
    return c.lag > 0 ? c.lag : metrics::heuristic_lags(c.seasonality, c.horizon);
}

/// Executes one subcommand. Outputs are written atomically; the returned report echoes every
/// parameter needed to repeat the run.
inline RunReport run_pipeline(const RunConfig& c) {
    c.validate();
    const unsigned threads = resolve_threads(c.threads);
    RunReport report;
    std::size_t lag_used = choose_lag(c);

    if (c.subcommand == "simulate") {
        const auto data = dgp::simulate(c.simulation);
        io::atomic_write(c.out, io::format_values(data));
    } else if (c.subcommand == "train" || c.subcommand == "train-forest") {
        RunConfig rc = c;
        if (c.subcommand == "train-forest") rc.model_kind = ModelKind::forest;
        const auto data = io::load_series(c.input, load_kinds(c));
        const auto specs = infer_covariate_specs(data);
        auto t0 = std::chrono::steady_clock::now();
        const auto matrix = create_input_matrix(data, lag_used, specs);
        const auto model = train_model(matrix, rc, threads);
        report.timing.train_ms = elapsed_ms(t0);
        io::atomic_write(c.model_out, model.serialize());
        report.model = model.summary();
    } else if (c.subcommand == "forecast") {
        TrainedModel model;
        const bool is_forest = io::read_model(io::read_file(c.model), model.tree, model.forest);
        model.kind = is_forest ? ModelKind::forest : ModelKind::tree;
        lag_used = is_forest ? model.forest.trees.front().layout.n_lags : model.tree.layout.n_lags;
        const auto data = io::load_series(c.input, load_kinds(c));
        auto t0 = std::chrono::steady_clock::now();
        const auto f = model.forecast(data, c.horizon, threads);
        report.timing.forecast_ms = elapsed_ms(t0);
        io::atomic_write(c.out, io::format_forecasts(f));
        report.model = model.summary();
    } else if (c.subcommand == "evaluate") {
        auto t0 = std::chrono::steady_clock::now();
        const auto f = io::parse_forecasts(io::read_file(c.forecasts));
        const auto actuals = io::load_series(c.actuals);
        const auto training = io::load_series(c.training);
        report.evaluation = evaluate(f, actuals, training, c.seasonality.value_or(1), c.epsilon);
        report.timing.evaluate_ms = elapsed_ms(t0);
        io::atomic_write(c.out, evaluation_json(*report.evaluation).dump(2) + "\n");
    } else if (c.subcommand == "run") {
        const auto data = io::load_series(c.input, load_kinds(c));
        const auto [train, test] = split_train_test(data, c.horizon);
        const auto specs = infer_covariate_specs(train);
        auto t0 = std::chrono::steady_clock::now();
        const auto matrix = create_input_matrix(train, lag_used, specs);
        const auto model = train_model(matrix, c, threads);
        report.timing.train_ms = elapsed_ms(t0);
        t0 = std::chrono::steady_clock::now();
        const auto f = model.forecast(train, c.horizon, threads);
        report.timing.forecast_ms = elapsed_ms(t0);
        t0 = std::chrono::steady_clock::now();
        report.evaluation = evaluate(f, test, train, c.seasonality.value_or(1), c.epsilon);
        report.timing.evaluate_ms = elapsed_ms(t0);
        report.model = model.summary();
        if (!c.out.empty()) io::atomic_write(c.out, io::format_forecasts(f));
        if (!c.model_out.empty()) io::atomic_write(c.model_out, model.serialize());
    }

    report.config = config_json(c, lag_used, threads);
    if (!c.report_out.empty()) io::atomic_write(c.report_out, report.to_json().dump(2) + "\n");
    return report;
}

} // namespace setar::cli
