#pragma once

#include "setar/data_model.hpp"
#include "setar/error.hpp"
#include "setar/linalg.hpp"
#include "setar/split_search.hpp"
#include "setar/stopping.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace setar {

class EmptyTrainingSet : public DataError {
public:
    EmptyTrainingSet() : DataError("EmptyTrainingSet", "no training rows") {}
};

/// Pooled linear autoregression fitted on the rows routed to one leaf.
struct LeafModel {
    LinearFit fit;
    std::size_t n_train_rows = 0;

    double predict(std::span<const double> x) const { return fit.predict(x); }
};

inline double predict_leaf(const LeafModel& model, std::span<const double> instance) {
    return model.predict(instance);
}

/// Global pooled regression over the given rows. Rank deficiency never fails here:
/// aliased columns get zero coefficients so that forecasting stays total.
inline LeafModel train_pr_model(const EmbeddedMatrix& matrix, std::span<const std::size_t> rows) {
    if (rows.empty()) throw EmptyTrainingSet();
    return {fit_least_squares(matrix.predictors, matrix.targets, rows, RankPolicy::drop_aliased), rows.size()};
}

inline LeafModel train_pr_baseline(const EmbeddedMatrix& matrix) {
    const auto rows = matrix.all_rows();
    return train_pr_model(matrix, rows);
}

struct TreeConfig {
    StoppingConfig stopping;
    SplitSearchConfig search;
    /// Columns eligible for splitting; empty means every predictor column.
    std::vector<std::size_t> candidate_columns;
};

struct TreeNode {
    bool is_leaf = true;
    SplitDecision decision;   ///< internal nodes only
    std::size_t left = 0;     ///< child node ids (internal nodes)
    std::size_t right = 0;
    std::size_t leaf = 0;     ///< index into SetarTree::leaves (leaves)
    std::size_t depth = 0;
};

struct TrainingSummary {
    std::size_t depth_reached = 0;
    std::size_t leaf_count = 0;
    std::vector<std::size_t> rows_per_leaf;
};

/// Per-series recursive forecasts, one row per series and one column per step ahead.
struct ForecastMatrix {
    std::vector<std::string> series_ids;
    Eigen::MatrixXd values;

    std::size_t horizon() const noexcept { return static_cast<std::size_t>(values.cols()); }
};

/// Binary threshold tree with a pooled regression in every leaf. Node 0 is the root.
class SetarTree {
public:
    FeatureLayout layout;
    StoppingConfig config;
    std::vector<TreeNode> nodes;
    std::vector<LeafModel> leaves;
    TrainingSummary summary;
    /// Training rows per leaf; populated by train_tree only (not persisted).
    std::vector<std::vector<std::size_t>> leaf_rows;

    std::size_t n_columns() const noexcept { return layout.n_columns(); }
    std::vector<std::string> column_names() const { return layout.column_names(); }

    std::size_t find_leaf_index(std::span<const double> instance) const {
        if (instance.size() != n_columns()) {
            throw DimensionMismatch("instance has " + std::to_string(instance.size()) +
                                    " columns, tree expects " + std::to_string(n_columns()));
        }
        std::size_t id = 0;
        while (!nodes[id].is_leaf) {
            const auto& node = nodes[id];
            id = instance[node.decision.column_index] < node.decision.threshold ? node.left : node.right;
        }
        return nodes[id].leaf;
    }

    const LeafModel& find_leaf(std::span<const double> instance) const {
        return leaves[find_leaf_index(instance)];
    }

    double predict(std::span<const double> instance) const { return find_leaf(instance).predict(instance); }
};

inline const LeafModel& find_leaf(const SetarTree& tree, std::span<const double> instance) {
    return tree.find_leaf(instance);
}

/// Grows the tree one level at a time. Every frontier node proposes its best split; the split
/// is kept when the stopping rule accepts it at the level's significance alpha0/divider^depth.
/// Growth ends when a level keeps no split or max_depth is reached, and every frozen node is
/// then fitted with a pooled regression.
inline SetarTree train_tree(const EmbeddedMatrix& matrix, const TreeConfig& config,
                            std::span<const std::size_t> rows) {
    config.stopping.validate();
    if (rows.empty()) throw EmptyTrainingSet();

    std::vector<std::size_t> columns = config.candidate_columns;
    if (columns.empty()) {
        columns.resize(matrix.cols());
        std::iota(columns.begin(), columns.end(), std::size_t{0});
    }
    const std::size_t min_rows = min_child_rows(matrix.cols(), config.search);

    SetarTree tree;
    tree.layout = matrix.layout;
    tree.config = config.stopping;
    tree.nodes.push_back(TreeNode{});

    std::vector<std::vector<std::size_t>> node_rows;
    node_rows.emplace_back(rows.begin(), rows.end());

    std::vector<std::size_t> frontier{0};
    for (std::size_t depth = 0; !frontier.empty() && depth < config.stopping.max_depth; ++depth) {
        std::vector<std::size_t> next;
        for (const std::size_t id : frontier) {
            const auto& here = node_rows[id];
            if (here.size() < 2 * min_rows) continue;
            const auto decision = get_opt_params(matrix, here, columns, config.search);
            if (!decision) continue;
            const double parent_sse =
                fit_least_squares(matrix.predictors, matrix.targets, here, RankPolicy::drop_aliased).sse;
            const SplitFits fits{parent_sse, decision->total_sse, here.size(), matrix.cols()};
            if (!is_good_split(fits, config.stopping, depth)) continue;

            auto [left_rows, right_rows] = split_node(matrix, here, *decision);
            const std::size_t left_id = tree.nodes.size();
            tree.nodes.push_back(TreeNode{true, {}, 0, 0, 0, depth + 1});
            tree.nodes.push_back(TreeNode{true, {}, 0, 0, 0, depth + 1});
            node_rows.push_back(std::move(left_rows));
            node_rows.push_back(std::move(right_rows));
            auto& node = tree.nodes[id];
            node.is_leaf = false;
            node.decision = *decision;
            node.left = left_id;
            node.right = left_id + 1;
            next.push_back(left_id);
            next.push_back(left_id + 1);
        }
        frontier = std::move(next);
    }

    for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
        auto& node = tree.nodes[id];
        if (!node.is_leaf) {
            node_rows[id].clear();
            node_rows[id].shrink_to_fit();
            continue;
        }
        node.leaf = tree.leaves.size();
        tree.leaves.push_back(train_pr_model(matrix, node_rows[id]));
        tree.summary.rows_per_leaf.push_back(node_rows[id].size());
        tree.summary.depth_reached = std::max(tree.summary.depth_reached, node.depth);
        tree.leaf_rows.push_back(std::move(node_rows[id]));
    }
    tree.summary.leaf_count = tree.leaves.size();
    return tree;
}

inline SetarTree train_tree(const EmbeddedMatrix& matrix, const TreeConfig& config = {}) {
    const auto rows = matrix.all_rows();
    return train_tree(matrix, config, rows);
}

/// Recursive multi-step forecasts from any one-step predictor: each step's forecast becomes
/// the newest lag of the next step's input.
template <typename OneStep>
ForecastMatrix recursive_forecast(const FeatureLayout& layout, const SeriesCollection& collection,
                                  std::size_t horizon, OneStep&& predict) {
    if (horizon < 1) throw UsageError("horizon must be at least 1");
    auto test = create_test_set(collection, layout.n_lags, layout.covariates);
    ForecastMatrix out;
    out.series_ids = test.series_ids;
    out.values.resize(static_cast<Eigen::Index>(test.rows()), static_cast<Eigen::Index>(horizon));
    std::vector<double> step(test.rows());
    for (std::size_t h = 0; h < horizon; ++h) {
        for (std::size_t s = 0; s < test.rows(); ++s) {
            step[s] = predict(test.row(s).predictors);
            out.values(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(h)) = step[s];
        }
        if (h + 1 < horizon) test = update_test_set(std::move(test), step, &collection);
    }
    return out;
}

inline ForecastMatrix forecast(const SetarTree& tree, const SeriesCollection& collection,
                               std::size_t horizon) {
    return recursive_forecast(tree.layout, collection, horizon,
                              [&](std::span<const double> x) { return tree.predict(x); });
}

inline ForecastMatrix forecast(const LeafModel& model, const FeatureLayout& layout,
                               const SeriesCollection& collection, std::size_t horizon) {
    return recursive_forecast(layout, collection, horizon,
                              [&](std::span<const double> x) { return model.predict(x); });
}

} // namespace setar
