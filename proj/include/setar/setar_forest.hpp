#pragma once

#include "setar/parallel.hpp"
#include "setar/random.hpp"
#include "setar/setar_tree.hpp"

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

namespace setar {

/// Which stopping hyperparameters each tree draws at random.
enum class Randomization { none, significance, error_red, both };

struct UniformRange {
    double lo = 0.0;
    double hi = 0.0;
};

struct ForestConfig {
    std::size_t n_trees = 10;
    double bagging_fraction = 0.8;
    double feature_fraction = 1.0;
    std::uint64_t seed = 0;
    Randomization randomization = Randomization::both;
    UniformRange alpha0_range{0.01, 0.1};
    UniformRange divider_range{1.5, 5.0};
    UniformRange error_threshold_range{0.01, 0.05};
    /// Values used for whatever the randomization mode leaves fixed. Trees always stop on `both`.
    StoppingConfig base;
    SplitSearchConfig search;
    unsigned threads = 1;
    /// Average the trees at every step and feed the mean back, instead of letting each tree
    /// run its own recursion and averaging at the end.
    bool average_per_step = false;

    void validate() const {
        if (n_trees < 1) throw UsageError("a forest needs at least one tree");
        if (!(bagging_fraction > 0.0 && bagging_fraction <= 1.0)) throw UsageError("bagging fraction must lie in (0, 1]");
        if (!(feature_fraction > 0.0 && feature_fraction <= 1.0)) throw UsageError("feature fraction must lie in (0, 1]");
        const auto check = [](const UniformRange& r, const char* name) {
            if (!(r.lo <= r.hi)) throw UsageError(std::string(name) + " range is empty");
        };
        check(alpha0_range, "alpha0");
        check(divider_range, "significance divider");
        check(error_threshold_range, "error threshold");
    }
};

class SetarForest {
public:
    ForestConfig config;
    std::vector<SetarTree> trees;
    std::vector<StoppingConfig> tree_configs;
    /// Rows of the training matrix; with the seed this fixes every row sample.
    std::size_t n_training_rows = 0;
    /// Bagged training rows per tree.
    std::vector<std::vector<std::size_t>> row_samples;
    /// Split-candidate columns per tree.
    std::vector<std::vector<std::size_t>> feature_columns;
};

/// Everything tree i needs, drawn from its own stream derive_seed(seed, i) in a fixed order:
/// the row sample, then alpha0, divider and error threshold (always drawn, used per mode),
/// then the feature subset.
struct TreePlan {
    std::vector<std::size_t> rows;
    StoppingConfig stopping;
    std::vector<std::size_t> columns;
};

inline TreePlan plan_tree(const ForestConfig& config, std::size_t tree_index, std::size_t n_rows,
                          std::size_t n_columns) {
    CounterRng rng(derive_seed(config.seed, tree_index));
    TreePlan plan;
    const auto n_sample = static_cast<std::size_t>(std::ceil(config.bagging_fraction * static_cast<double>(n_rows)));
    plan.rows = sample_without_replacement(n_rows, std::min(n_sample, n_rows), rng);

    const double alpha0 = rng.uniform(config.alpha0_range.lo, config.alpha0_range.hi);
    const double divider = rng.uniform(config.divider_range.lo, config.divider_range.hi);
    const double error_threshold = rng.uniform(config.error_threshold_range.lo, config.error_threshold_range.hi);
    plan.stopping = config.base;
    plan.stopping.criterion = StoppingCriterion::both;
    if (config.randomization == Randomization::significance || config.randomization == Randomization::both) {
        plan.stopping.alpha0 = alpha0;
        plan.stopping.significance_divider = divider;
    }
    if (config.randomization == Randomization::error_red || config.randomization == Randomization::both) {
        plan.stopping.error_threshold = error_threshold;
    }

    if (config.feature_fraction < 1.0) {
        const auto k = static_cast<std::size_t>(
            std::ceil(config.feature_fraction * static_cast<double>(n_columns)));
        plan.columns = sample_without_replacement(n_columns, std::max<std::size_t>(k, 1), rng);
    } else {
        plan.columns.resize(n_columns);
        std::iota(plan.columns.begin(), plan.columns.end(), std::size_t{0});
    }
    return plan;
}

inline SetarForest train_forest(const EmbeddedMatrix& matrix, const ForestConfig& config) {
    config.validate();
    if (matrix.rows() == 0) throw EmptyTrainingSet();
    SetarForest forest;
    forest.config = config;
    forest.n_training_rows = matrix.rows();
    forest.trees.resize(config.n_trees);
    forest.tree_configs.resize(config.n_trees);
    forest.row_samples.resize(config.n_trees);
    forest.feature_columns.resize(config.n_trees);

    parallel_for(config.n_trees, config.threads, [&](std::size_t i) {
        auto plan = plan_tree(config, i, matrix.rows(), matrix.cols());
        TreeConfig tree_config{plan.stopping, config.search, plan.columns};
        tree_config.search.threads = 1;
        try {
            forest.trees[i] = train_tree(matrix, tree_config, plan.rows);
        } catch (const Error& e) {
            throw Error(e.category(), e.kind(), "tree " + std::to_string(i) + ": " + e.what());
        }
        forest.trees[i].leaf_rows.clear();
        forest.tree_configs[i] = plan.stopping;
        forest.row_samples[i] = std::move(plan.rows);
        forest.feature_columns[i] = std::move(plan.columns);
    });
    return forest;
}

/// Each tree's own recursive forecast.
inline std::vector<ForecastMatrix> forecast_trees(const SetarForest& forest, const SeriesCollection& collection,
                                                  std::size_t horizon, unsigned threads = 1) {
    std::vector<ForecastMatrix> out(forest.trees.size());
    parallel_for(forest.trees.size(), threads,
                 [&](std::size_t i) { out[i] = forecast(forest.trees[i], collection, horizon); });
    return out;
}

inline ForecastMatrix average_forecasts(const std::vector<ForecastMatrix>& per_tree) {
    if (per_tree.empty()) throw UsageError("nothing to average");
    ForecastMatrix mean;
    mean.series_ids = per_tree.front().series_ids;
    mean.values = per_tree.front().values;
    for (std::size_t i = 1; i < per_tree.size(); ++i) mean.values += per_tree[i].values;
    mean.values /= static_cast<double>(per_tree.size());
    return mean;
}

inline ForecastMatrix forecast_forest(const SetarForest& forest, const SeriesCollection& collection,
                                      std::size_t horizon, unsigned threads = 1) {
    if (forest.trees.empty()) throw UsageError("forest has no trees");
    if (!forest.config.average_per_step) {
        return average_forecasts(forecast_trees(forest, collection, horizon, threads));
    }
    const double n = static_cast<double>(forest.trees.size());
    return recursive_forecast(forest.trees.front().layout, collection, horizon, [&](std::span<const double> x) {
        double sum = 0.0;
        for (const auto& tree : forest.trees) sum += tree.predict(x);
        return sum / n;
    });
}

} // namespace setar
