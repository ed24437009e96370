#include "setar/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>
#include <utility>

namespace {

using setar::cli::RunConfig;

int exit_code(setar::ErrorCategory c) {
    switch (c) {
    case setar::ErrorCategory::usage:
        return 2;
    case setar::ErrorCategory::data:
        return 3;
    case setar::ErrorCategory::numerical:
        return 4;
    }
    return 3;
}

const char* category_name(setar::ErrorCategory c) {
    switch (c) {
    case setar::ErrorCategory::usage:
        return "usage";
    case setar::ErrorCategory::data:
        return "data";
    case setar::ErrorCategory::numerical:
        return "numerical";
    }
    return "data";
}

void fail_line(const char* category, const std::string& kind, const std::string& message) {
    std::string flat = message;
    for (auto& ch : flat) {
        if (ch == '\n' || ch == '\r') ch = ' ';
    }
    std::cerr << "error " << category << ' ' << kind << ": " << flat << '\n';
}

struct Options {
    RunConfig config;
    std::string stopping = "both";
    std::string randomize = "both";
    std::string sim_kind = "chaotic-logistic";
    std::size_t seasonality = 0;
    std::string baseline;
    std::string model_kind = "tree";
    bool per_step = false;
    std::pair<double, double> alpha0_range{0.01, 0.1};
    std::pair<double, double> divider_range{1.5, 5.0};
    std::pair<double, double> error_range{0.01, 0.05};
};

void add_data_flags(CLI::App* app, Options& o) {
    app->add_option("--input", o.config.input, "Series file (values format or long CSV)");
    app->add_option("--covariates", o.config.covariate_config, "Covariate kinds file (cov.<name>.kind=...)");
    app->add_option("--lag", o.config.lag, "Number of lags (default: heuristic from seasonality/horizon)");
    app->add_option("--horizon", o.config.horizon, "Forecast horizon")->capture_default_str();
    app->add_option("--seasonality", o.seasonality, "Seasonal cycle length");
}

void add_stopping_flags(CLI::App* app, Options& o) {
    auto& s = o.config.stopping;
    app->add_option("--stopping", o.stopping, "lin-test | error-red | both")->capture_default_str();
    app->add_option("--alpha0", s.alpha0, "Initial F-test significance")->capture_default_str();
    app->add_option("--sig-divider", s.significance_divider, "Per-level significance divider")->capture_default_str();
    app->add_option("--error-threshold", s.error_threshold, "Minimum relative SSE reduction")->capture_default_str();
    app->add_option("--max-depth", s.max_depth, "Maximum tree depth")->capture_default_str();
    app->add_option("--grid-size", o.config.grid_size, "Thresholds per split column")->capture_default_str();
}

void add_forest_flags(CLI::App* app, Options& o) {
    auto& f = o.config.forest;
    app->add_option("--trees", f.n_trees, "Number of trees")->capture_default_str();
    app->add_option("--bagging-fraction", f.bagging_fraction, "Row fraction per tree")->capture_default_str();
    app->add_option("--feature-fraction", f.feature_fraction, "Split-column fraction per tree")->capture_default_str();
    app->add_option("--randomize", o.randomize, "none | significance | error-red | both")->capture_default_str();
    app->add_option("--alpha0-range", o.alpha0_range, "alpha0 bounds LO HI")->capture_default_str();
    app->add_option("--divider-range", o.divider_range, "Significance divider bounds LO HI")->capture_default_str();
    app->add_option("--error-threshold-range", o.error_range, "Error threshold bounds LO HI")->capture_default_str();
    app->add_flag("--average-per-step", o.per_step, "Average trees at each step and feed the mean back");
}

void add_common(CLI::App* app, Options& o) {
    app->add_option("--threads", o.config.threads, "Worker threads (default: SETAR_THREADS or all cores)");
    app->add_option("--seed", o.config.seed, "Random seed")->capture_default_str();
    app->add_option("--report", o.config.report_out, "Write a JSON run report here");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"SETAR-Tree / SETAR-Forest global forecasting"};
    app.require_subcommand(1);
    Options o;

    auto* simulate = app.add_subcommand("simulate", "Generate a simulated dataset");
    simulate->add_option("--kind", o.sim_kind, "chaotic-logistic | mackey-glass | setar2")->capture_default_str();
    simulate->add_option("--n", o.config.simulation.n_series, "Number of series")->capture_default_str();
    simulate->add_option("--length", o.config.simulation.length, "Series length")->capture_default_str();
    simulate->add_option("--out", o.config.out, "Output values file");
    add_common(simulate, o);

    auto* train = app.add_subcommand("train", "Train a SETAR-Tree (or the PR baseline)");
    add_data_flags(train, o);
    add_stopping_flags(train, o);
    train->add_option("--baseline", o.baseline, "pr: train the pooled regression baseline");
    train->add_option("--model-out", o.config.model_out, "Model file to write");
    train->add_option("--model", o.config.model, "(rejected for train)");
    add_common(train, o);

    auto* train_forest = app.add_subcommand("train-forest", "Train a SETAR-Forest");
    add_data_flags(train_forest, o);
    add_stopping_flags(train_forest, o);
    add_forest_flags(train_forest, o);
    train_forest->add_option("--model-out", o.config.model_out, "Model file to write");
    train_forest->add_option("--model", o.config.model, "(rejected for train-forest)");
    add_common(train_forest, o);

    auto* forecast = app.add_subcommand("forecast", "Forecast with a saved model");
    forecast->add_option("--model", o.config.model, "Model file");
    forecast->add_option("--input", o.config.input, "Series to forecast from");
    forecast->add_option("--covariates", o.config.covariate_config, "Covariate kinds file");
    forecast->add_option("--horizon", o.config.horizon, "Forecast horizon")->capture_default_str();
    forecast->add_option("--out", o.config.out, "Forecast CSV to write");
    forecast->add_option("--model-out", o.config.model_out, "(rejected for forecast)");
    add_common(forecast, o);

    auto* evaluate = app.add_subcommand("evaluate", "Score forecasts with msMAPE and MASE");
    evaluate->add_option("--forecasts", o.config.forecasts, "Forecast CSV");
    evaluate->add_option("--actuals", o.config.actuals, "Actual future values");
    evaluate->add_option("--training", o.config.training, "Training series (for MASE scaling)");
    evaluate->add_option("--seasonality", o.seasonality, "Seasonal cycle length (default 1)");
    evaluate->add_option("--epsilon", o.config.epsilon, "msMAPE epsilon")->capture_default_str();
    evaluate->add_option("--out", o.config.out, "Report JSON to write");
    add_common(evaluate, o);

    auto* run = app.add_subcommand("run", "Hold out the last horizon points, train, forecast and evaluate");
    add_data_flags(run, o);
    add_stopping_flags(run, o);
    add_forest_flags(run, o);
    run->add_option("--model-kind", o.model_kind, "tree | forest | pr")->capture_default_str();
    run->add_option("--baseline", o.baseline, "pr: same as --model-kind pr");
    run->add_option("--out", o.config.out, "Forecast CSV to write");
    run->add_option("--model-out", o.config.model_out, "Also save the trained model");
    run->add_option("--model", o.config.model, "(rejected for run)");
    run->add_option("--epsilon", o.config.epsilon, "msMAPE epsilon")->capture_default_str();
    add_common(run, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        fail_line("usage", "Usage", e.what());
        return 2;
    }

    try {
        auto& c = o.config;
        const auto* sub = app.get_subcommands().front();
        c.subcommand = sub->get_name();
        c.stopping.criterion = setar::io::parse_criterion(o.stopping);
        c.forest.randomization = setar::io::parse_randomization(o.randomize);
        c.forest.average_per_step = o.per_step;
        c.forest.alpha0_range = {o.alpha0_range.first, o.alpha0_range.second};
        c.forest.divider_range = {o.divider_range.first, o.divider_range.second};
        c.forest.error_threshold_range = {o.error_range.first, o.error_range.second};
        c.forest.seed = c.seed;
        c.simulation.seed = c.seed;
        c.simulation.kind = setar::cli::parse_sim_kind(o.sim_kind);
        if (o.seasonality > 0) c.seasonality = o.seasonality;
        if (o.model_kind == "tree") {
            c.model_kind = setar::cli::ModelKind::tree;
        } else if (o.model_kind == "forest") {
            c.model_kind = setar::cli::ModelKind::forest;
        } else if (o.model_kind == "pr") {
            c.model_kind = setar::cli::ModelKind::pr;
        } else {
            throw setar::UsageError("unknown --model-kind '" + o.model_kind + "'");
        }
        if (!o.baseline.empty()) {
            if (o.baseline != "pr") throw setar::UsageError("--baseline only accepts 'pr'");
            c.model_kind = setar::cli::ModelKind::pr;
        }
        const auto report = setar::cli::run_pipeline(c);
        if (report.evaluation) {
            const auto& e = *report.evaluation;
            std::cout << "mean_msmape=" << e.mean_msmape << " median_msmape=" << e.median_msmape
                      << " mean_mase=" << e.mean_mase << " median_mase=" << e.median_mase << '\n';
        }
        return 0;
    } catch (const setar::Error& e) {
        fail_line(category_name(e.category()), e.kind(), e.what());
        return exit_code(e.category());
    } catch (const std::exception& e) {
        fail_line("data", "Internal", e.what());
        return 3;
    }
}
