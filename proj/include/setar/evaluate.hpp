#pragma once

#include "setar/data_model.hpp"
#include "setar/metrics.hpp"
#include "setar/setar_tree.hpp"

#include <map>
#include <string>
#include <utility>

namespace setar {

class MissingActuals : public DataError {
public:
    explicit MissingActuals(const std::string& id)
        : DataError("MissingActuals", "no actuals for series '" + id + "'") {}
};

/// Holds out the final `horizon` observations of every series. Held-out covariate values move to
/// the training collection's future covariates so the forecaster can still see them.
inline std::pair<SeriesCollection, SeriesCollection> split_train_test(const SeriesCollection& collection,
                                                                      std::size_t horizon) {
    if (horizon < 1) throw UsageError("horizon must be at least 1");
    collection.validate();
    SeriesCollection train;
    SeriesCollection test;
    train.frequency = test.frequency = collection.frequency;
    for (const auto& s : collection.series) {
        if (s.values.size() <= horizon) throw SeriesTooShort(s.id);
        const auto cut = s.values.end() - static_cast<std::ptrdiff_t>(horizon);
        train.series.push_back({s.id, {s.values.begin(), cut}});
        test.series.push_back({s.id, {cut, s.values.end()}});
    }
    for (const auto& cov : collection.covariates) {
        Covariate c;
        c.name = cov.name;
        c.kind = cov.kind;
        for (std::size_t s = 0; s < collection.series.size(); ++s) {
            const std::size_t m = collection.series[s].values.size() - horizon;
            if (cov.kind == CovariateKind::numeric) {
                const auto& v = cov.numeric[s];
                c.numeric.emplace_back(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m));
                std::vector<double> future(v.begin() + static_cast<std::ptrdiff_t>(m), v.end());
                if (s < cov.future_numeric.size()) {
                    future.insert(future.end(), cov.future_numeric[s].begin(), cov.future_numeric[s].end());
                }
                c.future_numeric.push_back(std::move(future));
            } else {
                const auto& v = cov.labels[s];
                c.labels.emplace_back(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m));
                std::vector<std::string> future(v.begin() + static_cast<std::ptrdiff_t>(m), v.end());
                if (s < cov.future_labels.size()) {
                    future.insert(future.end(), cov.future_labels[s].begin(), cov.future_labels[s].end());
                }
                c.future_labels.push_back(std::move(future));
            }
        }
        train.covariates.push_back(std::move(c));
    }
    return {std::move(train), std::move(test)};
}

/// Per-series msMAPE and MASE of the forecasts against the actuals, with dataset aggregates.
/// Forecast rows are matched to actuals and training series by id.
inline metrics::EvaluationReport evaluate(const ForecastMatrix& forecasts, const SeriesCollection& actuals,
                                          const SeriesCollection& training, std::size_t seasonality,
                                          double epsilon = metrics::kDefaultEpsilon) {
    std::map<std::string, const Series*> actual_by_id;
    std::map<std::string, const Series*> train_by_id;
    for (const auto& s : actuals.series) actual_by_id[s.id] = &s;
    for (const auto& s : training.series) train_by_id[s.id] = &s;

    metrics::EvaluationReport report;
    report.horizon = forecasts.horizon();
    report.seasonality = seasonality;
    report.epsilon = epsilon;
    for (std::size_t i = 0; i < forecasts.series_ids.size(); ++i) {
        const auto& id = forecasts.series_ids[i];
        const auto a = actual_by_id.find(id);
        if (a == actual_by_id.end() || a->second->values.size() < forecasts.horizon()) throw MissingActuals(id);
        const auto t = train_by_id.find(id);
        if (t == train_by_id.end()) throw DataError("MissingTraining", "no training series for '" + id + "'");
        std::vector<double> f(forecasts.horizon());
        for (std::size_t h = 0; h < f.size(); ++h) {
            f[h] = forecasts.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(h));
        }
        const std::span<const double> y(a->second->values.data(), f.size());
        metrics::SeriesScore score;
        score.id = id;
        score.msmape = metrics::msmape(f, y, epsilon);
        try {
            score.mase = metrics::mase(f, y, t->second->values, seasonality);
        } catch (const metrics::ZeroDenominator&) {
            score.mase.reset();
        }
        report.per_series.push_back(std::move(score));
    }
    metrics::aggregate(report);
    return report;
}

} // namespace setar
