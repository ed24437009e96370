#pragma once

#include "setar/error.hpp"
#include "setar/linalg.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_set>
#include <variant>
#include <vector>

namespace setar {

class CovariateMisaligned : public DataError {
public:
    CovariateMisaligned(const std::string& name, const std::string& id)
        : DataError("CovariateMisaligned",
                    "covariate '" + name + "' is not aligned with series '" + id + "'") {}
};

class UnknownCategory : public DataError {
public:
    UnknownCategory(const std::string& name, const std::string& value)
        : DataError("UnknownCategory",
                    "covariate '" + name + "' has unseen category '" + value + "'") {}
};

class MissingFutureCovariates : public DataError {
public:
    explicit MissingFutureCovariates(std::size_t step)
        : DataError("MissingFutureCovariates",
                    "future covariate values are missing for forecast step " + std::to_string(step)),
          step(step) {}
    std::size_t step;
};

enum class CovariateKind { numeric, categorical };
enum class Frequency { none, daily, monthly, quarterly };

struct Series {
    std::string id;
    std::vector<double> values;
};

/// One covariate across all series of a collection. Exactly one of numeric / labels is used,
/// depending on kind, each indexed [series][time]. The future_* members hold values beyond
/// the end of each series and are only read when forecasting.
struct Covariate {
    std::string name;
    CovariateKind kind = CovariateKind::numeric;
    std::vector<std::vector<double>> numeric;
    std::vector<std::vector<std::string>> labels;
    std::vector<std::vector<double>> future_numeric;
    std::vector<std::vector<std::string>> future_labels;

    std::size_t length(std::size_t s) const {
        return kind == CovariateKind::numeric ? numeric.at(s).size() : labels.at(s).size();
    }
    std::size_t future_length(std::size_t s) const {
        const auto& v = kind == CovariateKind::numeric ? future_numeric.size() : future_labels.size();
        if (s >= v) return 0;
        return kind == CovariateKind::numeric ? future_numeric[s].size() : future_labels[s].size();
    }
};

struct SeriesCollection {
    std::vector<Series> series;
    std::vector<Covariate> covariates;
    Frequency frequency = Frequency::none;

    std::size_t size() const noexcept { return series.size(); }

    /// Checks unique ids, finite values and covariate lengths.
    void validate() const {
        std::unordered_set<std::string> seen;
        for (const auto& s : series) {
            if (!seen.insert(s.id).second) {
                throw DataError("DuplicateSeries", "series id '" + s.id + "' appears more than once");
            }
            for (const double v : s.values) {
                if (!std::isfinite(v)) {
                    throw DataError("MissingValue", "series '" + s.id + "' contains a missing or non-finite value");
                }
            }
        }
        for (const auto& cov : covariates) {
            const std::size_t n = cov.kind == CovariateKind::numeric ? cov.numeric.size() : cov.labels.size();
            if (n != series.size()) throw CovariateMisaligned(cov.name, "<collection>");
            for (std::size_t s = 0; s < series.size(); ++s) {
                if (cov.length(s) != series[s].values.size()) throw CovariateMisaligned(cov.name, series[s].id);
            }
        }
    }
};

/// Encoding of one covariate: numeric passes through, categorical expands one-hot over the
/// category set frozen at training time.
struct CovariateSpec {
    std::string name;
    CovariateKind kind = CovariateKind::numeric;
    std::vector<std::string> categories;

    std::size_t width() const noexcept {
        return kind == CovariateKind::numeric ? 1 : categories.size();
    }
};

using CovariateValue = std::variant<double, std::string>;

inline std::vector<double> encode_covariates(const CovariateValue& raw, const CovariateSpec& spec) {
    if (spec.kind == CovariateKind::numeric) {
        if (const auto* v = std::get_if<double>(&raw)) return {*v};
        throw DataError("CovariateType", "covariate '" + spec.name + "' expects a numeric value");
    }
    const auto* label = std::get_if<std::string>(&raw);
    if (label == nullptr) {
        throw DataError("CovariateType", "covariate '" + spec.name + "' expects a category label");
    }
    const auto it = std::find(spec.categories.begin(), spec.categories.end(), *label);
    if (it == spec.categories.end()) throw UnknownCategory(spec.name, *label);
    std::vector<double> out(spec.categories.size(), 0.0);
    out[static_cast<std::size_t>(it - spec.categories.begin())] = 1.0;
    return out;
}

/// Category sets observed in the collection, sorted so that they do not depend on series order.
inline std::vector<CovariateSpec> infer_covariate_specs(const SeriesCollection& collection) {
    std::vector<CovariateSpec> specs;
    for (const auto& cov : collection.covariates) {
        CovariateSpec spec{cov.name, cov.kind, {}};
        if (cov.kind == CovariateKind::categorical) {
            std::set<std::string> cats;
            for (const auto& seq : cov.labels) cats.insert(seq.begin(), seq.end());
            spec.categories.assign(cats.begin(), cats.end());
        }
        specs.push_back(std::move(spec));
    }
    return specs;
}

/// Column layout shared by a training matrix and every model trained on it:
/// lag columns L1..Ln (L1 = most recent value) followed by covariate columns.
struct FeatureLayout {
    std::size_t n_lags = 0;
    std::vector<CovariateSpec> covariates;

    std::size_t n_columns() const noexcept {
        std::size_t n = n_lags;
        for (const auto& c : covariates) n += c.width();
        return n;
    }

    std::vector<std::string> column_names() const {
        std::vector<std::string> names;
        for (std::size_t k = 1; k <= n_lags; ++k) names.push_back("L" + std::to_string(k));
        for (const auto& c : covariates) {
            if (c.kind == CovariateKind::numeric) {
                names.push_back(c.name);
            } else {
                for (const auto& cat : c.categories) names.push_back(c.name + "=" + cat);
            }
        }
        return names;
    }
};

/// Borrowed view of one row of an EmbeddedMatrix.
struct InstanceRow {
    std::span<const double> predictors;
    double target;
    const std::string& series_id;
    long target_time;
};

/// Pooled lag-embedded design: one row per (series, target time).
struct EmbeddedMatrix {
    FeatureLayout layout;
    RowMatrix predictors;
    Eigen::VectorXd targets;
    std::vector<std::string> series_ids;        ///< ids indexed by series_index
    std::vector<std::size_t> series_index;      ///< per row
    std::vector<long> target_time;              ///< per row

    std::size_t rows() const noexcept { return static_cast<std::size_t>(predictors.rows()); }
    std::size_t cols() const noexcept { return static_cast<std::size_t>(predictors.cols()); }

    InstanceRow row(std::size_t i) const {
        const auto r = static_cast<Eigen::Index>(i);
        return {std::span<const double>(predictors.row(r).data(), cols()), targets(r),
                series_ids[series_index[i]], target_time[i]};
    }

    std::vector<std::string> column_names() const { return layout.column_names(); }

    std::vector<std::size_t> all_rows() const {
        std::vector<std::size_t> idx(rows());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        return idx;
    }
};

namespace detail {

inline void write_covariates(double* out, const SeriesCollection& collection,
                             const std::vector<CovariateSpec>& specs, std::size_t s, std::size_t t,
                             std::size_t forecast_step) {
    const std::size_t m = collection.series[s].values.size();
    for (const auto& spec : specs) {
        const auto it = std::find_if(collection.covariates.begin(), collection.covariates.end(),
                                     [&](const Covariate& c) { return c.name == spec.name; });
        if (it == collection.covariates.end()) {
            if (t >= m) throw MissingFutureCovariates(forecast_step);
            throw DataError("MissingCovariate", "covariate '" + spec.name + "' is not present in the input");
        }
        const Covariate& cov = *it;
        if (cov.kind != spec.kind) {
            throw DataError("CovariateType", "covariate '" + spec.name + "' changed kind");
        }
        CovariateValue raw;
        if (t < m) {
            if (cov.length(s) != m) throw CovariateMisaligned(cov.name, collection.series[s].id);
            raw = cov.kind == CovariateKind::numeric ? CovariateValue{cov.numeric[s][t]}
                                                     : CovariateValue{cov.labels[s][t]};
        } else {
            const std::size_t f = t - m;
            if (f >= cov.future_length(s)) throw MissingFutureCovariates(forecast_step);
            raw = cov.kind == CovariateKind::numeric ? CovariateValue{cov.future_numeric[s][f]}
                                                     : CovariateValue{cov.future_labels[s][f]};
        }
        const auto encoded = encode_covariates(raw, spec);
        std::copy(encoded.begin(), encoded.end(), out);
        out += encoded.size();
    }
}

} // namespace detail

/// Embedded matrix over all series: a series of length m contributes m - lag rows whose
/// targets are values[lag..m-1]. Rows are ordered by series, then by time.
inline EmbeddedMatrix create_input_matrix(const SeriesCollection& collection, std::size_t lag,
                                          const std::vector<CovariateSpec>& covariates = {}) {
    if (lag < 1) throw UsageError("lag must be at least 1");
    collection.validate();
    EmbeddedMatrix out;
    out.layout = FeatureLayout{lag, covariates};
    std::size_t n_rows = 0;
    for (const auto& s : collection.series) {
        if (s.values.size() <= lag) throw SeriesTooShort(s.id);
        n_rows += s.values.size() - lag;
    }
    const std::size_t n_cols = out.layout.n_columns();
    out.predictors.resize(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(n_cols));
    out.targets.resize(static_cast<Eigen::Index>(n_rows));
    out.series_index.reserve(n_rows);
    out.target_time.reserve(n_rows);
    std::size_t r = 0;
    for (std::size_t s = 0; s < collection.series.size(); ++s) {
        const auto& values = collection.series[s].values;
        out.series_ids.push_back(collection.series[s].id);
        for (std::size_t t = lag; t < values.size(); ++t, ++r) {
            double* row = out.predictors.row(static_cast<Eigen::Index>(r)).data();
            for (std::size_t k = 1; k <= lag; ++k) row[k - 1] = values[t - k];
            detail::write_covariates(row + lag, collection, covariates, s, t, 0);
            out.targets(static_cast<Eigen::Index>(r)) = values[t];
            out.series_index.push_back(s);
            out.target_time.push_back(static_cast<long>(t));
        }
    }
    return out;
}

/// One row per series holding its last `lag` values (L1 = last observation) and, when
/// covariates are configured, the covariates of the first forecast step. Targets are NaN.
inline EmbeddedMatrix create_test_set(const SeriesCollection& collection, std::size_t lag,
                                      const std::vector<CovariateSpec>& covariates = {}) {
    if (lag < 1) throw UsageError("lag must be at least 1");
    EmbeddedMatrix out;
    out.layout = FeatureLayout{lag, covariates};
    const std::size_t n = collection.series.size();
    out.predictors.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(out.layout.n_columns()));
    out.targets = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), std::nan(""));
    for (std::size_t s = 0; s < n; ++s) {
        const auto& series = collection.series[s];
        const auto& values = series.values;
        if (values.size() < lag) throw SeriesTooShort(series.id);
        for (const double v : values) {
            if (!std::isfinite(v)) {
                throw DataError("MissingValue", "series '" + series.id + "' contains a missing or non-finite value");
            }
        }
        double* row = out.predictors.row(static_cast<Eigen::Index>(s)).data();
        const std::size_t m = values.size();
        for (std::size_t k = 1; k <= lag; ++k) row[k - 1] = values[m - k];
        detail::write_covariates(row + lag, collection, covariates, s, m, 1);
        out.series_ids.push_back(series.id);
        out.series_index.push_back(s);
        out.target_time.push_back(static_cast<long>(m));
    }
    return out;
}

/// Shift every row's lags by one, inserting that series' forecast as the new L1, and advance
/// covariates to the next step. `collection` supplies future covariates and may be null when
/// the layout has none.
inline EmbeddedMatrix update_test_set(EmbeddedMatrix test, std::span<const double> step_forecasts,
                                      const SeriesCollection* collection = nullptr) {
    if (step_forecasts.size() != test.rows()) {
        throw DimensionMismatch("expected " + std::to_string(test.rows()) + " forecasts, got " +
                                std::to_string(step_forecasts.size()));
    }
    const std::size_t lag = test.layout.n_lags;
    const bool has_covariates = !test.layout.covariates.empty();
    if (has_covariates && collection == nullptr) throw MissingFutureCovariates(0);
    for (std::size_t i = 0; i < test.rows(); ++i) {
        double* row = test.predictors.row(static_cast<Eigen::Index>(i)).data();
        for (std::size_t k = lag; k-- > 1;) row[k] = row[k - 1];
        row[0] = step_forecasts[i];
        const long next_time = ++test.target_time[i];
        if (has_covariates) {
            const std::size_t s = test.series_index[i];
            const std::size_t m = collection->series.at(s).values.size();
            const std::size_t step = static_cast<std::size_t>(next_time) - m + 1;
            detail::write_covariates(row + lag, *collection, test.layout.covariates, s,
                                     static_cast<std::size_t>(next_time), step);
        }
    }
    return test;
}

} // namespace setar
