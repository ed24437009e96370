#pragma once

#include "setar/data_model.hpp"
#include "setar/error.hpp"
#include "setar/serialize.hpp"
#include "setar/setar_tree.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <unistd.h>
#include <vector>

namespace setar::io {

class ParseError : public DataError {
public:
    ParseError(const std::string& where, const std::string& what)
        : DataError("ParseError", where + ": " + what) {}
};

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("FileNotFound", "cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Writes to a temporary sibling and renames it over the target, so readers never see a
/// partially written file.
inline void atomic_write(const std::filesystem::path& path, std::string_view content) {
    auto tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("WriteFailed", "cannot write '" + tmp.string() + "'");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw DataError("WriteFailed", "cannot write '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw DataError("WriteFailed", "cannot rename onto '" + path.string() + "'");
    }
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> lines_of(std::string_view text) {
    std::vector<std::string_view> out;
    for (auto line : split(text, '\n')) {
        line = trim(line);
        if (!line.empty()) out.push_back(line);
    }
    return out;
}

inline double parse_value(std::string_view s, const std::string& where) {
    s = trim(s);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw ParseError(where, "'" + std::string(s) + "' is not a finite number (missing values are not accepted)");
    }
    return v;
}

/// Values file: one series per line, `series_id:v1,v2,...`.
inline SeriesCollection parse_values(std::string_view text) {
    SeriesCollection out;
    std::size_t line_no = 0;
    for (const auto line : lines_of(text)) {
        ++line_no;
        const auto colon = line.find(':');
        const std::string where = "line " + std::to_string(line_no);
        if (colon == std::string_view::npos) throw ParseError(where, "expected 'series_id:v1,v2,...'");
        Series s;
        s.id = std::string(trim(line.substr(0, colon)));
        if (s.id.empty()) throw ParseError(where, "empty series id");
        const auto body = trim(line.substr(colon + 1));
        if (!body.empty()) {
            for (const auto field : split(body, ',')) s.values.push_back(parse_value(field, where));
        }
        out.series.push_back(std::move(s));
    }
    out.validate();
    return out;
}

inline std::string format_values(const SeriesCollection& collection) {
    std::string out;
    for (const auto& s : collection.series) {
        out += s.id;
        out += ':';
        for (std::size_t t = 0; t < s.values.size(); ++t) {
            if (t > 0) out += ',';
            out += format_real(s.values[t]);
        }
        out += '\n';
    }
    return out;
}

/// Covariate kinds from `cov.<name>.kind=numeric|categorical` lines; '#' starts a comment.
inline std::map<std::string, CovariateKind> parse_covariate_kinds(std::string_view text) {
    std::map<std::string, CovariateKind> kinds;
    for (auto line : lines_of(text)) {
        if (line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError("covariate config", "expected key=value");
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        constexpr std::string_view prefix = "cov.";
        constexpr std::string_view suffix = ".kind";
        if (key.size() <= prefix.size() + suffix.size() || key.substr(0, prefix.size()) != prefix ||
            key.substr(key.size() - suffix.size()) != suffix) {
            throw ParseError("covariate config", "unknown key '" + std::string(key) + "'");
        }
        const std::string name(key.substr(prefix.size(), key.size() - prefix.size() - suffix.size()));
        if (value == "numeric") {
            kinds[name] = CovariateKind::numeric;
        } else if (value == "categorical") {
            kinds[name] = CovariateKind::categorical;
        } else {
            throw ParseError("covariate config", "kind must be numeric or categorical");
        }
    }
    return kinds;
}

/// Long CSV: header `series_id,timestep,value[,cov1,...]`, timesteps 0-based and contiguous per
/// series. Rows with an empty value after a series' observed rows carry future covariates for
/// forecasting. Covariates missing from `kinds` are numeric.
inline SeriesCollection parse_long_csv(std::string_view text, const std::map<std::string, CovariateKind>& kinds = {}) {
    const auto lines = lines_of(text);
    if (lines.empty()) throw ParseError("csv", "empty input");
    const auto header = split(lines[0], ',');
    if (header.size() < 3 || trim(header[0]) != "series_id" || trim(header[1]) != "timestep" ||
        trim(header[2]) != "value") {
        throw ParseError("csv header", "expected series_id,timestep,value[,covariates...]");
    }
    SeriesCollection out;
    for (std::size_t c = 3; c < header.size(); ++c) {
        Covariate cov;
        cov.name = std::string(trim(header[c]));
        const auto it = kinds.find(cov.name);
        cov.kind = it == kinds.end() ? CovariateKind::numeric : it->second;
        out.covariates.push_back(std::move(cov));
    }
    std::map<std::string, std::size_t> index;
    std::vector<bool> in_future;
    for (std::size_t l = 1; l < lines.size(); ++l) {
        const std::string where = "csv line " + std::to_string(l + 1);
        const auto fields = split(lines[l], ',');
        if (fields.size() != header.size()) throw ParseError(where, "wrong number of fields");
        const std::string id(trim(fields[0]));
        auto [it, inserted] = index.emplace(id, out.series.size());
        if (inserted) {
            out.series.push_back({id, {}});
            in_future.push_back(false);
            for (auto& cov : out.covariates) {
                cov.numeric.emplace_back();
                cov.labels.emplace_back();
                cov.future_numeric.emplace_back();
                cov.future_labels.emplace_back();
            }
        }
        const std::size_t s = it->second;
        const auto step = static_cast<std::size_t>(parse_value(fields[1], where));
        const std::size_t expected =
            out.series[s].values.size() + (out.covariates.empty() ? 0 : out.covariates[0].future_length(s));
        if (step != expected) throw ParseError(where, "timesteps must be contiguous from 0 per series");
        const auto value_field = trim(fields[2]);
        const bool future = value_field.empty();
        if (future && out.covariates.empty()) throw ParseError(where, "missing value");
        if (!future && in_future[s]) throw ParseError(where, "observed value after a future-covariate row");
        if (future) {
            in_future[s] = true;
        } else {
            out.series[s].values.push_back(parse_value(value_field, where));
        }
        for (std::size_t c = 0; c < out.covariates.size(); ++c) {
            auto& cov = out.covariates[c];
            const auto raw = trim(fields[3 + c]);
            if (cov.kind == CovariateKind::numeric) {
                const double v = parse_value(raw, where);
                (future ? cov.future_numeric[s] : cov.numeric[s]).push_back(v);
            } else {
                if (raw.empty()) throw ParseError(where, "empty category for '" + cov.name + "'");
                (future ? cov.future_labels[s] : cov.labels[s]).emplace_back(raw);
            }
        }
    }
    out.validate();
    return out;
}

/// Forecast CSV: header `series_id,h1,...,hH`.
inline std::string format_forecasts(const ForecastMatrix& f) {
    std::string out = "series_id";
    for (std::size_t h = 1; h <= f.horizon(); ++h) out += ",h" + std::to_string(h);
    out += '\n';
    for (std::size_t s = 0; s < f.series_ids.size(); ++s) {
        out += f.series_ids[s];
        for (std::size_t h = 0; h < f.horizon(); ++h) {
            out += ',';
            out += format_real(f.values(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(h)));
        }
        out += '\n';
    }
    return out;
}

inline ForecastMatrix parse_forecasts(std::string_view text) {
    const auto lines = lines_of(text);
    if (lines.empty()) throw ParseError("forecast csv", "empty input");
    const auto header = split(lines[0], ',');
    if (header.size() < 2 || trim(header[0]) != "series_id") throw ParseError("forecast csv", "expected series_id,h1,...");
    ForecastMatrix f;
    const std::size_t horizon = header.size() - 1;
    f.values.resize(static_cast<Eigen::Index>(lines.size() - 1), static_cast<Eigen::Index>(horizon));
    for (std::size_t l = 1; l < lines.size(); ++l) {
        const std::string where = "forecast csv line " + std::to_string(l + 1);
        const auto fields = split(lines[l], ',');
        if (fields.size() != header.size()) throw ParseError(where, "wrong number of fields");
        f.series_ids.emplace_back(trim(fields[0]));
        for (std::size_t h = 0; h < horizon; ++h) {
            f.values(static_cast<Eigen::Index>(l - 1), static_cast<Eigen::Index>(h)) = parse_value(fields[h + 1], where);
        }
    }
    return f;
}

/// Series from any of the three text layouts, recognised by their first line.
inline SeriesCollection parse_series_any(std::string_view text,
                                         const std::map<std::string, CovariateKind>& kinds = {}) {
    const auto lines = lines_of(text);
    if (lines.empty()) return {};
    const auto first = lines[0];
    if (first.rfind("series_id,timestep", 0) == 0) return parse_long_csv(text, kinds);
    if (first.rfind("series_id,", 0) == 0) {
        const auto f = parse_forecasts(text);
        SeriesCollection out;
        for (std::size_t s = 0; s < f.series_ids.size(); ++s) {
            Series series{f.series_ids[s], {}};
            for (Eigen::Index h = 0; h < f.values.cols(); ++h) series.values.push_back(f.values(static_cast<Eigen::Index>(s), h));
            out.series.push_back(std::move(series));
        }
        out.validate();
        return out;
    }
    return parse_values(text);
}

inline SeriesCollection load_series(const std::filesystem::path& path,
                                    const std::map<std::string, CovariateKind>& kinds = {}) {
    return parse_series_any(read_file(path), kinds);
}

} // namespace setar::io
