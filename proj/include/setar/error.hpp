#pragma once

#include <stdexcept>
#include <string>

namespace setar {

/// Broad failure classes; the CLI maps these onto exit codes.
enum class ErrorCategory { usage, data, numerical };

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, std::string kind, const std::string& message)
        : std::runtime_error(message), category_(category), kind_(std::move(kind)) {}

    ErrorCategory category() const noexcept { return category_; }
    /// Machine-readable error name, e.g. "SeriesTooShort".
    const std::string& kind() const noexcept { return kind_; }

private:
    ErrorCategory category_;
    std::string kind_;
};

class DataError : public Error {
public:
    DataError(std::string kind, const std::string& message)
        : Error(ErrorCategory::data, std::move(kind), message) {}
};

class NumericalError : public Error {
public:
    NumericalError(std::string kind, const std::string& message)
        : Error(ErrorCategory::numerical, std::move(kind), message) {}
};

class UsageError : public Error {
public:
    explicit UsageError(const std::string& message)
        : Error(ErrorCategory::usage, "Usage", message) {}
};

class SeriesTooShort : public DataError {
public:
    explicit SeriesTooShort(const std::string& id)
        : DataError("SeriesTooShort", "series '" + id + "' is too short for the requested lag"),
          series_id(id) {}
    std::string series_id;
};

class SingularSystem : public NumericalError {
public:
    explicit SingularSystem(const std::string& what)
        : NumericalError("SingularSystem", what) {}
};

class DimensionMismatch : public DataError {
public:
    explicit DimensionMismatch(const std::string& what)
        : DataError("DimensionMismatch", what) {}
};

} // namespace setar
