#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mtmc {

enum class ErrorKind {
    dimension,
    range,
    empty_input,
    parse,
    insufficient_folds,
    unknown_combination,
    ragged_tasks,
    invalid_matrix,
    config,
    io,
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::dimension: return "dimension error";
    case ErrorKind::range: return "range error";
    case ErrorKind::empty_input: return "empty input";
    case ErrorKind::parse: return "parse error";
    case ErrorKind::insufficient_folds: return "insufficient folds";
    case ErrorKind::unknown_combination: return "unknown combination";
    case ErrorKind::ragged_tasks: return "ragged task coverage";
    case ErrorKind::invalid_matrix: return "invalid matrix";
    case ErrorKind::config: return "config error";
    case ErrorKind::io: return "io error";
    }
    return "error";
}

/// Every failure in the library surfaces as an Error. `index` carries the
/// offending position when there is one: a weight component, a 1-based line
/// number, or a sweep row, depending on the operation.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string message, std::optional<std::size_t> index = std::nullopt,
          std::vector<std::string> offenders = {})
        : std::runtime_error(std::string(to_string(kind)) + ": " + message),
          kind_(kind),
          index_(index),
          offenders_(std::move(offenders)) {}

    ErrorKind kind() const noexcept { return kind_; }
    std::optional<std::size_t> index() const noexcept { return index_; }
    const std::vector<std::string>& offenders() const noexcept { return offenders_; }

private:
    ErrorKind kind_;
    std::optional<std::size_t> index_;
    std::vector<std::string> offenders_;
};

} // namespace mtmc
