#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gggp {

/// Structural problem with a grammar (undefined symbol, no finite derivation, ...).
class GrammarError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed text input. Carries a 1-based line/column and a 0-based byte offset.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column, std::size_t offset)
        : std::runtime_error(what), line_(line), column_(column), offset_(offset)
    { }

    [[nodiscard]] auto line() const -> std::size_t { return line_; }
    [[nodiscard]] auto column() const -> std::size_t { return column_; }
    [[nodiscard]] auto offset() const -> std::size_t { return offset_; }

private:
    std::size_t line_;
    std::size_t column_;
    std::size_t offset_;
};

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MetricError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace gggp
