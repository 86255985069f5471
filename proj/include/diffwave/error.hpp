#pragma once

#include <cstddef>
#include <functional>
#include <iostream>
#include <stdexcept>
#include <string>
#include <utility>

namespace diffwave {

/// Broad failure class. The CLI maps these onto process exit codes.
enum class ErrorKind {
    usage = 1,
    data = 2,
    numerical = 3,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class UsageError : public Error {
public:
    explicit UsageError(const std::string& what) : Error(ErrorKind::usage, what) {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

/// Malformed input file; `line()` is 1-based.
class ParseError : public DataError {
public:
    ParseError(std::size_t line, const std::string& what, const std::string& source = "")
        : DataError((source.empty() ? "line " : source + ":") + std::to_string(line) + ": " + what),
          line_(line),
          message_(what) {}

    std::size_t line() const noexcept { return line_; }
    const std::string& message() const noexcept { return message_; }

private:
    std::size_t line_;
    std::string message_;
};

// ---------------------------------------------------------------------------
// Warnings are routed through a replaceable sink so tests can capture them.

using WarningSink = std::function<void(const std::string&)>;

namespace detail {
inline WarningSink& warning_sink() {
    static WarningSink sink = [](const std::string& msg) { std::cerr << "warning: " << msg << '\n'; };
    return sink;
}
}  // namespace detail

/// Installs a new warning sink and returns the previous one.
inline WarningSink set_warning_sink(WarningSink sink) {
    return std::exchange(detail::warning_sink(), std::move(sink));
}

inline void warn(const std::string& msg) {
    if (detail::warning_sink()) detail::warning_sink()(msg);
}

}  // namespace diffwave
