#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace cms {

/// Malformed input: unknown states, inadmissible words, parameters outside
/// their domain.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The request would need an unbounded (or over-cap) enumeration. `parameter`
/// names the knob that would make it finite, e.g. "truncate_len".
class RefusalError : public std::runtime_error {
public:
    RefusalError(const std::string& what, std::string parameter)
        : std::runtime_error(what), parameter_(std::move(parameter)) {}

    [[nodiscard]] const std::string& parameter() const noexcept { return parameter_; }

private:
    std::string parameter_;
};

/// A connector search exhausted its horizon without reaching the target.
class UnreachableError : public std::runtime_error {
public:
    UnreachableError(const std::string& what, std::uint64_t horizon)
        : std::runtime_error(what), horizon_(horizon) {}

    [[nodiscard]] std::uint64_t horizon() const noexcept { return horizon_; }

private:
    std::uint64_t horizon_;
};

/// Root finding with no root inside the admissible region.
class NoSolutionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A malformed config or spec document; `where` is the JSON path of the field.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(const std::string& where, const std::string& what)
        : std::invalid_argument(where.empty() ? what : where + ": " + what), where_(where) {}

    [[nodiscard]] const std::string& where() const noexcept { return where_; }

private:
    std::string where_;
};

/// Two computations that must agree did not.
class InvariantError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace cms
