#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace qsd {

/// Argument outside the mathematical domain of an operation (n = 0, eps <= 0, ...).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Invalid or inconsistent configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller broke a documented precondition (recording a point outside D, ...).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Non-finite state encountered while simulating.
class NumericError : public std::runtime_error {
public:
    NumericError(const std::string& what, std::uint64_t step, std::uint64_t chain = 0)
        : std::runtime_error(what + " (chain " + std::to_string(chain) + ", step " +
                             std::to_string(step) + ")"),
          step_(step),
          chain_(chain) {}

    std::uint64_t step() const noexcept { return step_; }
    std::uint64_t chain() const noexcept { return chain_; }

private:
    std::uint64_t step_;
    std::uint64_t chain_;
};

}  // namespace qsd

namespace qsd {

/// A step sequence produced a non-positive or non-finite step.
class InvalidScheduleError : public DomainError {
public:
    using DomainError::DomainError;
};

}  // namespace qsd
