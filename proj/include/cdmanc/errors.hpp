#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cdmanc {

// Invalid argument outside an operation's mathematical domain.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Fixed-point iteration ran out of iterations before reaching tolerance.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double last_iterate, double residual)
        : std::runtime_error(what), last_iterate_(last_iterate), residual_(residual) {}

    double last_iterate() const { return last_iterate_; }
    double residual() const { return residual_; }

private:
    double last_iterate_;
    double residual_;
};

// The adjacent-crossing transition probabilities left [0, 1] for some state,
// i.e. f_m * T_b is too large for the slow-fading approximation.
class SlowFadingViolation : public std::runtime_error {
public:
    SlowFadingViolation(const std::string& what, std::size_t state)
        : std::runtime_error(what), state_(state) {}

    std::size_t state() const { return state_; }

private:
    std::size_t state_;
};

// Bad configuration value; key() names the offending entry.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& key, const std::string& what)
        : std::runtime_error(key + ": " + what), key_(key) {}

    const std::string& key() const { return key_; }

private:
    std::string key_;
};

}  // namespace cdmanc
