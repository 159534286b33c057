#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dnsarsa {

/// Invalid parameters, shapes or layouts.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file. Carries the 1-based line number when known.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")" : what),
          line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A state variable became non-finite.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, long step)
        : std::runtime_error(what + " at step " + std::to_string(step)), step_(step) {}
    long step() const noexcept { return step_; }

private:
    long step_;
};

/// More than one intention node supra-threshold at the same sample.
class WtaViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// DN run and oracle event streams cannot be aligned.
class AlignmentError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace dnsarsa
