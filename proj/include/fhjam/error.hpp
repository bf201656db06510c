#pragma once

#include <stdexcept>
#include <string>

namespace fhjam {

/// A precondition on the arguments of an operation was violated
/// (dimension mismatch, out-of-range index, malformed distribution).
class ContractViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The requested strategy or bound does not exist for these parameters,
/// e.g. too few jammable bands for the waterfilling allocation or a
/// codeword that exceeds the jammer's power budget.
class Infeasible : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed configuration text. Carries the offending line and key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::size_t line, std::string key, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + (key.empty() ? "" : " [" + key + "]") + ": " +
                             what),
          line_(line), key_(std::move(key)) {}

    std::size_t line() const noexcept { return line_; }
    const std::string& key() const noexcept { return key_; }

private:
    std::size_t line_;
    std::string key_;
};

/// Input file does not have the shape the consumer expects (CSV columns,
/// codebook container header).
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const char* what) {
    if (!cond) throw ContractViolation(what);
}

} // namespace fhjam
