#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pafp {

// Rejected input: dimension mismatch, empty set, out-of-range parameter.
struct InvalidInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Non-finite intermediate produced where the math requires finite values.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Metric has no defined value on the given data (e.g. single-class AUC).
struct MetricUndefined : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed file; line is 1-based and refers to the offending input line.
struct ParseError : std::runtime_error {
    std::size_t line;
    ParseError(std::size_t line_, const std::string& what_)
        : std::runtime_error("line " + std::to_string(line_) + ": " + what_), line(line_) {}
};

// Recognized file family but unsupported version tag.
struct VersionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Second writer tried to take the FP database lock.
struct ConcurrentWriteError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace pafp
