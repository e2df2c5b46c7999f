#pragma once

#include <stdexcept>
#include <string>

namespace ndv {

// Bad construction parameters (register bits out of range, lambda <= 0, ...).
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Merge attempted between sketches with different parameters or seeds.
struct IncompatibleSketch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Truncated or garbled wire payload.
struct DecodeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Estimator undefined for the given inputs (division by zero, coverage zero, ...).
struct EstimatorError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Request would materialize more data than the in-process simulation allows.
struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input file; message carries the line number.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace ndv
