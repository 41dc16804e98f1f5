#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hsilab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A state vector has an entry outside the alphabet, or the wrong length.
class InvalidStateError : public Error {
public:
    using Error::Error;
};

/// An index or step is outside its admissible range.
class RangeError : public Error {
public:
    using Error::Error;
};

/// Builder or algorithm parameters violate their preconditions.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// A model violates a normalization or shape invariant, or lacks a required table.
class ModelError : public Error {
public:
    using Error::Error;
};

/// The model does not produce the requested kind of feedback (e.g. observations on Class 1).
class UnsupportedFeedbackError : public Error {
public:
    using Error::Error;
};

/// A computation would exceed its configured size cap.
class SizeError : public Error {
public:
    using Error::Error;
};

/// Conditioning on feedback left zero posterior mass.
class InfeasibleEvidenceError : public Error {
public:
    using Error::Error;
};

/// A block-scheduled update was invoked outside its schedule.
class ScheduleError : public Error {
public:
    using Error::Error;
};

/// Data from different models or runs were combined inconsistently.
class ConsistencyError : public Error {
public:
    using Error::Error;
};

/// Configuration file problem. Carries the 1-based line number when known (0 otherwise).
class ConfigError : public Error {
public:
    ConfigError(const std::string& what, std::size_t line = 0)
        : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

} // namespace hsilab
