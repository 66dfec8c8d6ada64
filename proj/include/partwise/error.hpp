#pragma once

#include <stdexcept>
#include <string>

namespace partwise {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed JSON. `line()` is 1-based; 0 when unknown.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line) : Error(what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Well-formed JSON that does not match the expected schema (unknown names, wrong types).
class SchemaError : public Error {
public:
    using Error::Error;
};

/// A value violates a domain invariant (confidence outside [0,1], NaN coordinates, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Too few inputs for the requested operation.
class ArityError : public Error {
public:
    using Error::Error;
};

/// Input configuration admits no unique solution.
class DegeneracyError : public Error {
public:
    using Error::Error;
};

/// A projective mapping sent a point to infinity.
class HorizonError : public Error {
public:
    using Error::Error;
};

/// Requested feature/component does not exist.
class LookupError : public Error {
public:
    using Error::Error;
};

/// Model artifacts are inconsistent (catalog hash mismatch, version mismatch, missing member).
class ModelError : public Error {
public:
    using Error::Error;
};

/// Training could not proceed (e.g. a single class).
class TrainingError : public Error {
public:
    using Error::Error;
};

/// Malformed decision-tree specification.
class SpecError : public Error {
public:
    using Error::Error;
};

}  // namespace partwise
