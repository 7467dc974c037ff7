#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace clu {

/// Dimension or length mismatch between related arguments.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Semantically invalid input (empty payloads, unknown classes, bad fractions, ...).
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Attempt to insert a sample id that is already stored.
class DuplicateIdError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Requested operation is outside what the component supports
/// (parameter-count cap, unsupported method/task pairing, ...).
class CapabilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Text input that does not match a grammar. Carries the byte offset of the
/// first offending character.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t byte_offset)
        : std::runtime_error(what + " (at byte " + std::to_string(byte_offset) + ")"),
          offset_(byte_offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Numerically singular matrix where an inverse is required. Carries the
/// estimated condition number.
class SingularMatrixError : public std::runtime_error {
public:
    SingularMatrixError(const std::string& what, double condition_number)
        : std::runtime_error(what + " (condition number " + std::to_string(condition_number) + ")"),
          cond_(condition_number) {}

    double condition_number() const noexcept { return cond_; }

private:
    double cond_;
};

}  // namespace clu
