#pragma once

#include <stdexcept>
#include <string>

namespace fracms {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid argument or precondition violation.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A linear solve, factorization or eigensolve failed.
class SolverError : public Error {
public:
    using Error::Error;
};

/// A constraint matrix is rank deficient; `constraint()` is the first
/// row found to depend on the rows before it.
class RankDeficientError : public SolverError {
public:
    RankDeficientError(const std::string& what, int constraint)
        : SolverError(what), constraint_(constraint) {}
    int constraint() const noexcept { return constraint_; }

private:
    int constraint_;
};

/// Malformed input file; `line()` is 1-based, 0 when unknown.
class ParseError : public Error {
public:
    ParseError(const std::string& what, int line)
        : Error(line > 0 ? what + " (line " + std::to_string(line) + ")" : what), detail_(what), line_(line) {}
    int line() const noexcept { return line_; }
    /// Message without the line suffix.
    const std::string& detail() const noexcept { return detail_; }

private:
    std::string detail_;
    int line_;
};

}  // namespace fracms
