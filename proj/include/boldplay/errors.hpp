#pragma once

#include <stdexcept>
#include <string>

namespace boldplay {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller handed in arguments outside an operation's domain.
class PreconditionViolated : public Error {
public:
    using Error::Error;
};

/// An operation that needs unique representations was given a rational stake cap.
class RationalEll : public PreconditionViolated {
public:
    RationalEll() : PreconditionViolated("stake cap must be irrational for this operation") {}
};

/// Text input (stake cap, fortune, config) could not be parsed.
class ParseError : public Error {
public:
    ParseError(const std::string& field, const std::string& what)
        : Error(field + ": " + what), field_(field) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// A cross-check that is a theorem failed. Always a bug, never a finding.
class InvariantViolated : public Error {
public:
    using Error::Error;
};

}  // namespace boldplay
