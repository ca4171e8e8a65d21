#pragma once

#include <stdexcept>
#include <string>

namespace onset {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input document (Turtle, JSON, GBNF, SPARQL results ...).
class ParseError : public Error {
public:
    using Error::Error;
};

/// An iri that does not resolve in the governing ontology.
class UnknownIriError : public Error {
public:
    explicit UnknownIriError(std::string iri);
    const std::string& iri() const noexcept { return iri_; }

private:
    std::string iri_;
};

/// A precondition on arguments or input state was violated.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Transport or protocol failure talking to an external server. Retryable.
class BackendError : public Error {
public:
    using Error::Error;
};

/// A server replied, but its completion violates the grammar it was given.
class NonConformanceError : public BackendError {
public:
    NonConformanceError(const std::string& what, std::string completion);
    const std::string& completion() const noexcept { return completion_; }

private:
    std::string completion_;
};

}  // namespace onset
