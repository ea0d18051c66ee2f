#pragma once

#include <stdexcept>
#include <string>

namespace nlmc {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed arguments: dimension mismatch, out-of-range parameters, bad names.
class InputError : public Error {
public:
    using Error::Error;
};

/// Simplex drift after an integration step exceeded the repair budget.
class IntegrationDiverged : public Error {
public:
    using Error::Error;
};

/// A generator produced a non-finite rate.
class GeneratorEvaluationError : public Error {
public:
    using Error::Error;
};

/// Q(m) is not irreducible where an irreducible matrix is required.
class ReducibleGenerator : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

/// A finite-difference stencil of a certificate could not be evaluated.
class CertificateEvaluationError : public Error {
public:
    using Error::Error;
};

/// Generator file could not be parsed. Carries 1-based line/column when known.
class ParseError : public Error {
public:
    ParseError(const std::string& what, int line, int column)
        : Error(what), line_(line), column_(column) {}

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

}  // namespace nlmc
