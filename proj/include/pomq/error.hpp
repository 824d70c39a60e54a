#pragma once

#include <stdexcept>
#include <string>

namespace pomq {

enum class ErrorKind {
    UnboundAtom,
    DivisionByZeroSymbol,
    DivisionByZero,
    UnknownGenerator,
    NonPolynomialInACCS,
    ProjectionResidual,
    SingularM,
    SingularConstraintMatrix,
    DegreeTooHigh,
    ParseError,
    ValidationError,
    UnknownSuite,
    InvalidSpec,
    Unsupported,
};

const char* error_name(ErrorKind k);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(error_name(kind)) + ": " + what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace pomq
