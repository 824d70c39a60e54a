#include "pomq/coeff.hpp"

#include "pomq/error.hpp"

namespace pomq {

const char* error_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::UnboundAtom: return "UnboundAtom";
        case ErrorKind::DivisionByZeroSymbol: return "DivisionByZeroSymbol";
        case ErrorKind::DivisionByZero: return "DivisionByZero";
        case ErrorKind::UnknownGenerator: return "UnknownGenerator";
        case ErrorKind::NonPolynomialInACCS: return "NonPolynomialInACCS";
        case ErrorKind::ProjectionResidual: return "ProjectionResidual";
        case ErrorKind::SingularM: return "SingularM";
        case ErrorKind::SingularConstraintMatrix: return "SingularConstraintMatrix";
        case ErrorKind::DegreeTooHigh: return "DegreeTooHigh";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::ValidationError: return "ValidationError";
        case ErrorKind::UnknownSuite: return "UnknownSuite";
        case ErrorKind::InvalidSpec: return "InvalidSpec";
        case ErrorKind::Unsupported: return "Unsupported";
    }
    return "Error";
}

Coeff Coeff::inverse() const {
    Rational n = re * re + im * im;
    if (sgn(n) == 0) throw Error(ErrorKind::DivisionByZero, "inverse of zero coefficient");
    return Coeff(re / n, -im / n);
}

static std::string rat_str(const Rational& r) { return r.get_str(); }

std::string Coeff::str() const {
    if (is_real()) return rat_str(re);
    if (sgn(re) == 0) return rat_str(im) + "*I";
    std::string s = "(" + rat_str(re);
    s += sgn(im) > 0 ? "+" : "-";
    s += rat_str(abs(im)) + "*I)";
    return s;
}

Rational rational_from_string(const std::string& s) {
    Rational r;
    if (s.empty() || r.set_str(s, 10) != 0) throw Error(ErrorKind::ParseError, "bad rational '" + s + "'");
    if (sgn(r.get_den()) == 0) throw Error(ErrorKind::ParseError, "zero denominator in '" + s + "'");
    r.canonicalize();
    return r;
}

}  // namespace pomq
