#pragma once

#include <gmpxx.h>

#include <string>

namespace pomq {

using Rational = mpq_class;

inline Rational rat(long p, long q) {
    Rational r(p, q);
    r.canonicalize();
    return r;
}

// Gaussian rational re + i*im.
struct Coeff {
    Rational re;
    Rational im;

    Coeff() : re(0), im(0) {}
    Coeff(long v) : re(v), im(0) {}
    Coeff(const Rational& r) : re(r), im(0) {}
    Coeff(const Rational& r, const Rational& i) : re(r), im(i) {}

    static Coeff i() { return Coeff(0, 1); }
    static Coeff frac(long p, long q) { return Coeff(rat(p, q)); }

    bool is_zero() const { return sgn(re) == 0 && sgn(im) == 0; }
    bool is_real() const { return sgn(im) == 0; }
    bool is_one() const { return re == 1 && sgn(im) == 0; }

    Coeff conj() const { return Coeff(re, -im); }
    Coeff operator-() const { return Coeff(-re, -im); }

    Coeff& operator+=(const Coeff& o) {
        re += o.re;
        im += o.im;
        return *this;
    }
    Coeff& operator-=(const Coeff& o) {
        re -= o.re;
        im -= o.im;
        return *this;
    }
    Coeff& operator*=(const Coeff& o) {
        if (sgn(im) == 0 && sgn(o.im) == 0) {
            re *= o.re;
            return *this;
        }
        Rational r = re * o.re - im * o.im;
        Rational m = re * o.im + im * o.re;
        re = std::move(r);
        im = std::move(m);
        return *this;
    }
    Coeff inverse() const;

    friend Coeff operator+(Coeff a, const Coeff& b) { return a += b; }
    friend Coeff operator-(Coeff a, const Coeff& b) { return a -= b; }
    friend Coeff operator*(Coeff a, const Coeff& b) { return a *= b; }
    friend Coeff operator/(const Coeff& a, const Coeff& b) { return a * b.inverse(); }
    friend bool operator==(const Coeff& a, const Coeff& b) { return a.re == b.re && a.im == b.im; }
    friend bool operator!=(const Coeff& a, const Coeff& b) { return !(a == b); }

    std::string str() const;
};

Rational rational_from_string(const std::string& s);

}  // namespace pomq
