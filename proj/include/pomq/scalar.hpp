#pragma once

#include <boost/container/small_vector.hpp>

#include <atomic>
#include <cstdint>
#include <map>
#include <ostream>
#include <memory>
#include <string>
#include <vector>

#include "pomq/coeff.hpp"
#include "pomq/error.hpp"
#include "pomq/generator.hpp"

namespace pomq {

// Atom keys. Variables carry a packed Generator; function atoms carry a
// function id and per-dimension derivative counts (5 bits per dimension).
using AtomKey = uint64_t;

namespace atom {
constexpr int kMaxDims = 9;
constexpr uint64_t kVarTag = uint64_t(1) << 60;
constexpr uint64_t kFuncTag = uint64_t(2) << 60;

inline AtomKey var(Generator g) { return kVarTag | g.packed(); }
// Formal inverse of the squared gradient; the largest atom, so that
// Ginv * LT(Q) leads the relation Ginv * Q - 1.
constexpr AtomKey kGinv = kFuncTag | (uint64_t(0xff) << 48);
inline bool is_var(AtomKey a) { return (a >> 60) == 1; }
inline bool is_func(AtomKey a) { return (a >> 60) == 2; }
inline Generator var_gen(AtomKey a) { return Generator::unpack(uint32_t(a & 0xffffffffu)); }
inline int func_id(AtomKey a) { return int((a >> 48) & 0xff); }
// dim is 1-based; dimension 1 occupies the most significant slot.
inline int deriv_count(AtomKey a, int dim) { return int((a >> (5 * (kMaxDims - dim))) & 31); }
AtomKey func(int id, const std::vector<int>& derivs);
AtomKey add_deriv(AtomKey a, int dim);
int total_derivs(AtomKey a);
std::vector<int> deriv_list(AtomKey a);
}  // namespace atom

struct Factor {
    AtomKey atom;
    uint32_t exp;
    friend bool operator==(const Factor& a, const Factor& b) { return a.atom == b.atom && a.exp == b.exp; }
};

struct Monomial {
    boost::container::small_vector<Factor, 4> f;  // sorted by atom, descending
    uint32_t hbar = 0;

    bool is_one() const { return f.empty() && hbar == 0; }
    bool has_atoms() const { return !f.empty(); }
    uint32_t exponent(AtomKey a) const;
    friend bool operator==(const Monomial& a, const Monomial& b) { return a.hbar == b.hbar && a.f == b.f; }
    size_t hash() const;
};

// Lex order with larger atoms dominant, then hbar.
int compare(const Monomial& a, const Monomial& b);
Monomial operator*(const Monomial& a, const Monomial& b);

struct Term {
    Monomial m;
    Coeff c;
};

// Sparse polynomial, terms sorted by descending monomial, no zero coefficients.
class Poly {
public:
    std::vector<Term> terms;

    Poly() = default;
    static Poly constant(const Coeff& c);
    static Poly monomial(const Monomial& m, const Coeff& c);
    static Poly atom(AtomKey a, uint32_t e = 1);

    bool empty() const { return terms.empty(); }
    size_t size() const { return terms.size(); }
    bool is_constant() const { return terms.empty() || (terms.size() == 1 && terms[0].m.is_one()); }
    Coeff constant_value() const;

    Poly operator-() const;
    Poly scaled(const Coeff& c) const;
    friend Poly operator+(const Poly& a, const Poly& b);
    friend Poly operator-(const Poly& a, const Poly& b);
    friend bool operator==(const Poly& a, const Poly& b);

    // Product dropping monomials with hbar power above order; returns the number dropped.
    static Poly mul(const Poly& a, const Poly& b, int order, uint64_t* dropped = nullptr);
    Poly truncated(int order, uint64_t* dropped = nullptr) const;
    Poly hbar_shifted(int d) const;

    // Derivative with respect to an atom, treating all atoms as independent.
    Poly partial_atom(AtomKey a) const;
    size_t hash() const;
};


class ScalarExpr;

enum class GMode { Formal, Bound };

// Engine-wide immutable settings: dimension, truncation order, and the surface
// function (formal atom G or a bound polynomial in x). Expressions live in the
// ring localized at Q = G_k G_k, presented through the atom Ginv and kept in
// normal form modulo Ginv * Q - 1.
class Context : public std::enable_shared_from_this<Context> {
public:
    static std::shared_ptr<Context> formal(int N, int order);
    static std::shared_ptr<Context> bound(int N, int order, const Poly& surface);

    int N() const { return N_; }
    int order() const { return order_; }
    GMode mode() const { return mode_; }
    const Poly& q() const { return q_; }
    // Rewrites every monomial divisible by Ginv * LT(Q).
    Poly normal_form(Poly p) const;
    const Poly& surface() const { return surface_; }
    bool q_is_constant() const { return q_const_; }
    const Rational& q_constant() const { return q_const_value_; }

    void record_drops(uint64_t n) const { dropped_.fetch_add(n, std::memory_order_relaxed); }
    uint64_t dropped() const { return dropped_.load(std::memory_order_relaxed); }

    ScalarExpr zero() const;
    ScalarExpr one() const;
    ScalarExpr num(const Rational& r) const;
    ScalarExpr coeff(const Coeff& c) const;
    ScalarExpr i() const;
    ScalarExpr hbar(int k = 1) const;
    ScalarExpr var(Generator g) const;
    ScalarExpr x(int i) const;
    // G with the given derivative labels, e.g. G({i,j}) = G_ij.
    ScalarExpr G(const std::vector<int>& derivs = {}) const;
    ScalarExpr calG() const;
    ScalarExpr calG_inv() const;
    ScalarExpr nu(int i) const;
    ScalarExpr mu2(int i, int k, int l) const;
    ScalarExpr mu3(int k, int l) const;
    ScalarExpr P(int i, int j) const;

    Poly bound_derivative(const std::vector<int>& derivs) const;

private:
    Context() = default;
    int N_ = 2;
    int order_ = 4;
    GMode mode_ = GMode::Formal;
    Poly surface_;
    Poly q_;
    bool q_const_ = false;
    Rational q_const_value_;
    Monomial q_lead_;
    Coeff q_lead_coeff_;
    Poly q_tail_;
    mutable std::atomic<uint64_t> dropped_{0};
    mutable std::map<std::vector<int>, Poly> bound_cache_;
};

using CtxPtr = std::shared_ptr<const Context>;

class ScalarExpr {
public:
    ScalarExpr() = default;
    // p need not be in normal form.
    ScalarExpr(CtxPtr ctx, Poly p);

    const CtxPtr& ctx() const { return ctx_; }
    const Poly& poly() const { return num_; }

    bool is_zero() const { return num_.empty(); }
    bool is_constant() const { return num_.is_constant(); }
    Coeff constant_value() const;
    int max_hbar() const;
    int min_hbar() const;

    ScalarExpr operator-() const;
    ScalarExpr& operator+=(const ScalarExpr& o);
    ScalarExpr& operator-=(const ScalarExpr& o);
    ScalarExpr& operator*=(const ScalarExpr& o);
    friend ScalarExpr operator+(ScalarExpr a, const ScalarExpr& b) { return a += b; }
    friend ScalarExpr operator-(ScalarExpr a, const ScalarExpr& b) { return a -= b; }
    friend ScalarExpr operator*(ScalarExpr a, const ScalarExpr& b) { return a *= b; }
    friend ScalarExpr operator*(const Coeff& c, const ScalarExpr& e) { return e.scaled(c); }
    friend bool operator==(const ScalarExpr& a, const ScalarExpr& b);
    friend bool operator!=(const ScalarExpr& a, const ScalarExpr& b) { return !(a == b); }

    ScalarExpr scaled(const Coeff& c) const;
    ScalarExpr truncated(int order) const;
    ScalarExpr hbar_shifted(int d) const;
    // Coefficient of hbar^k (an hbar-free expression).
    ScalarExpr hbar_part(int k) const;
    bool depends_on(Generator g) const;
    bool has_function_atoms() const;

    std::string str() const;
    size_t hash() const;

private:
    CtxPtr ctx_;
    Poly num_;
    static ScalarExpr raw(CtxPtr ctx, Poly p);
    friend ScalarExpr mul(const ScalarExpr&, const ScalarExpr&, int);
    friend ScalarExpr differentiate(const ScalarExpr&, int);
    friend ScalarExpr diff_var(const ScalarExpr&, Generator);
};

ScalarExpr mul(const ScalarExpr& a, const ScalarExpr& b, int order);
ScalarExpr pow(const ScalarExpr& a, int e);

// d/dx_i including the chain rule through function atoms and Ginv.
ScalarExpr differentiate(const ScalarExpr& e, int i);
// Partial derivative with respect to any variable (x variables use differentiate).
ScalarExpr diff_var(const ScalarExpr& e, Generator g);
// Formal G replaced by the bound surface of target.
ScalarExpr substitute(const ScalarExpr& e, const CtxPtr& target);
// Replaces non-position variables by expressions.
ScalarExpr substitute_vars(const ScalarExpr& e, const std::map<Generator, ScalarExpr>& sub);
Coeff eval_numeric(const ScalarExpr& e, const std::map<Generator, Rational>& point, const Rational& hbar);

std::string render_poly(const Poly& p);
inline std::ostream& operator<<(std::ostream& os, const ScalarExpr& e) { return os << e.str(); }

}  // namespace pomq
