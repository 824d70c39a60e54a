#pragma once

#include <map>
#include <utility>
#include <vector>

#include "pomq/operator.hpp"

namespace pomq {

using LinearForm = std::map<Generator, Rational>;
using Mat = std::vector<std::vector<Rational>>;
using CanonicalPairs = std::vector<std::pair<Generator, Generator>>;

// Constant bracket {z_a, z_b} = omega[a][b] over a coordinate list.
struct ConstBracket {
    std::vector<Generator> coords;
    std::vector<std::vector<Rational>> omega;

    static ConstBracket canonical(const CanonicalPairs& pairs);
    int index(Generator g) const;
    Rational get(Generator a, Generator b) const;
    // Kept coordinates only.
    ConstBracket restricted(const std::vector<Generator>& keep) const;
};

// Partial derivative of a symbol in a coordinate (chain rule through G for x).
ScalarExpr d_coord(const ScalarExpr& f, Generator g);
// Directional derivative sum_a c_a d/dz_a.
ScalarExpr d_dir(const ScalarExpr& f, const LinearForm& dir);
ScalarExpr linear_symbol(const CtxPtr& ctx, const LinearForm& l);

// Memoized partial derivatives of one symbol.
class DerivCache {
public:
    explicit DerivCache(ScalarExpr f) { memo_[{}] = std::move(f); }
    const ScalarExpr& get(std::vector<Generator> idx);

private:
    std::map<std::vector<Generator>, ScalarExpr> memo_;
};
Rational pb_linear(const LinearForm& a, const LinearForm& b, const ConstBracket& w);

// sum_ab Q_ab d_a d_b f over the given coordinates.
ScalarExpr hessian_contract(const ScalarExpr& f, const std::vector<Generator>& coords, const Mat& Q);
// sum_{j>=1} (hbar/4)^j/j! L^j f with L the contraction above.
ScalarExpr gaussian_series(const ScalarExpr& f, const std::vector<Generator>& coords, const Mat& Q, int order);

// Moyal product with (i hbar/2)^k/k! omega^{a1 b1}..omega^{ak bk} d_a f d_b g.
ScalarExpr moyal(const ScalarExpr& f, const ScalarExpr& g, const ConstBracket& w, int order);
ScalarExpr moyal_sym(const ScalarExpr& f, const ScalarExpr& g, const ConstBracket& w, int order);
// (f*g - g*f)/(i hbar)
ScalarExpr moyal_bracket(const ScalarExpr& f, const ScalarExpr& g, const ConstBracket& w, int order);

// Weyl symbol of an operator of a canonical algebra whose normal order puts
// every coordinate left of every momentum, and its inverse.
ScalarExpr weyl_symbol(const OperatorExpr& o, const CanonicalPairs& pairs, int order);
OperatorExpr weyl_operator(const ScalarExpr& s, const CanonicalPairs& pairs, int order);

// Projection for an ACCS linear in the coordinates of a canonical algebra.
// Operators are handled through Weyl symbols: P is restriction to the surface
// and Q is Gaussian smearing along the ACCS directions.
class LinearReduction {
public:
    LinearReduction(CtxPtr ctx, CanonicalPairs pairs, std::vector<LinearForm> xi, std::vector<LinearForm> pi);

    const CtxPtr& ctx() const { return ctx_; }
    const ConstBracket& source() const { return source_; }
    const CanonicalPairs& pairs() const { return pairs_; }
    const std::vector<LinearForm>& xi() const { return xi_; }
    const std::vector<LinearForm>& pi() const { return pi_; }
    size_t size() const { return xi_.size(); }

    // xi-_k z and pi-_k z.
    Rational minus_xi(size_t k, Generator z) const;
    Rational minus_pi(size_t k, Generator z) const;
    LinearForm projected(Generator z) const;
    // Bracket of projected coordinates.
    ConstBracket reduced_bracket(const std::vector<Generator>& coords) const;

    // Linear expressions of every coordinate on the surface in terms of the chart coordinates.
    std::map<Generator, LinearForm> chart(const std::vector<Generator>& keep) const;
    ScalarExpr restrict(const ScalarExpr& f, const std::map<Generator, LinearForm>& chart) const;

    // sum_{j>=1} (hbar/4)^j/j! L^j f with L = sum_k (xi-_k)^2 + (pi-_k)^2, unrestricted.
    ScalarExpr smear(const ScalarExpr& f, int order) const;

private:
    CtxPtr ctx_;
    CanonicalPairs pairs_;
    ConstBracket source_;
    std::vector<LinearForm> xi_, pi_;
    std::vector<LinearForm> dxi_, dpi_;  // coordinate actions as directions
};

Mat identity(size_t n);
Mat operator*(const Mat& a, const Mat& b);
Mat operator+(const Mat& a, const Mat& b);
Mat operator-(const Mat& a, const Mat& b);
Mat scaled(const Mat& a, const Rational& c);
// eps[i][j] = 1 for i > j, -1 for i < j (0-based storage).
Mat epsilon(int N);
// Throws DivisionByZero when singular.
Mat invert(Mat m);

}  // namespace pomq
