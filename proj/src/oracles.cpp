#include "pomq/oracles.hpp"

#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <memory>

namespace pomq {

namespace {

mpz_class factorial(int n) {
    mpz_class f = 1;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

OperatorExpr naive_rec(const OperatorExpr& o, const Projector& p, int depth) {
    int ord = p.order();
    size_t M = p.pairs();
    OperatorExpr out = o;
    if (o.is_zero()) return out;
    for (int total = 1; total <= depth; ++total) {
        for (int n = 0; n <= total; ++n) {
            int m = total - n;
            size_t combos = 1;
            for (int t = 0; t < total; ++t) combos *= M;
            for (size_t idx = 0; idx < combos; ++idx) {
                std::vector<size_t> as(n), bs(m);
                size_t r = idx;
                for (int t = 0; t < n; ++t, r /= M) as[t] = r % M;
                for (int t = 0; t < m; ++t, r /= M) bs[t] = r % M;
                OperatorExpr t = o;
                for (int i = 0; i < n && !t.is_zero(); ++i) t = p.minus_pi(as[i], t, ord);
                for (int j = 0; j < m && !t.is_zero(); ++j) t = p.minus_xi(bs[j], t, ord);
                if (t.is_zero()) continue;
                t = naive_rec(t, p, depth - total);
                for (int j = m - 1; j >= 0; --j) t = p.plus_pi(bs[j], t, ord);
                for (int i = n - 1; i >= 0; --i) t = p.plus_xi(as[i], t, ord);
                Rational coef(mpz_class(n % 2 ? -1 : 1), factorial(n) * factorial(m));
                out -= t.scaled(Coeff(coef));
            }
        }
    }
    return out;
}

using Poly1 = std::vector<double>;

Poly1 poly_mul_x(const Poly1& p, int k) {
    Poly1 r(k, 0.0);
    r.insert(r.end(), p.begin(), p.end());
    return r;
}

// d/dxi acting on p(xi) exp(-xi^2/(2 hbar)), returned as the new polynomial factor.
Poly1 poly_deriv_gauss(const Poly1& p, double hbar) {
    Poly1 r(p.size() + 1, 0.0);
    for (size_t k = 1; k < p.size(); ++k) r[k - 1] += double(k) * p[k];
    for (size_t k = 0; k < p.size(); ++k) r[k + 1] -= p[k] / hbar;
    return r;
}

double eval_poly(const Poly1& p, double x) {
    double r = 0;
    for (size_t k = p.size(); k-- > 0;) r = r * x + p[k];
    return r;
}

struct Quadrature {
    std::unique_ptr<gsl_integration_fixed_workspace, void (*)(gsl_integration_fixed_workspace*)> ws{
        gsl_integration_fixed_alloc(gsl_integration_fixed_hermite, 64, 0.0, 1.0, 0.0, 0.0),
        gsl_integration_fixed_free};
    // integral of f(xi) exp(-xi^2/hbar) dxi
    double integrate(const Poly1& f, double hbar) const {
        const double* x = gsl_integration_fixed_nodes(ws.get());
        const double* w = gsl_integration_fixed_weights(ws.get());
        size_t n = gsl_integration_fixed_n(ws.get());
        double s = std::sqrt(hbar), sum = 0;
        for (size_t i = 0; i < n; ++i) sum += w[i] * eval_poly(f, s * x[i]);
        return sum * s;
    }
};

Poly1 poly_product(const Poly1& a, const Poly1& b) {
    Poly1 r(a.size() + b.size() - 1, 0.0);
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    return r;
}

}  // namespace

OperatorExpr naive_project(const OperatorExpr& o, const Projector& p, int max_degree) {
    if (!p.embedded()) throw Error(ErrorKind::Unsupported, "naive projection needs an embedded projector");
    int deg = p.accs_degree(o);
    if (deg > max_degree) throw Error(ErrorKind::DegreeTooHigh, "ACCS degree " + std::to_string(deg) + " exceeds limit");
    return naive_rec(o, p, deg);
}

std::complex<double> coherent_moment(int n, int m, double hbar, const std::vector<double>& state_poly) {
    static thread_local Quadrature quad;
    Poly1 q = state_poly;
    double norm = quad.integrate(poly_product(q, q), hbar);
    double total = 0;
    double binom = 1;
    for (int k = 0; k <= n; ++k) {
        // xi^k pi^m xi^(n-k)
        Poly1 right = poly_mul_x(q, n - k);
        for (int j = 0; j < m; ++j) right = poly_deriv_gauss(right, hbar);
        Poly1 left = poly_mul_x(q, k);
        total += binom * quad.integrate(poly_product(left, right), hbar);
        binom = binom * double(n - k) / double(k + 1);
    }
    total /= std::pow(2.0, n) * norm;
    std::complex<double> phase = std::pow(std::complex<double>(0.0, -hbar), m);
    return phase * total;
}

UncertaintyReport uncertainty_check(double hbar, const std::vector<double>& state_poly) {
    UncertaintyReport r;
    double mx = coherent_moment(1, 0, hbar, state_poly).real();
    double mp = coherent_moment(0, 1, hbar, state_poly).real();
    double x2 = coherent_moment(2, 0, hbar, state_poly).real();
    double p2 = coherent_moment(0, 2, hbar, state_poly).real();
    r.dxi = std::sqrt(std::max(0.0, x2 - mx * mx));
    r.dpi = std::sqrt(std::max(0.0, p2 - mp * mp));
    r.product = r.dxi * r.dpi;
    r.bound = hbar / 2;
    r.minimal = std::abs(r.product - r.bound) < 1e-10;
    return r;
}

}  // namespace pomq
