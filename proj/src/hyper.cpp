#include "pomq/hyper.hpp"

#include <algorithm>

namespace pomq {

namespace {

constexpr int kMaxDepth = 64;

Coeff factorial_inv(int k) {
    mpz_class f = 1;
    for (int j = 2; j <= k; ++j) f *= j;
    return Coeff(Rational(mpz_class(1), f));
}

// (i/2)^k or (-i/2)^k
Coeff half_i_power(int k, bool negative) {
    Coeff c(1);
    Coeff step = negative ? Coeff(0, Rational(-1, 2)) : Coeff(0, Rational(1, 2));
    for (int j = 0; j < k; ++j) c *= step;
    return c;
}

}  // namespace

OperatorExpr apply_minus_table(const std::map<Generator, OperatorExpr>& action, const OperatorExpr& o,
                               const AlgebraTable& alg, int order) {
    const CtxPtr& ctx = alg.ctx();
    auto act = [&](Generator g) -> OperatorExpr {
        auto it = action.find(g);
        return it == action.end() ? OperatorExpr(ctx) : it->second;
    };
    OperatorExpr out(ctx);
    for (const auto& [w, c] : o.terms()) {
        // (Z- c) w
        ScalarExpr dc = ctx->zero();
        for (int k = 1; k <= ctx->N(); ++k) {
            OperatorExpr ax = act(gen::x(k));
            if (ax.is_zero()) continue;
            if (!ax.is_scalar()) throw Error(ErrorKind::Unsupported, "action on x must be a function");
            dc += mul(ax.scalar_part(), differentiate(c, k), order);
        }
        if (!dc.is_zero()) out += OperatorExpr::term(dc, w);
        // c (Z- w)
        for (size_t i = 0; i < w.size(); ++i) {
            OperatorExpr a = act(w[i]);
            if (a.is_zero()) continue;
            Word head(w.begin(), w.begin() + i), tail(w.begin() + i + 1, w.end());
            OperatorExpr t = multiply(OperatorExpr::term(c, head), a, alg, order);
            if (!tail.empty()) t = multiply(t, OperatorExpr::term(ctx->one(), tail), alg, order);
            out += t;
        }
    }
    return out;
}

OperatorExpr apply_hyper(const HyperOperator& h, const OperatorExpr& o, const AlgebraTable& alg, int order) {
    if (h.kind == HyperKind::Plus) return symmetrized(h.source, o, alg, order);
    if (!h.action.empty()) return apply_minus_table(h.action, o, alg, order);
    return commutator_over_ihbar(h.source, o, alg, order);
}

// ---------------------------------------------------------------- Projector

Projector::Projector(std::shared_ptr<const AlgebraTable> source, std::shared_ptr<const AlgebraTable> target,
                     AccsPair accs, std::map<Generator, OperatorExpr> images)
    : source_(std::move(source)), target_(std::move(target)), accs_(std::move(accs)), images_(std::move(images)) {
    if (accs_.xi.size() != accs_.pi.size()) throw Error(ErrorKind::InvalidSpec, "unpaired ACCS");
    const CtxPtr& ctx = source_->ctx();
    int ord = order();
    for (size_t a = 0; a < pairs(); ++a) {
        for (size_t b = 0; b < pairs(); ++b) {
            OperatorExpr xp = commutator_over_ihbar(accs_.xi[a], accs_.pi[b], *source_, ord);
            OperatorExpr xx = commutator_over_ihbar(accs_.xi[a], accs_.xi[b], *source_, ord);
            OperatorExpr pp = commutator_over_ihbar(accs_.pi[a], accs_.pi[b], *source_, ord);
            OperatorExpr delta(a == b ? ctx->one() : ctx->zero());
            if (xp != delta || !xx.is_zero() || !pp.is_zero())
                throw Error(ErrorKind::InvalidSpec, "ACCS does not obey the canonical algebra");
        }
        bool xi_kills = true, pi_kills = true;
        if (!source_->x_in_words()) {
            for (int k = 1; k <= ctx->N(); ++k) {
                OperatorExpr x(ctx->x(k));
                if (!minus_xi(a, x, ord).is_zero()) xi_kills = false;
                if (!minus_pi(a, x, ord).is_zero()) pi_kills = false;
            }
        }
        if (!xi_kills && !pi_kills)
            throw Error(ErrorKind::Unsupported, "neither member of an ACCS pair commutes with positions");
    }
    embedded_ = true;
    for (auto g : target_->generators()) {
        if (!source_->has(g)) {
            embedded_ = false;
            break;
        }
        OperatorExpr gop = source_->op(g);
        for (size_t a = 0; a < pairs() && embedded_; ++a)
            if (!minus_xi(a, gop, ord).is_zero() || !minus_pi(a, gop, ord).is_zero()) embedded_ = false;
    }
    for (size_t a = 0; a < pairs(); ++a)
        for (const auto* z : {&accs_.xi[a], &accs_.pi[a]})
            if (z->terms().size() == 1 && z->terms().begin()->first.size() == 1)
                accs_gens_.push_back(z->terms().begin()->first[0]);
}

OperatorExpr Projector::minus(const OperatorExpr& z, const OperatorExpr& o, int order) const {
    if (order < 0 || o.is_zero()) return OperatorExpr(source_->ctx());
    return commutator_over_ihbar(z, o, *source_, order);
}

OperatorExpr Projector::minus_xi(size_t a, const OperatorExpr& o, int order) const { return minus(accs_.xi[a], o, order); }
OperatorExpr Projector::minus_pi(size_t a, const OperatorExpr& o, int order) const { return minus(accs_.pi[a], o, order); }
OperatorExpr Projector::plus_xi(size_t a, const OperatorExpr& o, int order) const {
    return symmetrized(accs_.xi[a], o, *source_, order);
}
OperatorExpr Projector::plus_pi(size_t a, const OperatorExpr& o, int order) const {
    return symmetrized(accs_.pi[a], o, *source_, order);
}

OperatorExpr Projector::laplacian(const OperatorExpr& o, int order) const {
    OperatorExpr out(source_->ctx());
    for (size_t a = 0; a < pairs(); ++a) {
        out += minus_xi(a, minus_xi(a, o, order), order);
        out += minus_pi(a, minus_pi(a, o, order), order);
    }
    return out;
}

// Level k holds the terms of Omega^k (X (x) Y), accurate to order - k.
std::vector<std::vector<Projector::Chain>> Projector::omega_chains(const OperatorExpr& x, const OperatorExpr& y,
                                                                   int order) const {
    std::vector<std::vector<Chain>> levels;
    levels.push_back({Chain{x, y, 1}});
    for (int k = 1; k <= order; ++k) {
        std::vector<Chain> next;
        int ord = order - k;
        for (const auto& ch : levels.back()) {
            for (size_t a = 0; a < pairs(); ++a) {
                OperatorExpr l1 = minus_xi(a, ch.left, ord);
                if (!l1.is_zero()) {
                    OperatorExpr r1 = minus_pi(a, ch.right, ord);
                    if (!r1.is_zero()) next.push_back({l1, r1, ch.sign});
                }
                OperatorExpr l2 = minus_pi(a, ch.left, ord);
                if (!l2.is_zero()) {
                    OperatorExpr r2 = minus_xi(a, ch.right, ord);
                    if (!r2.is_zero()) next.push_back({l2, r2, -ch.sign});
                }
            }
        }
        if (next.empty()) break;
        levels.push_back(std::move(next));
    }
    return levels;
}

OperatorExpr Projector::star(const OperatorExpr& x, const OperatorExpr& y, int order) const {
    auto levels = omega_chains(x, y, order);
    OperatorExpr out(source_->ctx());
    for (size_t k = 0; k < levels.size(); ++k) {
        OperatorExpr lk(source_->ctx());
        for (const auto& ch : levels[k]) {
            OperatorExpr p = multiply(ch.left, ch.right, *source_, order - int(k));
            lk += ch.sign > 0 ? p : -p;
        }
        Coeff f = half_i_power(int(k), true) * factorial_inv(int(k));
        out += lk.hbar_shifted(int(k)).scaled(f);
    }
    return out;
}

OperatorExpr Projector::pstar(const OperatorExpr& x, const OperatorExpr& y, int order) const {
    return pstar_impl(x, y, order, 0);
}

OperatorExpr Projector::pstar_impl(const OperatorExpr& x, const OperatorExpr& y, int order, int depth) const {
    auto levels = omega_chains(x, y, order);
    OperatorExpr out(target_->ctx());
    for (size_t k = 0; k < levels.size(); ++k) {
        int ord = order - int(k);
        OperatorExpr lk(target_->ctx());
        for (const auto& ch : levels[k]) {
            OperatorExpr pl = project_impl(ch.left, ord, depth + 1);
            if (pl.is_zero()) continue;
            OperatorExpr pr = project_impl(ch.right, ord, depth + 1);
            OperatorExpr p = multiply(pl, pr, *target_, ord);
            lk += ch.sign > 0 ? p : -p;
        }
        Coeff f = half_i_power(int(k), false) * factorial_inv(int(k));
        out += lk.hbar_shifted(int(k)).scaled(f);
    }
    return out;
}

OperatorExpr Projector::project(const OperatorExpr& o, int order) const { return project_impl(o, order, 0); }

OperatorExpr Projector::project_impl(const OperatorExpr& o, int order, int depth) const {
    OperatorExpr out(target_->ctx());
    if (order < 0) return out;
    for (const auto& [w, c] : o.terms()) out += project_term(c, w, order, depth);
    return out;
}

OperatorExpr Projector::project_term(const ScalarExpr& c, const Word& w, int order, int depth) const {
    if (depth > kMaxDepth) throw Error(ErrorKind::NonPolynomialInACCS, "projection recursion does not terminate");
    if (c.is_constant()) return project_word(w, order, depth).scaled(c.constant_value()).truncated(order);
    if (w.empty()) return OperatorExpr(c.truncated(order));
    return pstar_impl(OperatorExpr(c), OperatorExpr::term(source_->ctx()->one(), w), order, depth);
}

OperatorExpr Projector::project_word(const Word& w, int order, int depth) const {
    const CtxPtr& tctx = target_->ctx();
    if (w.empty()) return OperatorExpr(tctx->one());
    auto key = std::make_pair(order, w);
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = word_cache_.find(key);
        if (it != word_cache_.end()) return it->second;
    }
    OperatorExpr out(tctx);
    if (w.size() == 1) {
        Generator g = w[0];
        auto it = images_.find(g);
        if (it != images_.end()) {
            if (it->second.mentions(g)) throw Error(ErrorKind::InvalidSpec, "image of " + g.name() + " refers to itself");
            out = project_impl(it->second, order, depth + 1);
        } else {
            if (!target_->has(g)) throw Error(ErrorKind::UnknownGenerator, g.name() + " has no projection");
            out = target_->op(g);
        }
    } else {
        Word rest(w.begin() + 1, w.end());
        const CtxPtr& sctx = source_->ctx();
        out = pstar_impl(OperatorExpr::term(sctx->one(), Word{w[0]}), OperatorExpr::term(sctx->one(), rest), order,
                         depth + 1);
    }
    std::lock_guard<std::mutex> lock(mutex_);
    word_cache_.emplace(key, out);
    return out;
}

OperatorExpr Projector::q_correction(const OperatorExpr& o, int order) const {
    OperatorExpr out(target_->ctx());
    OperatorExpr lj = o;
    mpz_class fact = 1;
    for (int j = 1; j <= order; ++j) {
        lj = laplacian(lj, order - j);
        if (lj.is_zero()) break;
        fact *= j;
        mpz_class four = 1;
        for (int t = 0; t < j; ++t) four *= 4;
        Rational f(mpz_class(1), fact * four);
        out += project(lj, order - j).hbar_shifted(j).scaled(Coeff(f));
    }
    return out;
}

int Projector::accs_degree(const OperatorExpr& o) const {
    int d = 0;
    for (const auto& [w, c] : o.terms()) {
        int n = 0;
        for (auto g : w)
            if (std::find(accs_gens_.begin(), accs_gens_.end(), g) != accs_gens_.end()) ++n;
        d = std::max(d, n);
    }
    return d;
}

bool Projector::check_unity_decomposition(const OperatorExpr& o, int order, bool sign_on_n) const {
    if (!embedded_) throw Error(ErrorKind::Unsupported, "unity decomposition needs an embedded projector");
    const CtxPtr& ctx = source_->ctx();
    int ord = this->order();
    size_t M = pairs();
    OperatorExpr total(ctx);
    // Each index sequence a_1..a_n pairs xi+_{a_i} with pi-_{a_i}; b_1..b_m pairs pi+_{b_j} with xi-_{b_j}.
    for (int n = 0; n <= order; ++n) {
        for (int m = 0; n + m <= order; ++m) {
            std::vector<size_t> as(n, 0), bs(m, 0);
            size_t combos = 1;
            for (int t = 0; t < n + m; ++t) combos *= M;
            for (size_t idx = 0; idx < combos; ++idx) {
                size_t r = idx;
                for (int t = 0; t < n; ++t) {
                    as[t] = r % M;
                    r /= M;
                }
                for (int t = 0; t < m; ++t) {
                    bs[t] = r % M;
                    r /= M;
                }
                OperatorExpr t = o;
                for (int i = 0; i < n && !t.is_zero(); ++i) t = minus_pi(as[i], t, ord);
                for (int j = 0; j < m && !t.is_zero(); ++j) t = minus_xi(bs[j], t, ord);
                if (t.is_zero()) continue;
                t = project(t, ord);
                for (int j = m - 1; j >= 0; --j) t = plus_pi(bs[j], t, ord);
                for (int i = n - 1; i >= 0; --i) t = plus_xi(as[i], t, ord);
                mpz_class f = 1;
                for (int q = 2; q <= n; ++q) f *= q;
                for (int q = 2; q <= m; ++q) f *= q;
                int sgn_exp = sign_on_n ? n : m;
                Rational coef(mpz_class(sgn_exp % 2 ? -1 : 1), f);
                total += t.scaled(Coeff(coef));
            }
        }
    }
    return total == o;
}

Rational coherent_moment_table(int a, int b) {
    if (a % 2 || b % 2 || a < 0 || b < 0) return 0;
    auto dfact = [](int n) {
        mpz_class r = 1;
        for (int k = n; k > 1; k -= 2) r *= k;
        return r;
    };
    mpz_class den = 1;
    for (int k = 0; k < (a + b) / 2; ++k) den *= 2;
    return Rational(dfact(a - 1) * dfact(b - 1), den);
}

}  // namespace pomq
