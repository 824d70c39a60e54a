#include "pomq/symbol.hpp"

#include <algorithm>

namespace pomq {

namespace {

bool is_momentum(GenKind k) {
    return k == GenKind::PX || k == GenKind::PV || k == GenKind::PLambda || k == GenKind::PU;
}

Coeff half_i_pow(int k, bool negative) {
    Coeff f(1);
    Coeff step(Rational(0), Rational(negative ? -1 : 1, 2));
    for (int t = 0; t < k; ++t) f *= step;
    return f;
}

// exp(s (i hbar/2) sum_pairs d_q d_p) f, with s = +1 or -1.
ScalarExpr reorder(const ScalarExpr& f, const CanonicalPairs& pairs, int order, bool negative) {
    ScalarExpr out = f.truncated(order);
    ScalarExpr cur = f;
    for (int k = 1; k <= order; ++k) {
        ScalarExpr next = f.ctx()->zero();
        for (const auto& [q, p] : pairs) {
            ScalarExpr dp = d_coord(cur, p);
            if (dp.is_zero()) continue;
            next += d_coord(dp, q);
        }
        if (next.is_zero()) break;
        cur = next.truncated(order - k);
        Rational inv(1, 1);
        for (int t = 2; t <= k; ++t) inv /= t;
        out += cur.hbar_shifted(k).scaled(half_i_pow(k, negative) * Coeff(inv));
    }
    return out.truncated(order);
}

}  // namespace

ConstBracket ConstBracket::canonical(const CanonicalPairs& pairs) {
    ConstBracket b;
    for (const auto& [q, p] : pairs) b.coords.push_back(q);
    for (const auto& [q, p] : pairs) b.coords.push_back(p);
    size_t n = b.coords.size(), h = pairs.size();
    b.omega.assign(n, std::vector<Rational>(n, Rational(0)));
    for (size_t k = 0; k < h; ++k) {
        b.omega[k][k + h] = 1;
        b.omega[k + h][k] = -1;
    }
    return b;
}

int ConstBracket::index(Generator g) const {
    auto it = std::find(coords.begin(), coords.end(), g);
    if (it == coords.end()) throw Error(ErrorKind::UnknownGenerator, g.name() + " is not a coordinate");
    return int(it - coords.begin());
}

Rational ConstBracket::get(Generator a, Generator b) const { return omega[index(a)][index(b)]; }

ConstBracket ConstBracket::restricted(const std::vector<Generator>& keep) const {
    ConstBracket r;
    r.coords = keep;
    r.omega.assign(keep.size(), std::vector<Rational>(keep.size()));
    for (size_t a = 0; a < keep.size(); ++a)
        for (size_t b = 0; b < keep.size(); ++b) r.omega[a][b] = get(keep[a], keep[b]);
    return r;
}

ScalarExpr d_coord(const ScalarExpr& f, Generator g) {
    if (g.kind == GenKind::X) return differentiate(f, g.index);
    return diff_var(f, g);
}

ScalarExpr d_dir(const ScalarExpr& f, const LinearForm& dir) {
    ScalarExpr out = f.ctx()->zero();
    for (const auto& [g, c] : dir)
        if (sgn(c) != 0) out += d_coord(f, g).scaled(Coeff(c));
    return out;
}

ScalarExpr linear_symbol(const CtxPtr& ctx, const LinearForm& l) {
    ScalarExpr out = ctx->zero();
    for (const auto& [g, c] : l)
        if (sgn(c) != 0) out += ctx->var(g).scaled(Coeff(c));
    return out;
}

Rational pb_linear(const LinearForm& a, const LinearForm& b, const ConstBracket& w) {
    Rational s = 0;
    for (const auto& [ga, ca] : a)
        for (const auto& [gb, cb] : b) s += ca * cb * w.get(ga, gb);
    return s;
}

const ScalarExpr& DerivCache::get(std::vector<Generator> idx) {
    std::sort(idx.begin(), idx.end());
    auto it = memo_.find(idx);
    if (it != memo_.end()) return it->second;
    Generator last = idx.back();
    idx.pop_back();
    const ScalarExpr& base = get(idx);
    ScalarExpr d = base.is_zero() ? base : d_coord(base, last);
    idx.push_back(last);
    return memo_.emplace(idx, std::move(d)).first->second;
}

namespace {

// Contraction sum_b omega[a1][b1]..omega[ak][bk] d_b g, one index at a time.
// Keys are sorted multisets (contracted, still raw); derivatives commute.
class Contraction {
public:
    Contraction(const ConstBracket& w, DerivCache& g) : w_(w), g_(g) {}

    const ScalarExpr& get(std::vector<size_t> a, std::vector<size_t> b) {
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        auto key = std::make_pair(a, b);
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;
        ScalarExpr out;
        if (a.empty()) {
            std::vector<Generator> gb;
            for (auto i : b) gb.push_back(w_.coords[i]);
            out = g_.get(gb);
        } else {
            size_t head = a.back();
            a.pop_back();
            out = g_.get({}).ctx()->zero();
            for (size_t j = 0; j < w_.coords.size(); ++j) {
                const Rational& c = w_.omega[head][j];
                if (sgn(c) == 0) continue;
                b.push_back(j);
                const ScalarExpr& sub = get(a, b);
                b.pop_back();
                if (!sub.is_zero()) out += sub.scaled(Coeff(c));
            }
        }
        return memo_.emplace(key, std::move(out)).first->second;
    }

private:
    const ConstBracket& w_;
    DerivCache& g_;
    std::map<std::pair<std::vector<size_t>, std::vector<size_t>>, ScalarExpr> memo_;
};

// sum_k (i hbar/2)^k/k! omega^{a1 b1}..omega^{ak bk} d_a f d_b g over k in 0..order,
// only even k when even_only is set.
ScalarExpr moyal_series(const ScalarExpr& f, const ScalarExpr& g, const ConstBracket& w, int order, bool even_only) {
    const CtxPtr& ctx = f.ctx();
    ScalarExpr out = mul(f, g, order);
    if (f.is_constant() || g.is_constant()) return out.truncated(order);
    DerivCache F(f.truncated(order)), Gd(g.truncated(order));
    Contraction C(w, Gd);
    size_t n = w.coords.size();
    for (int k = 1; k <= order; ++k) {
        if (even_only && k % 2) continue;
        ScalarExpr lk = ctx->zero();
        // nondecreasing a; each multiset stands for k!/prod(mult!) orderings
        std::vector<size_t> a(k, 0);
        while (true) {
            const ScalarExpr& h = C.get(a, {});
            if (!h.is_zero()) {
                std::vector<Generator> ga;
                for (auto i : a) ga.push_back(w.coords[i]);
                const ScalarExpr& fa = F.get(ga);
                if (!fa.is_zero()) {
                    Rational weight(1, 1);
                    int run = 1;
                    for (int t = 1; t < k; ++t) {
                        run = a[t] == a[t - 1] ? run + 1 : 1;
                        weight /= run;
                    }
                    lk += mul(fa, h.truncated(order - k), order - k).scaled(Coeff(weight));
                }
            }
            int t = k - 1;
            while (t >= 0 && a[t] == n - 1) --t;
            if (t < 0) break;
            ++a[t];
            for (int u = t + 1; u < k; ++u) a[u] = a[t];
        }
        out += lk.hbar_shifted(k).scaled(half_i_pow(k, false));
    }
    return out.truncated(order);
}

}  // namespace

ScalarExpr moyal(const ScalarExpr& f, const ScalarExpr& g, const ConstBracket& w, int order) {
    return moyal_series(f, g, w, order, false);
}

ScalarExpr moyal_sym(const ScalarExpr& f, const ScalarExpr& g, const ConstBracket& w, int order) {
    return moyal_series(f, g, w, order, true);
}

ScalarExpr moyal_bracket(const ScalarExpr& f, const ScalarExpr& g, const ConstBracket& w, int order) {
    ScalarExpr d = moyal(f, g, w, order + 1) - moyal(g, f, w, order + 1);
    return d.hbar_shifted(-1).scaled(-Coeff::i());
}

ScalarExpr weyl_symbol(const OperatorExpr& o, const CanonicalPairs& pairs, int order) {
    const CtxPtr& ctx = o.ctx();
    ScalarExpr std_sym = ctx->zero();
    for (const auto& [w, c] : o.terms()) {
        bool seen_p = false;
        ScalarExpr t = c;
        for (auto g : w) {
            if (is_momentum(g.kind))
                seen_p = true;
            else if (seen_p)
                throw Error(ErrorKind::Unsupported, "word " + word_str(w) + " is not in standard order");
            t = mul(t, ctx->var(g), order);
        }
        std_sym += t;
    }
    return reorder(std_sym, pairs, order, false);
}

OperatorExpr weyl_operator(const ScalarExpr& s, const CanonicalPairs& pairs, int order) {
    const CtxPtr& ctx = s.ctx();
    ScalarExpr std_sym = reorder(s, pairs, order, true);
    std::vector<Generator> words_gens;
    for (const auto& [q, p] : pairs) {
        if (q.kind != GenKind::X) words_gens.push_back(q);
        words_gens.push_back(p);
    }
    OperatorExpr out(ctx);
    for (const auto& t : std_sym.poly().terms) {
        Monomial coef;
        coef.hbar = t.m.hbar;
        Word w;
        for (const auto& f : t.m.f) {
            if (atom::is_var(f.atom)) {
                Generator g = atom::var_gen(f.atom);
                if (g.kind != GenKind::X) {
                    if (std::find(words_gens.begin(), words_gens.end(), g) == words_gens.end())
                        throw Error(ErrorKind::UnknownGenerator, g.name() + " is not a coordinate");
                    for (uint32_t e = 0; e < f.exp; ++e) w.push_back(g);
                    continue;
                }
            }
            coef.f.push_back(f);
        }
        std::sort(w.begin(), w.end());
        out.add(w, ScalarExpr(ctx, Poly::monomial(coef, t.c)));
    }
    return out;
}

LinearReduction::LinearReduction(CtxPtr ctx, CanonicalPairs pairs, std::vector<LinearForm> xi,
                                 std::vector<LinearForm> pi)
    : ctx_(std::move(ctx)), pairs_(std::move(pairs)), xi_(std::move(xi)), pi_(std::move(pi)) {
    source_ = ConstBracket::canonical(pairs_);
    if (xi_.size() != pi_.size()) throw Error(ErrorKind::InvalidSpec, "unpaired ACCS");
    for (size_t a = 0; a < size(); ++a)
        for (size_t b = 0; b < size(); ++b) {
            if (pb_linear(xi_[a], pi_[b], source_) != (a == b ? 1 : 0) || pb_linear(xi_[a], xi_[b], source_) != 0 ||
                pb_linear(pi_[a], pi_[b], source_) != 0)
                throw Error(ErrorKind::InvalidSpec, "ACCS does not obey the canonical algebra");
        }
    for (size_t k = 0; k < size(); ++k) {
        LinearForm dx, dp;
        for (auto z : source_.coords) {
            Rational a = minus_xi(k, z), b = minus_pi(k, z);
            if (sgn(a) != 0) dx[z] = a;
            if (sgn(b) != 0) dp[z] = b;
        }
        dxi_.push_back(dx);
        dpi_.push_back(dp);
    }
}

Rational LinearReduction::minus_xi(size_t k, Generator z) const { return pb_linear(xi_[k], {{z, 1}}, source_); }
Rational LinearReduction::minus_pi(size_t k, Generator z) const { return pb_linear(pi_[k], {{z, 1}}, source_); }

LinearForm LinearReduction::projected(Generator z) const {
    LinearForm out{{z, Rational(1)}};
    for (size_t k = 0; k < size(); ++k) {
        Rational a = minus_xi(k, z), b = minus_pi(k, z);
        for (const auto& [g, c] : pi_[k]) out[g] -= a * c;
        for (const auto& [g, c] : xi_[k]) out[g] += b * c;
    }
    for (auto it = out.begin(); it != out.end();) it = sgn(it->second) == 0 ? out.erase(it) : std::next(it);
    return out;
}

ConstBracket LinearReduction::reduced_bracket(const std::vector<Generator>& coords) const {
    ConstBracket r;
    r.coords = coords;
    r.omega.assign(coords.size(), std::vector<Rational>(coords.size()));
    std::vector<LinearForm> proj;
    for (auto z : coords) proj.push_back(projected(z));
    for (size_t a = 0; a < coords.size(); ++a)
        for (size_t b = 0; b < coords.size(); ++b) r.omega[a][b] = pb_linear(proj[a], proj[b], source_);
    return r;
}

std::map<Generator, LinearForm> LinearReduction::chart(const std::vector<Generator>& keep) const {
    std::vector<Generator> solve;
    for (auto z : source_.coords)
        if (std::find(keep.begin(), keep.end(), z) == keep.end()) solve.push_back(z);
    std::vector<LinearForm> eqs;
    for (const auto& l : xi_) eqs.push_back(l);
    for (const auto& l : pi_) eqs.push_back(l);
    if (eqs.size() != solve.size()) throw Error(ErrorKind::InvalidSpec, "chart does not match the surface dimension");
    size_t n = solve.size();
    std::vector<std::vector<Rational>> A(n, std::vector<Rational>(n));
    for (size_t r = 0; r < n; ++r)
        for (size_t c = 0; c < n; ++c) {
            auto it = eqs[r].find(solve[c]);
            A[r][c] = it == eqs[r].end() ? Rational(0) : it->second;
        }
    auto Ainv = invert(A);
    std::map<Generator, LinearForm> out;
    for (auto z : keep) out[z] = {{z, Rational(1)}};
    for (size_t c = 0; c < n; ++c) {
        LinearForm l;
        for (size_t r = 0; r < n; ++r)
            for (auto z : keep) {
                auto it = eqs[r].find(z);
                if (it != eqs[r].end()) l[z] -= Ainv[c][r] * it->second;
            }
        for (auto it = l.begin(); it != l.end();) it = sgn(it->second) == 0 ? l.erase(it) : std::next(it);
        out[solve[c]] = l;
    }
    return out;
}

ScalarExpr LinearReduction::restrict(const ScalarExpr& f, const std::map<Generator, LinearForm>& chart) const {
    std::map<Generator, ScalarExpr> sub;
    for (const auto& [z, l] : chart) {
        if (l.size() == 1 && l.begin()->first == z && l.begin()->second == 1) continue;
        if (z.kind == GenKind::X) throw Error(ErrorKind::Unsupported, "positions must be chart coordinates");
        sub[z] = linear_symbol(ctx_, l);
    }
    return substitute_vars(f, sub);
}

ScalarExpr LinearReduction::smear(const ScalarExpr& f, int order) const {
    // L = sum_ab Q_ab d_a d_b with Q = sum_k (xi-_k)(xi-_k)^T + (pi-_k)(pi-_k)^T
    const auto& cs = source_.coords;
    size_t n = cs.size();
    Mat Q(n, std::vector<Rational>(n, Rational(0)));
    auto acc = [&](const LinearForm& d) {
        for (size_t a = 0; a < n; ++a) {
            auto ia = d.find(cs[a]);
            if (ia == d.end()) continue;
            for (size_t b = 0; b < n; ++b) {
                auto ib = d.find(cs[b]);
                if (ib != d.end()) Q[a][b] += ia->second * ib->second;
            }
        }
    };
    for (size_t k = 0; k < size(); ++k) {
        acc(dxi_[k]);
        acc(dpi_[k]);
    }
    return gaussian_series(f, cs, Q, order);
}

ScalarExpr hessian_contract(const ScalarExpr& f, const std::vector<Generator>& coords, const Mat& Q) {
    ScalarExpr out = f.ctx()->zero();
    DerivCache D(f);
    size_t n = coords.size();
    for (size_t a = 0; a < n; ++a)
        for (size_t b = a; b < n; ++b) {
            Rational c = a == b ? Q[a][a] : Q[a][b] + Q[b][a];
            if (sgn(c) == 0) continue;
            const ScalarExpr& d = D.get({coords[a], coords[b]});
            if (!d.is_zero()) out += d.scaled(Coeff(c));
        }
    return out;
}

ScalarExpr gaussian_series(const ScalarExpr& f, const std::vector<Generator>& coords, const Mat& Q, int order) {
    const CtxPtr& ctx = f.ctx();
    ScalarExpr out = ctx->zero();
    ScalarExpr cur = f;
    mpz_class fact = 1, four = 1;
    for (int j = 1; j <= order; ++j) {
        cur = hessian_contract(cur.truncated(order - j), coords, Q);
        if (cur.is_zero()) break;
        fact *= j;
        four *= 4;
        out += cur.hbar_shifted(j).scaled(Coeff(Rational(mpz_class(1), fact * four)));
    }
    return out;
}

Mat identity(size_t n) {
    Mat m(n, std::vector<Rational>(n, Rational(0)));
    for (size_t i = 0; i < n; ++i) m[i][i] = 1;
    return m;
}

Mat operator*(const Mat& a, const Mat& b) {
    Mat r(a.size(), std::vector<Rational>(b.empty() ? 0 : b[0].size(), Rational(0)));
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t k = 0; k < b.size(); ++k) {
            if (sgn(a[i][k]) == 0) continue;
            for (size_t j = 0; j < b[k].size(); ++j) r[i][j] += a[i][k] * b[k][j];
        }
    return r;
}

Mat operator+(const Mat& a, const Mat& b) {
    Mat r = a;
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < a[i].size(); ++j) r[i][j] += b[i][j];
    return r;
}

Mat operator-(const Mat& a, const Mat& b) { return a + scaled(b, Rational(-1)); }

Mat scaled(const Mat& a, const Rational& c) {
    Mat r = a;
    for (auto& row : r)
        for (auto& v : row) v *= c;
    return r;
}

Mat epsilon(int N) {
    Mat e(N, std::vector<Rational>(N, Rational(0)));
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) e[i][j] = i > j ? 1 : (i < j ? -1 : 0);
    return e;
}

Mat invert(Mat m) {
    size_t n = m.size();
    std::vector<std::vector<Rational>> inv(n, std::vector<Rational>(n, Rational(0)));
    for (size_t i = 0; i < n; ++i) inv[i][i] = 1;
    for (size_t c = 0; c < n; ++c) {
        size_t piv = c;
        while (piv < n && sgn(m[piv][c]) == 0) ++piv;
        if (piv == n) throw Error(ErrorKind::DivisionByZero, "singular matrix");
        std::swap(m[piv], m[c]);
        std::swap(inv[piv], inv[c]);
        Rational d = m[c][c];
        for (size_t k = 0; k < n; ++k) {
            m[c][k] /= d;
            inv[c][k] /= d;
        }
        for (size_t r = 0; r < n; ++r) {
            if (r == c || sgn(m[r][c]) == 0) continue;
            Rational f = m[r][c];
            for (size_t k = 0; k < n; ++k) {
                m[r][k] -= f * m[c][k];
                inv[r][k] -= f * inv[c][k];
            }
        }
    }
    return inv;
}

}  // namespace pomq
