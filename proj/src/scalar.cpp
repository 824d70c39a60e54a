#include "pomq/scalar.hpp"

#include <algorithm>
#include <mutex>
#include <sstream>

namespace pomq {

namespace {
std::mutex g_bound_mutex;

size_t hash_mix(size_t h, size_t v) { return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)); }

size_t hash_rational(const Rational& r) {
    return hash_mix(mpz_get_si(r.get_num_mpz_t()), mpz_get_ui(r.get_den_mpz_t()));
}
}  // namespace

// ---------------------------------------------------------------- atoms

AtomKey atom::func(int id, const std::vector<int>& derivs) {
    AtomKey a = kFuncTag | (uint64_t(id & 0xff) << 48);
    for (int d : derivs) a = add_deriv(a, d);
    return a;
}

AtomKey atom::add_deriv(AtomKey a, int dim) {
    if (dim < 1 || dim > kMaxDims) throw Error(ErrorKind::Unsupported, "derivative label out of range");
    if (deriv_count(a, dim) >= 31) throw Error(ErrorKind::Unsupported, "derivative order overflow");
    return a + (uint64_t(1) << (5 * (kMaxDims - dim)));
}

int atom::total_derivs(AtomKey a) {
    int t = 0;
    for (int d = 1; d <= kMaxDims; ++d) t += deriv_count(a, d);
    return t;
}

std::vector<int> atom::deriv_list(AtomKey a) {
    std::vector<int> out;
    for (int d = 1; d <= kMaxDims; ++d)
        for (int c = 0; c < deriv_count(a, d); ++c) out.push_back(d);
    return out;
}

// ---------------------------------------------------------------- monomials

uint32_t Monomial::exponent(AtomKey a) const {
    for (const auto& fa : f)
        if (fa.atom == a) return fa.exp;
    return 0;
}

size_t Monomial::hash() const {
    size_t h = hbar;
    for (const auto& fa : f) h = hash_mix(hash_mix(h, fa.atom), fa.exp);
    return h;
}

int compare(const Monomial& a, const Monomial& b) {
    size_t n = std::min(a.f.size(), b.f.size());
    for (size_t k = 0; k < n; ++k) {
        if (a.f[k].atom != b.f[k].atom) return a.f[k].atom > b.f[k].atom ? 1 : -1;
        if (a.f[k].exp != b.f[k].exp) return a.f[k].exp > b.f[k].exp ? 1 : -1;
    }
    if (a.f.size() != b.f.size()) return a.f.size() > b.f.size() ? 1 : -1;
    if (a.hbar != b.hbar) return a.hbar > b.hbar ? 1 : -1;
    return 0;
}

Monomial operator*(const Monomial& a, const Monomial& b) {
    Monomial r;
    r.hbar = a.hbar + b.hbar;
    size_t i = 0, j = 0;
    while (i < a.f.size() && j < b.f.size()) {
        if (a.f[i].atom == b.f[j].atom) {
            r.f.push_back({a.f[i].atom, a.f[i].exp + b.f[j].exp});
            ++i;
            ++j;
        } else if (a.f[i].atom > b.f[j].atom) {
            r.f.push_back(a.f[i++]);
        } else {
            r.f.push_back(b.f[j++]);
        }
    }
    while (i < a.f.size()) r.f.push_back(a.f[i++]);
    while (j < b.f.size()) r.f.push_back(b.f[j++]);
    return r;
}

static bool divides(const Monomial& d, const Monomial& m) {
    size_t j = 0;
    for (const auto& fd : d.f) {
        while (j < m.f.size() && m.f[j].atom > fd.atom) ++j;
        if (j == m.f.size() || m.f[j].atom != fd.atom || m.f[j].exp < fd.exp) return false;
    }
    return true;
}

static Monomial quotient(const Monomial& m, const Monomial& d) {
    Monomial r;
    r.hbar = m.hbar - d.hbar;
    size_t j = 0;
    for (const auto& fm : m.f) {
        while (j < d.f.size() && d.f[j].atom > fm.atom) ++j;
        uint32_t e = fm.exp;
        if (j < d.f.size() && d.f[j].atom == fm.atom) e -= d.f[j].exp;
        if (e > 0) r.f.push_back({fm.atom, e});
    }
    return r;
}

// ---------------------------------------------------------------- polynomials

static Poly from_terms(std::vector<Term>&& v) {
    std::sort(v.begin(), v.end(), [](const Term& a, const Term& b) { return compare(a.m, b.m) > 0; });
    Poly p;
    p.terms.reserve(v.size());
    for (auto& t : v) {
        if (!p.terms.empty() && p.terms.back().m == t.m) {
            p.terms.back().c += t.c;
        } else {
            if (!p.terms.empty() && p.terms.back().c.is_zero()) p.terms.pop_back();
            p.terms.push_back(std::move(t));
        }
    }
    if (!p.terms.empty() && p.terms.back().c.is_zero()) p.terms.pop_back();
    return p;
}

Poly Poly::constant(const Coeff& c) {
    Poly p;
    if (!c.is_zero()) p.terms.push_back({Monomial{}, c});
    return p;
}

Poly Poly::monomial(const Monomial& m, const Coeff& c) {
    Poly p;
    if (!c.is_zero()) p.terms.push_back({m, c});
    return p;
}

Poly Poly::atom(AtomKey a, uint32_t e) {
    Monomial m;
    if (e > 0) m.f.push_back({a, e});
    return monomial(m, Coeff(1));
}

Coeff Poly::constant_value() const {
    if (terms.empty()) return Coeff(0);
    if (terms.size() == 1 && terms[0].m.is_one()) return terms[0].c;
    throw Error(ErrorKind::Unsupported, "expression is not constant");
}

Poly Poly::operator-() const {
    Poly r = *this;
    for (auto& t : r.terms) t.c = -t.c;
    return r;
}

Poly Poly::scaled(const Coeff& c) const {
    if (c.is_zero()) return {};
    Poly r = *this;
    for (auto& t : r.terms) t.c *= c;
    return r;
}

static Poly merge(const Poly& a, const Poly& b, bool subtract) {
    Poly r;
    r.terms.reserve(a.terms.size() + b.terms.size());
    size_t i = 0, j = 0;
    while (i < a.terms.size() || j < b.terms.size()) {
        int c;
        if (i == a.terms.size()) c = -1;
        else if (j == b.terms.size()) c = 1;
        else c = compare(a.terms[i].m, b.terms[j].m);
        if (c > 0) {
            r.terms.push_back(a.terms[i++]);
        } else if (c < 0) {
            r.terms.push_back(b.terms[j++]);
            if (subtract) r.terms.back().c = -r.terms.back().c;
        } else {
            Coeff s = subtract ? a.terms[i].c - b.terms[j].c : a.terms[i].c + b.terms[j].c;
            if (!s.is_zero()) r.terms.push_back({a.terms[i].m, std::move(s)});
            ++i;
            ++j;
        }
    }
    return r;
}

Poly operator+(const Poly& a, const Poly& b) {
    if (b.empty()) return a;
    if (a.empty()) return b;
    return merge(a, b, false);
}

Poly operator-(const Poly& a, const Poly& b) {
    if (b.empty()) return a;
    return merge(a, b, true);
}

bool operator==(const Poly& a, const Poly& b) {
    if (a.terms.size() != b.terms.size()) return false;
    for (size_t k = 0; k < a.terms.size(); ++k)
        if (!(a.terms[k].m == b.terms[k].m) || a.terms[k].c != b.terms[k].c) return false;
    return true;
}

Poly Poly::mul(const Poly& a, const Poly& b, int order, uint64_t* dropped) {
    if (a.empty() || b.empty()) return {};
    if (a.is_constant()) {
        Poly r = b.truncated(order, dropped);
        return r.scaled(a.terms[0].c);
    }
    if (b.is_constant()) {
        Poly r = a.truncated(order, dropped);
        return r.scaled(b.terms[0].c);
    }
    std::vector<Term> v;
    v.reserve(a.terms.size() * b.terms.size());
    uint64_t drops = 0;
    for (const auto& ta : a.terms) {
        for (const auto& tb : b.terms) {
            if (int(ta.m.hbar + tb.m.hbar) > order) {
                ++drops;
                continue;
            }
            v.push_back({ta.m * tb.m, ta.c * tb.c});
        }
    }
    if (dropped) *dropped += drops;
    return from_terms(std::move(v));
}

Poly Poly::truncated(int order, uint64_t* dropped) const {
    Poly r;
    r.terms.reserve(terms.size());
    for (const auto& t : terms) {
        if (int(t.m.hbar) <= order) r.terms.push_back(t);
        else if (dropped) ++*dropped;
    }
    return r;
}

Poly Poly::hbar_shifted(int d) const {
    Poly r = *this;
    for (auto& t : r.terms) {
        if (int(t.m.hbar) + d < 0) throw Error(ErrorKind::Unsupported, "negative hbar power");
        t.m.hbar = uint32_t(int(t.m.hbar) + d);
    }
    return r;
}

Poly Poly::partial_atom(AtomKey a) const {
    std::vector<Term> v;
    for (const auto& t : terms) {
        for (size_t k = 0; k < t.m.f.size(); ++k) {
            if (t.m.f[k].atom != a) continue;
            Term nt{t.m, t.c * Coeff(long(t.m.f[k].exp))};
            if (--nt.m.f[k].exp == 0) nt.m.f.erase(nt.m.f.begin() + k);
            v.push_back(std::move(nt));
        }
    }
    return from_terms(std::move(v));
}

size_t Poly::hash() const {
    size_t h = terms.size();
    for (const auto& t : terms) {
        h = hash_mix(h, t.m.hash());
        h = hash_mix(h, hash_rational(t.c.re));
        h = hash_mix(h, hash_rational(t.c.im));
    }
    return h;
}

// ---------------------------------------------------------------- context

static Poly poly_pow(const Poly& p, int e) {
    Poly r = Poly::constant(Coeff(1));
    for (int k = 0; k < e; ++k) r = Poly::mul(r, p, 1 << 20);
    return r;
}

std::shared_ptr<Context> Context::formal(int N, int order) {
    if (N < 1 || N > atom::kMaxDims) throw Error(ErrorKind::ValidationError, "dimension out of range");
    auto c = std::shared_ptr<Context>(new Context());
    c->N_ = N;
    c->order_ = order;
    c->mode_ = GMode::Formal;
    Poly q;
    for (int k = 1; k <= N; ++k) q = q + Poly::atom(atom::func(0, {k}), 2);
    c->q_ = q;
    c->q_lead_ = q.terms.front().m;
    c->q_lead_coeff_ = q.terms.front().c;
    c->q_tail_ = q - Poly::monomial(c->q_lead_, c->q_lead_coeff_);
    return c;
}

std::shared_ptr<Context> Context::bound(int N, int order, const Poly& surface) {
    if (N < 1 || N > atom::kMaxDims) throw Error(ErrorKind::ValidationError, "dimension out of range");
    for (const auto& t : surface.terms) {
        if (t.m.hbar != 0) throw Error(ErrorKind::InvalidSpec, "surface must not contain hbar");
        for (const auto& fa : t.m.f) {
            if (!atom::is_var(fa.atom) || atom::var_gen(fa.atom).kind != GenKind::X ||
                atom::var_gen(fa.atom).index > N)
                throw Error(ErrorKind::InvalidSpec, "surface must be a polynomial in x_1..x_N");
        }
    }
    auto c = std::shared_ptr<Context>(new Context());
    c->N_ = N;
    c->order_ = order;
    c->mode_ = GMode::Bound;
    c->surface_ = surface;
    Poly q;
    for (int k = 1; k <= N; ++k) {
        Poly g = surface.partial_atom(atom::var(gen::x(k)));
        q = q + Poly::mul(g, g, 1 << 20);
    }
    if (q.empty()) throw Error(ErrorKind::DivisionByZeroSymbol, "bound gradient vanishes identically");
    c->q_ = q;
    if (q.is_constant()) {
        Coeff v = q.constant_value();
        if (!v.is_real()) throw Error(ErrorKind::InvalidSpec, "complex gradient norm");
        c->q_const_ = true;
        c->q_const_value_ = v.re;
    } else {
        c->q_lead_ = q.terms.front().m;
        c->q_lead_coeff_ = q.terms.front().c;
        c->q_tail_ = q - Poly::monomial(c->q_lead_, c->q_lead_coeff_);
    }
    return c;
}

Poly Context::normal_form(Poly p) const {
    if (q_const_) {
        bool any = false;
        for (const auto& t : p.terms)
            if (t.m.exponent(atom::kGinv)) any = true;
        if (!any) return p;
        std::vector<Term> v;
        Rational inv = 1 / q_const_value_;
        for (auto& t : p.terms) {
            uint32_t e = t.m.exponent(atom::kGinv);
            if (e) {
                t.m.f.erase(t.m.f.begin());
                Rational s = 1;
                for (uint32_t k = 0; k < e; ++k) s *= inv;
                t.c *= Coeff(s);
            }
            v.push_back(std::move(t));
        }
        return from_terms(std::move(v));
    }
    Monomial lead = q_lead_;
    lead.f.insert(lead.f.begin(), Factor{atom::kGinv, 1});
    Coeff lc_inv = q_lead_coeff_.inverse();
    Monomial ginv1;
    ginv1.f.push_back({atom::kGinv, 1});
    for (;;) {
        std::vector<Term> clean, dirty;
        for (auto& t : p.terms) {
            if (!t.m.f.empty() && t.m.f[0].atom == atom::kGinv && divides(lead, t.m)) dirty.push_back(std::move(t));
            else clean.push_back(std::move(t));
        }
        if (dirty.empty()) {
            Poly r;
            r.terms = std::move(clean);
            return r;
        }
        // Ginv * LT = (1 - Ginv * tail) / lc
        std::vector<Term> out = std::move(clean);
        for (auto& t : dirty) {
            Monomial rest = quotient(t.m, lead);
            Coeff c = t.c * lc_inv;
            out.push_back({rest, c});
            Monomial g1 = rest * ginv1;
            for (const auto& tt : q_tail_.terms) out.push_back({g1 * tt.m, -(c * tt.c)});
        }
        p = from_terms(std::move(out));
    }
}

Poly Context::bound_derivative(const std::vector<int>& derivs) const {
    std::vector<int> key = derivs;
    std::sort(key.begin(), key.end());
    std::lock_guard<std::mutex> lock(g_bound_mutex);
    auto it = bound_cache_.find(key);
    if (it != bound_cache_.end()) return it->second;
    Poly p = surface_;
    for (int d : key) p = p.partial_atom(atom::var(gen::x(d)));
    bound_cache_[key] = p;
    return p;
}

ScalarExpr Context::zero() const { return ScalarExpr(shared_from_this(), Poly{}); }
ScalarExpr Context::one() const { return ScalarExpr(shared_from_this(), Poly::constant(Coeff(1))); }
ScalarExpr Context::num(const Rational& r) const { return ScalarExpr(shared_from_this(), Poly::constant(Coeff(r))); }
ScalarExpr Context::coeff(const Coeff& c) const { return ScalarExpr(shared_from_this(), Poly::constant(c)); }
ScalarExpr Context::i() const { return coeff(Coeff::i()); }

ScalarExpr Context::hbar(int k) const {
    Monomial m;
    m.hbar = uint32_t(k);
    return ScalarExpr(shared_from_this(), Poly::monomial(m, Coeff(1)));
}

ScalarExpr Context::var(Generator g) const { return ScalarExpr(shared_from_this(), Poly::atom(atom::var(g))); }
ScalarExpr Context::x(int i) const { return var(gen::x(i)); }

ScalarExpr Context::G(const std::vector<int>& derivs) const {
    for (int d : derivs)
        if (d < 1 || d > N_) throw Error(ErrorKind::ValidationError, "derivative label outside 1..N");
    if (mode_ == GMode::Formal) return ScalarExpr(shared_from_this(), Poly::atom(atom::func(0, derivs)));
    return ScalarExpr(shared_from_this(), bound_derivative(derivs));
}

ScalarExpr Context::calG() const {
    ScalarExpr s = zero();
    for (int k = 1; k <= N_; ++k) s += G({k}) * G({k});
    return s;
}

ScalarExpr Context::calG_inv() const {
    if (q_const_) return num(1 / q_const_value_);
    return ScalarExpr(shared_from_this(), Poly::atom(atom::kGinv));
}

ScalarExpr Context::nu(int i) const { return -(calG_inv() * G({i})); }
ScalarExpr Context::mu2(int i, int k, int l) const { return -(calG_inv() * G({i}) * G({k, l})); }
ScalarExpr Context::mu3(int k, int l) const { return -(calG_inv() * G({k, l})); }
ScalarExpr Context::P(int i, int j) const {
    ScalarExpr d = i == j ? one() : zero();
    return d - calG_inv() * G({i}) * G({j});
}

// ---------------------------------------------------------------- expressions

ScalarExpr::ScalarExpr(CtxPtr ctx, Poly p) : ctx_(std::move(ctx)) {
    num_ = ctx_ ? ctx_->normal_form(std::move(p)) : std::move(p);
}

ScalarExpr ScalarExpr::raw(CtxPtr ctx, Poly p) {
    ScalarExpr e;
    e.ctx_ = std::move(ctx);
    e.num_ = std::move(p);
    return e;
}

Coeff ScalarExpr::constant_value() const { return num_.constant_value(); }

int ScalarExpr::max_hbar() const {
    int m = -1;
    for (const auto& t : num_.terms) m = std::max(m, int(t.m.hbar));
    return m;
}

int ScalarExpr::min_hbar() const {
    int m = 1 << 30;
    for (const auto& t : num_.terms) m = std::min(m, int(t.m.hbar));
    return num_.empty() ? -1 : m;
}

ScalarExpr ScalarExpr::operator-() const { return raw(ctx_, -num_); }

ScalarExpr& ScalarExpr::operator+=(const ScalarExpr& o) {
    if (!ctx_) ctx_ = o.ctx_;
    num_ = num_ + o.num_;
    return *this;
}

ScalarExpr& ScalarExpr::operator-=(const ScalarExpr& o) {
    if (!ctx_) ctx_ = o.ctx_;
    num_ = num_ - o.num_;
    return *this;
}

ScalarExpr& ScalarExpr::operator*=(const ScalarExpr& o) {
    if (!ctx_) ctx_ = o.ctx_;
    int order = ctx_ ? ctx_->order() : (1 << 20);
    *this = mul(*this, o, order);
    return *this;
}

bool operator==(const ScalarExpr& a, const ScalarExpr& b) { return a.num_ == b.num_; }

ScalarExpr mul(const ScalarExpr& a, const ScalarExpr& b, int order) {
    CtxPtr c = a.ctx_ ? a.ctx_ : b.ctx_;
    uint64_t drops = 0;
    Poly p = Poly::mul(a.num_, b.num_, order, &drops);
    if (c && drops) c->record_drops(drops);
    bool need_nf = a.num_.size() > 0 && b.num_.size() > 0 && !a.num_.is_constant() && !b.num_.is_constant();
    if (c && need_nf) return ScalarExpr(c, std::move(p));
    return ScalarExpr::raw(c, std::move(p));
}

ScalarExpr pow(const ScalarExpr& a, int e) {
    ScalarExpr r = a.ctx() ? a.ctx()->one() : ScalarExpr();
    for (int k = 0; k < e; ++k) r *= a;
    return r;
}

ScalarExpr ScalarExpr::scaled(const Coeff& c) const { return raw(ctx_, num_.scaled(c)); }

ScalarExpr ScalarExpr::truncated(int order) const {
    uint64_t d = 0;
    ScalarExpr r = raw(ctx_, num_.truncated(order, &d));
    if (ctx_ && d) ctx_->record_drops(d);
    return r;
}

ScalarExpr ScalarExpr::hbar_shifted(int d) const { return raw(ctx_, num_.hbar_shifted(d)); }

ScalarExpr ScalarExpr::hbar_part(int k) const {
    Poly r;
    for (const auto& t : num_.terms)
        if (int(t.m.hbar) == k) {
            Term nt = t;
            nt.m.hbar = 0;
            r.terms.push_back(std::move(nt));
        }
    return raw(ctx_, std::move(r));
}

bool ScalarExpr::depends_on(Generator g) const {
    AtomKey a = atom::var(g);
    for (const auto& t : num_.terms)
        if (t.m.exponent(a)) return true;
    return false;
}

bool ScalarExpr::has_function_atoms() const {
    for (const auto& t : num_.terms)
        for (const auto& fa : t.m.f)
            if (atom::is_func(fa.atom)) return true;
    return false;
}

static std::string atom_str(AtomKey a) {
    if (a == atom::kGinv) return "Ginv";
    if (atom::is_var(a)) return atom::var_gen(a).name();
    std::string s = atom::func_id(a) == 0 ? "G" : "F" + std::to_string(atom::func_id(a));
    auto d = atom::deriv_list(a);
    if (!d.empty()) {
        s += "_";
        for (int k : d) s += char('0' + k);
    }
    return s;
}

static std::string monomial_str(const Monomial& m) {
    std::string s;
    auto add = [&](const std::string& f) {
        if (!s.empty()) s += "*";
        s += f;
    };
    // ascending atom order reads naturally: x before momenta before G atoms
    for (auto it = m.f.rbegin(); it != m.f.rend(); ++it) {
        std::string f = atom_str(it->atom);
        if (it->exp > 1) f += "^" + std::to_string(it->exp);
        add(f);
    }
    if (m.hbar == 1) add("hbar");
    else if (m.hbar > 1) add("hbar^" + std::to_string(m.hbar));
    return s;
}

std::string render_poly(const Poly& p) {
    if (p.empty()) return "0";
    std::string out;
    bool first = true;
    for (const auto& t : p.terms) {
        std::string ms = monomial_str(t.m);
        Coeff c = t.c;
        bool neg = false;
        if (c.is_real() && sgn(c.re) < 0) {
            neg = true;
            c = -c;
        } else if (sgn(c.re) == 0 && sgn(c.im) < 0) {
            neg = true;
            c = -c;
        }
        std::string cs;
        if (ms.empty()) cs = c.str();
        else if (c.is_one()) cs = ms;
        else cs = c.str() + "*" + ms;
        if (first) out += neg ? "-" + cs : cs;
        else out += neg ? " - " + cs : " + " + cs;
        first = false;
    }
    return out;
}

std::string ScalarExpr::str() const { return render_poly(num_); }

size_t ScalarExpr::hash() const { return num_.hash(); }

// ---------------------------------------------------------------- calculus

static Poly dq(const Context& c, int i) {
    if (c.mode() == GMode::Formal) {
        Poly s;
        for (int k = 1; k <= c.N(); ++k) {
            Poly t = Poly::mul(Poly::atom(atom::func(0, {k})), Poly::atom(atom::func(0, {k, i})), 1 << 20);
            s = s + t.scaled(Coeff(2));
        }
        return s;
    }
    return c.q().partial_atom(atom::var(gen::x(i)));
}

// Derivative of a single atom with respect to x_i.
static Poly atom_dx(const Context& c, AtomKey a, int i) {
    if (atom::is_var(a)) {
        Generator g = atom::var_gen(a);
        return (g.kind == GenKind::X && g.index == i) ? Poly::constant(Coeff(1)) : Poly{};
    }
    if (a == atom::kGinv) {
        return Poly::mul(Poly::atom(atom::kGinv, 2), dq(c, i), 1 << 20).scaled(Coeff(-1));
    }
    return Poly::atom(atom::add_deriv(a, i));
}

ScalarExpr differentiate(const ScalarExpr& e, int i) {
    if (!e.ctx_ || e.is_zero()) return e;
    const Context& c = *e.ctx_;
    if (i < 1 || i > c.N()) throw Error(ErrorKind::ValidationError, "differentiation index outside 1..N");
    std::vector<Term> v;
    for (const auto& t : e.num_.terms) {
        for (size_t k = 0; k < t.m.f.size(); ++k) {
            Poly da = atom_dx(c, t.m.f[k].atom, i);
            if (da.empty()) continue;
            Monomial rest = t.m;
            Coeff cc = t.c * Coeff(long(rest.f[k].exp));
            if (--rest.f[k].exp == 0) rest.f.erase(rest.f.begin() + k);
            for (const auto& dt : da.terms) v.push_back({rest * dt.m, cc * dt.c});
        }
    }
    return ScalarExpr(e.ctx_, from_terms(std::move(v)));
}

ScalarExpr diff_var(const ScalarExpr& e, Generator g) {
    if (g.kind == GenKind::X) return differentiate(e, g.index);
    return ScalarExpr::raw(e.ctx_, e.num_.partial_atom(atom::var(g)));
}

ScalarExpr substitute(const ScalarExpr& e, const CtxPtr& target) {
    Poly out;
    for (const auto& t : e.poly().terms) {
        Poly term = Poly::monomial(Monomial{{}, t.m.hbar}, t.c);
        for (const auto& fa : t.m.f) {
            Poly base;
            if (atom::is_var(fa.atom)) base = Poly::atom(fa.atom);
            else if (fa.atom == atom::kGinv) base = target->calG_inv().poly();
            else if (atom::func_id(fa.atom) == 0) {
                if (target->mode() != GMode::Bound) throw Error(ErrorKind::UnboundAtom, "no binding for G");
                base = target->bound_derivative(atom::deriv_list(fa.atom));
            } else {
                throw Error(ErrorKind::UnboundAtom, "no binding for " + atom_str(fa.atom));
            }
            term = Poly::mul(term, poly_pow(base, int(fa.exp)), 1 << 20);
        }
        out = out + term;
    }
    return ScalarExpr(target, std::move(out));
}

ScalarExpr substitute_vars(const ScalarExpr& e, const std::map<Generator, ScalarExpr>& sub) {
    const CtxPtr& c = e.ctx();
    int order = c ? c->order() : (1 << 20);
    // group terms by their substituted factors
    std::map<std::vector<Factor>, std::vector<Term>, bool (*)(const std::vector<Factor>&, const std::vector<Factor>&)> groups(
        [](const std::vector<Factor>& a, const std::vector<Factor>& b) {
            if (a.size() != b.size()) return a.size() < b.size();
            for (size_t k = 0; k < a.size(); ++k) {
                if (a[k].atom != b[k].atom) return a[k].atom < b[k].atom;
                if (a[k].exp != b[k].exp) return a[k].exp < b[k].exp;
            }
            return false;
        });
    for (const auto& t : e.poly().terms) {
        bool touches_x = false, has_func = false;
        std::vector<Factor> key;
        Term rest{Monomial{{}, t.m.hbar}, t.c};
        for (const auto& fa : t.m.f) {
            if (atom::is_func(fa.atom)) has_func = true;
            bool hit = atom::is_var(fa.atom) && sub.count(atom::var_gen(fa.atom));
            if (hit && atom::var_gen(fa.atom).kind == GenKind::X) touches_x = true;
            if (hit)
                key.push_back(fa);
            else
                rest.m.f.push_back(fa);
        }
        if (touches_x && has_func) throw Error(ErrorKind::Unsupported, "substituting x under function atoms");
        groups[key].push_back(std::move(rest));
    }
    ScalarExpr out = c ? c->zero() : ScalarExpr();
    std::map<AtomKey, std::vector<ScalarExpr>> powers;
    for (auto& [key, terms] : groups) {
        ScalarExpr part(c, from_terms(std::move(terms)));
        for (const auto& fa : key) {
            auto& pw = powers[fa.atom];
            if (pw.empty()) pw.push_back(c ? c->one() : ScalarExpr());
            while (pw.size() <= fa.exp) pw.push_back(mul(pw.back(), sub.at(atom::var_gen(fa.atom)), order));
            part = mul(part, pw[fa.exp], order);
        }
        out += part;
    }
    return out;
}

Coeff eval_numeric(const ScalarExpr& e, const std::map<Generator, Rational>& point, const Rational& hbar) {
    auto var_value = [&](Generator g) -> Rational {
        auto it = point.find(g);
        if (it == point.end()) throw Error(ErrorKind::UnboundAtom, "no value for " + g.name());
        return it->second;
    };
    std::optional<Rational> ginv;
    auto ginv_value = [&]() -> Rational {
        if (ginv) return *ginv;
        const Context& c = *e.ctx();
        if (c.mode() != GMode::Bound) throw Error(ErrorKind::UnboundAtom, "Ginv in formal mode");
        ScalarExpr q(e.ctx(), c.q());
        Coeff qv = eval_numeric(q, point, hbar);
        if (qv.is_zero()) throw Error(ErrorKind::DivisionByZero, "gradient norm vanishes at point");
        ginv = qv.inverse().re;
        return *ginv;
    };
    Coeff sum;
    for (const auto& t : e.poly().terms) {
        Rational v = 1;
        for (uint32_t k = 0; k < t.m.hbar; ++k) v *= hbar;
        for (const auto& fa : t.m.f) {
            Rational b;
            if (atom::is_var(fa.atom)) b = var_value(atom::var_gen(fa.atom));
            else if (fa.atom == atom::kGinv) b = ginv_value();
            else throw Error(ErrorKind::UnboundAtom, "function atom " + atom_str(fa.atom) + " is unbound");
            for (uint32_t k = 0; k < fa.exp; ++k) v *= b;
        }
        sum += t.c * Coeff(v);
    }
    return sum;
}

}  // namespace pomq
