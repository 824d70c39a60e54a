#include "pomq/operator.hpp"

#include <algorithm>

namespace pomq {

std::string word_str(const Word& w) {
    std::string s = "[";
    for (size_t k = 0; k < w.size(); ++k) {
        if (k) s += " ";
        s += w[k].name();
    }
    return s + "]";
}

bool is_ordered(const Word& w) {
    for (size_t k = 1; k < w.size(); ++k)
        if (w[k - 1] > w[k]) return false;
    return true;
}

static bool has_x_dependence(const ScalarExpr& c) {
    for (const auto& t : c.poly().terms)
        for (const auto& fa : t.m.f) {
            if (atom::is_func(fa.atom)) return true;
            if (atom::var_gen(fa.atom).kind == GenKind::X) return true;
        }
    return false;
}

static ScalarExpr conj_scalar(const ScalarExpr& c) {
    Poly p = c.poly();
    for (auto& t : p.terms) t.c = t.c.conj();
    return ScalarExpr(c.ctx(), std::move(p));
}

// ---------------------------------------------------------------- OperatorExpr

OperatorExpr::OperatorExpr(const ScalarExpr& c) : ctx_(c.ctx()) {
    if (!c.is_zero()) terms_.emplace(Word{}, c);
}

OperatorExpr OperatorExpr::term(const ScalarExpr& c, const Word& w) {
    OperatorExpr o(c.ctx());
    if (!c.is_zero()) o.terms_.emplace(w, c);
    return o;
}

bool OperatorExpr::is_scalar() const { return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.empty()); }

ScalarExpr OperatorExpr::scalar_part() const { return coeff(Word{}); }

ScalarExpr OperatorExpr::coeff(const Word& w) const {
    auto it = terms_.find(w);
    if (it != terms_.end()) return it->second;
    return ctx_ ? ctx_->zero() : ScalarExpr();
}

int OperatorExpr::max_hbar() const {
    int m = -1;
    for (const auto& [w, c] : terms_) m = std::max(m, c.max_hbar());
    return m;
}

int OperatorExpr::min_hbar() const {
    int m = 1 << 30;
    for (const auto& [w, c] : terms_) m = std::min(m, c.min_hbar());
    return terms_.empty() ? -1 : m;
}

size_t OperatorExpr::max_word_length() const {
    size_t m = 0;
    for (const auto& [w, c] : terms_) m = std::max(m, w.size());
    return m;
}

bool OperatorExpr::mentions(Generator g) const {
    for (const auto& [w, c] : terms_) {
        if (std::find(w.begin(), w.end(), g) != w.end()) return true;
        if (c.depends_on(g)) return true;
    }
    return false;
}

void OperatorExpr::add(const Word& w, const ScalarExpr& c) {
    if (c.is_zero()) return;
    if (!ctx_) ctx_ = c.ctx();
    auto it = terms_.find(w);
    if (it == terms_.end()) {
        terms_.emplace(w, c);
        return;
    }
    it->second += c;
    if (it->second.is_zero()) terms_.erase(it);
}

OperatorExpr OperatorExpr::operator-() const {
    OperatorExpr r = *this;
    for (auto& [w, c] : r.terms_) c = -c;
    return r;
}

OperatorExpr& OperatorExpr::operator+=(const OperatorExpr& o) {
    if (!ctx_) ctx_ = o.ctx_;
    for (const auto& [w, c] : o.terms_) add(w, c);
    return *this;
}

OperatorExpr& OperatorExpr::operator-=(const OperatorExpr& o) {
    if (!ctx_) ctx_ = o.ctx_;
    for (const auto& [w, c] : o.terms_) add(w, -c);
    return *this;
}

bool operator==(const OperatorExpr& a, const OperatorExpr& b) {
    if (a.terms_.size() != b.terms_.size()) return false;
    auto i = a.terms_.begin();
    auto j = b.terms_.begin();
    for (; i != a.terms_.end(); ++i, ++j)
        if (i->first != j->first || i->second != j->second) return false;
    return true;
}

OperatorExpr OperatorExpr::scaled(const Coeff& c) const {
    if (c.is_zero()) return OperatorExpr(ctx_);
    OperatorExpr r = *this;
    for (auto& [w, e] : r.terms_) e = e.scaled(c);
    return r;
}

OperatorExpr OperatorExpr::left_scaled(const ScalarExpr& c, int order) const {
    OperatorExpr r(ctx_ ? ctx_ : c.ctx());
    for (const auto& [w, e] : terms_) r.add(w, mul(c, e, order));
    return r;
}

OperatorExpr OperatorExpr::truncated(int order) const {
    OperatorExpr r(ctx_);
    for (const auto& [w, e] : terms_) r.add(w, e.truncated(order));
    return r;
}

OperatorExpr OperatorExpr::hbar_shifted(int d) const {
    OperatorExpr r(ctx_);
    for (const auto& [w, e] : terms_) r.add(w, e.hbar_shifted(d));
    return r;
}

OperatorExpr OperatorExpr::hbar_part(int k) const {
    OperatorExpr r(ctx_);
    for (const auto& [w, e] : terms_) r.add(w, e.hbar_part(k));
    return r;
}

OperatorExpr OperatorExpr::map_coeffs(const std::function<ScalarExpr(const ScalarExpr&)>& f) const {
    OperatorExpr r(ctx_);
    for (const auto& [w, e] : terms_) r.add(w, f(e));
    return r;
}

std::string OperatorExpr::str() const {
    if (terms_.empty()) return "0";
    std::string s;
    bool first = true;
    for (const auto& [w, c] : terms_) {
        if (!first) s += " + ";
        first = false;
        if (w.empty()) {
            s += "(" + c.str() + ")";
        } else if (c.poly().is_constant() && c.constant_value().is_one()) {
            s += word_str(w);
        } else {
            s += "(" + c.str() + ")*" + word_str(w);
        }
    }
    return s;
}

// ---------------------------------------------------------------- AlgebraTable

AlgebraTable::AlgebraTable(const AlgebraTable& o)
    : ctx_(o.ctx_), gens_(o.gens_), table_(o.table_), x_in_words_(o.x_in_words_) {}

AlgebraTable& AlgebraTable::operator=(const AlgebraTable& o) {
    if (this == &o) return *this;
    ctx_ = o.ctx_;
    gens_ = o.gens_;
    table_ = o.table_;
    x_in_words_ = o.x_in_words_;
    std::lock_guard<std::mutex> lock(cache_mutex_);
    order_cache_.clear();
    return *this;
}

void AlgebraTable::add_generator(Generator g) {
    if (!has(g)) gens_.push_back(g);
}

void AlgebraTable::add_generators(const std::vector<Generator>& gs) {
    for (auto g : gs) add_generator(g);
}

bool AlgebraTable::has(Generator g) const { return std::find(gens_.begin(), gens_.end(), g) != gens_.end(); }

void AlgebraTable::require(Generator g) const {
    if (!has(g)) throw Error(ErrorKind::UnknownGenerator, "generator " + g.name() + " is not registered");
}

void AlgebraTable::set(Generator a, Generator b, const OperatorExpr& value) {
    require(a);
    require(b);
    if (a == b) throw Error(ErrorKind::InvalidSpec, "self-commutator entry");
    if (a.kind == GenKind::X && b.kind == GenKind::X && !value.is_zero()) x_in_words_ = true;
    if (!x_in_words_ && (a.kind == GenKind::X || b.kind == GenKind::X) && !value.is_scalar())
        throw Error(ErrorKind::InvalidSpec, "position commutators must be functions of x");
    auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
    if (value.is_zero()) table_.erase(key);
    else table_[key] = a < b ? value : -value;
    std::lock_guard<std::mutex> lock(cache_mutex_);
    order_cache_.clear();
}

OperatorExpr AlgebraTable::get(Generator a, Generator b) const {
    if (a == b) return OperatorExpr(ctx_);
    auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
    auto it = table_.find(key);
    if (it == table_.end()) {
        if (a.kind != GenKind::X) require(a);
        if (b.kind != GenKind::X) require(b);
        return OperatorExpr(ctx_);
    }
    return a < b ? it->second : -it->second;
}

OperatorExpr AlgebraTable::op(Generator g) const {
    if (g.kind == GenKind::X && !x_in_words_) return OperatorExpr(ctx_->x(g.index));
    require(g);
    return OperatorExpr::term(ctx_->one(), Word{g});
}

AlgebraTable AlgebraTable::canonical(const CtxPtr& ctx, const std::vector<std::pair<Generator, Generator>>& pairs) {
    AlgebraTable t(ctx);
    for (const auto& [q, p] : pairs) {
        t.add_generator(q);
        t.add_generator(p);
    }
    for (const auto& [q, p] : pairs) t.set(q, p, OperatorExpr(ctx->one()));
    return t;
}

static Word concat(const Word& a, const Word& b) {
    Word w = a;
    w.insert(w.end(), b.begin(), b.end());
    return w;
}

// w * c with c a coefficient function.
static OperatorExpr move_left(const Word& w, const ScalarExpr& c, const AlgebraTable& alg, int order) {
    if (c.is_zero()) return OperatorExpr(alg.ctx());
    if (w.empty() || !has_x_dependence(c)) return OperatorExpr::term(c, w);
    if (alg.x_in_words()) throw Error(ErrorKind::Unsupported, "x-dependent coefficient in noncommutative position algebra");
    const Context& ctx = *alg.ctx();
    Generator g = w.back();
    Word head(w.begin(), w.end() - 1);
    // g c = c g - i hbar T(x_k, g) d_k c
    ScalarExpr d = ctx.zero();
    if (order >= 1) {
        for (int k = 1; k <= ctx.N(); ++k) {
            OperatorExpr t = alg.get(gen::x(k), g);
            if (t.is_zero()) continue;
            if (!t.is_scalar()) throw Error(ErrorKind::InvalidSpec, "position commutator is not a function");
            d += mul(t.scalar_part(), differentiate(c, k), order - 1);
        }
        d = d.hbar_shifted(1).scaled(Coeff(0, -1));
    } else {
        ctx.record_drops(1);
    }
    OperatorExpr out(alg.ctx());
    OperatorExpr moved = move_left(head, c, alg, order);
    for (const auto& [w2, c2] : moved.terms()) {
        Word ext = w2;
        ext.push_back(g);
        if (is_ordered(ext)) out.add(ext, c2);
        else out += alg.order_word(ext, order).left_scaled(c2, order);
    }
    out += move_left(head, d, alg, order);
    return out;
}

OperatorExpr AlgebraTable::order_word(const Word& w, int order) const {
    if (is_ordered(w)) return OperatorExpr::term(ctx_->one(), w);
    auto key = std::make_pair(order, w);
    {
        std::lock_guard<std::mutex> lock(cache_mutex_);
        auto it = order_cache_.find(key);
        if (it != order_cache_.end()) return it->second;
    }
    size_t i = 0;
    while (!(w[i] > w[i + 1])) ++i;
    Word swapped = w;
    std::swap(swapped[i], swapped[i + 1]);
    OperatorExpr out = order_word(swapped, order);
    OperatorExpr t = get(w[i], w[i + 1]);
    if (!t.is_zero()) {
        if (order >= 1) {
            Word a(w.begin(), w.begin() + i);
            Word b(w.begin() + i + 2, w.end());
            OperatorExpr m = multiply(OperatorExpr::term(ctx_->one(), a), t, *this, order - 1);
            if (!b.empty()) m = multiply(m, order_word(b, order - 1), *this, order - 1);
            out += m.hbar_shifted(1).scaled(Coeff::i());
        } else {
            ctx_->record_drops(1);
        }
    }
    std::lock_guard<std::mutex> lock(cache_mutex_);
    order_cache_.emplace(key, out);
    return out;
}

// ---------------------------------------------------------------- products

OperatorExpr multiply(const OperatorExpr& a, const OperatorExpr& b, const AlgebraTable& alg, int order) {
    OperatorExpr out(alg.ctx());
    for (const auto& [wa, ca] : a.terms()) {
        for (const auto& [wb, cb] : b.terms()) {
            OperatorExpr moved = move_left(wa, cb, alg, order);
            for (const auto& [wm, cm] : moved.terms()) {
                ScalarExpr c = mul(ca, cm, order);
                if (c.is_zero()) continue;
                Word w = concat(wm, wb);
                if (is_ordered(w)) out.add(w, c);
                else out += alg.order_word(w, order).left_scaled(c, order);
            }
        }
    }
    return out;
}

OperatorExpr multiply(const OperatorExpr& a, const OperatorExpr& b, const AlgebraTable& alg) {
    return multiply(a, b, alg, alg.ctx()->order());
}

OperatorExpr power(const OperatorExpr& a, int e, const AlgebraTable& alg) {
    OperatorExpr r(alg.ctx()->one());
    for (int k = 0; k < e; ++k) r = multiply(r, a, alg);
    return r;
}

OperatorExpr commutator(const OperatorExpr& a, const OperatorExpr& b, const AlgebraTable& alg) {
    return multiply(a, b, alg) - multiply(b, a, alg);
}

OperatorExpr commutator_over_ihbar(const OperatorExpr& a, const OperatorExpr& b, const AlgebraTable& alg, int order) {
    OperatorExpr c = multiply(a, b, alg, order + 1) - multiply(b, a, alg, order + 1);
    return c.hbar_shifted(-1).scaled(Coeff(0, -1));
}

OperatorExpr symmetrized(const OperatorExpr& a, const OperatorExpr& b, const AlgebraTable& alg, int order) {
    return (multiply(a, b, alg, order) + multiply(b, a, alg, order)).scaled(Coeff::frac(1, 2));
}

OperatorExpr symmetrized(const OperatorExpr& a, const OperatorExpr& b, const AlgebraTable& alg) {
    return symmetrized(a, b, alg, alg.ctx()->order());
}

OperatorExpr normal_order(const std::vector<std::pair<ScalarExpr, Word>>& raw, const AlgebraTable& alg) {
    OperatorExpr out(alg.ctx());
    for (const auto& [c, w] : raw) {
        OperatorExpr t(c);
        for (auto g : w) t = multiply(t, alg.op(g), alg);
        out += t;
    }
    return out;
}

OperatorExpr adjoint(const OperatorExpr& a, const AlgebraTable& alg) {
    OperatorExpr out(alg.ctx());
    for (const auto& [w, c] : a.terms()) {
        OperatorExpr t(alg.ctx()->one());
        for (auto it = w.rbegin(); it != w.rend(); ++it) t = multiply(t, alg.op(*it), alg);
        out += multiply(t, OperatorExpr(conj_scalar(c)), alg);
    }
    return out;
}

bool is_hermitian(const OperatorExpr& a, const AlgebraTable& alg) { return adjoint(a, alg) == a; }

bool check_jacobi(const AlgebraTable& alg, Generator a, Generator b, Generator c) {
    OperatorExpr A = alg.op(a), B = alg.op(b), C = alg.op(c);
    int ord = alg.ctx()->order();
    auto br = [&](const OperatorExpr& x, const OperatorExpr& y) { return commutator_over_ihbar(x, y, alg, ord); };
    OperatorExpr j = br(br(A, B), C) + br(br(B, C), A) + br(br(C, A), B);
    return j.is_zero();
}

OperatorExpr substitute_generators(const OperatorExpr& o, const std::map<Generator, OperatorExpr>& images,
                                   const AlgebraTable& alg, int order) {
    bool maps_x = false;
    for (const auto& [g, img] : images)
        if (g.kind == GenKind::X) maps_x = true;
    OperatorExpr out(alg.ctx());
    for (const auto& [w, c] : o.terms()) {
        if (maps_x && has_x_dependence(c)) throw Error(ErrorKind::Unsupported, "coefficient depends on substituted x");
        OperatorExpr t(c);
        for (auto g : w) {
            auto it = images.find(g);
            t = multiply(t, it != images.end() ? it->second : alg.op(g), alg, order);
        }
        out += t;
    }
    return out;
}

}  // namespace pomq
