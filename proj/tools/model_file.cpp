#include "cli.hpp"

#include <cctype>
#include <map>
#include <sstream>

namespace pomq::cli {

namespace {

std::string where(int line, int col) { return "line " + std::to_string(line) + ", column " + std::to_string(col); }

class ExprParser {
public:
    ExprParser(const std::string& s, CtxPtr ctx, int line, int col0) : s_(s), ctx_(std::move(ctx)), line_(line), col0_(col0) {}

    ScalarExpr parse() {
        ScalarExpr e = sum();
        skip();
        if (p_ < s_.size()) fail("unexpected '" + std::string(1, s_[p_]) + "'");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw Error(ErrorKind::ParseError, where(line_, col0_ + int(p_)) + ": " + msg);
    }
    void skip() {
        while (p_ < s_.size() && std::isspace((unsigned char)s_[p_])) ++p_;
    }
    bool eat(char c) {
        skip();
        if (p_ < s_.size() && s_[p_] == c) {
            ++p_;
            return true;
        }
        return false;
    }
    std::string integer() {
        skip();
        size_t b = p_;
        while (p_ < s_.size() && std::isdigit((unsigned char)s_[p_])) ++p_;
        if (b == p_) fail("expected an integer");
        return s_.substr(b, p_ - b);
    }

    ScalarExpr sum() {
        skip();
        ScalarExpr e = ctx_->zero();
        bool neg = eat('-');
        if (!neg) eat('+');
        ScalarExpr t = product();
        e = neg ? -t : t;
        for (;;) {
            if (eat('+')) e += product();
            else if (eat('-')) e -= product();
            else return e;
        }
    }
    ScalarExpr product() {
        ScalarExpr e = factor();
        for (;;) {
            if (eat('*')) e *= factor();
            else if (eat('/')) {
                Rational d(integer());
                if (sgn(d) == 0) fail("division by zero");
                e = e.scaled(Coeff(Rational(1) / d));
            } else
                return e;
        }
    }
    ScalarExpr factor() {
        if (eat('-')) return -factor();
        ScalarExpr b = primary();
        if (eat('^')) {
            std::string k = integer();
            if (k.size() > 3) fail("exponent too large");
            ScalarExpr r = ctx_->one();
            for (int i = std::stoi(k); i > 0; --i) r *= b;
            return r;
        }
        return b;
    }
    ScalarExpr primary() {
        skip();
        if (p_ >= s_.size()) fail("unexpected end of expression");
        char c = s_[p_];
        if (c == '(') {
            ++p_;
            ScalarExpr e = sum();
            if (!eat(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit((unsigned char)c)) {
            std::string n = integer();
            if (p_ < s_.size() && (s_[p_] == '.' || s_[p_] == 'e' || s_[p_] == 'E')) fail("only rational literals are accepted");
            return ctx_->num(Rational(n));
        }
        if (std::isalpha((unsigned char)c)) {
            size_t b = p_;
            while (p_ < s_.size() && (std::isalnum((unsigned char)s_[p_]) || s_[p_] == '_')) ++p_;
            std::string id = s_.substr(b, p_ - b);
            ScalarExpr r = ident(id);
            return r;
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }
    ScalarExpr ident(const std::string& id) {
        if (id == "I") return ctx_->i();
        if (id == "hbar") return ctx_->hbar();
        if (id == "Ginv") return ctx_->calG_inv();
        if (id == "G" || id.rfind("G_", 0) == 0) {
            std::vector<int> d;
            for (size_t k = 2; k < id.size(); ++k) {
                int i = id[k] - '0';
                if (i < 1 || i > ctx_->N()) fail("bad derivative index in '" + id + "'");
                d.push_back(i);
            }
            if (id.size() == 2) fail("bad symbol '" + id + "'");
            return ctx_->G(d);
        }
        auto g = generator_from_name(id);
        if (!g) fail("unknown symbol '" + id + "'");
        if ((g->kind == GenKind::X || g->kind == GenKind::PX || g->kind == GenKind::V || g->kind == GenKind::PV ||
             g->kind == GenKind::U || g->kind == GenKind::PU) &&
            g->index > ctx_->N())
            fail("index of '" + id + "' exceeds N");
        return ctx_->var(*g);
    }

    const std::string& s_;
    CtxPtr ctx_;
    int line_, col0_;
    size_t p_ = 0;
};

Poly surface_at(const std::string& text, int N, int line, int col) {
    auto ctx = Context::formal(N, 0);
    ScalarExpr e = ExprParser(text, ctx, line, col).parse();
    bool has_x = false;
    for (const auto& t : e.poly().terms) {
        if (t.m.hbar) throw Error(ErrorKind::ValidationError, where(line, col) + ": the surface may not contain hbar");
        if (!t.c.is_real()) throw Error(ErrorKind::ValidationError, where(line, col) + ": the surface must be real");
        for (const auto& f : t.m.f) {
            if (!atom::is_var(f.atom) || atom::var_gen(f.atom).kind != GenKind::X)
                throw Error(ErrorKind::ValidationError, where(line, col) + ": the surface may only use x_1..x_N");
            has_x = true;
        }
    }
    if (!has_x) throw Error(ErrorKind::ValidationError, where(line, col) + ": the surface is constant");
    return e.poly();
}

Rational rational_at(const std::string& v, int line, int col) {
    size_t k = 0;
    if (k < v.size() && (v[k] == '-' || v[k] == '+')) ++k;
    size_t d = k;
    while (k < v.size() && std::isdigit((unsigned char)v[k])) ++k;
    bool ok = k > d;
    if (ok && k < v.size() && v[k] == '/') {
        size_t e = ++k;
        while (k < v.size() && std::isdigit((unsigned char)v[k])) ++k;
        ok = k > e;
    }
    if (!ok || k != v.size())
        throw Error(ErrorKind::ParseError, where(line, col + int(ok ? k : d)) + ": expected a rational p/q");
    std::string t = v[0] == '+' ? v.substr(1) : v;
    Rational r(t);
    if (sgn(r.get_den()) == 0) throw Error(ErrorKind::ParseError, where(line, col) + ": zero denominator");
    r.canonicalize();
    return r;
}

int integer_at(const std::string& v, int line, int col) {
    size_t k = 0;
    if (k < v.size() && v[k] == '-') ++k;
    size_t d = k;
    while (k < v.size() && std::isdigit((unsigned char)v[k])) ++k;
    if (k == d || k != v.size() || k - d > 6) throw Error(ErrorKind::ParseError, where(line, col + int(k)) + ": expected an integer");
    return std::stoi(v);
}

std::string trim(const std::string& s, size_t& lead) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        lead = s.size();
        return "";
    }
    size_t e = s.find_last_not_of(" \t\r");
    lead = b;
    return s.substr(b, e - b + 1);
}

}  // namespace

ScalarExpr parse_scalar(const std::string& text, const CtxPtr& ctx) { return ExprParser(text, ctx, 1, 1).parse(); }

Poly parse_surface(const std::string& text, int N) { return surface_at(text, N, 1, 1); }

ModelFile parse_model(const std::string& text) {
    struct Value {
        std::string text;
        int line, col;
    };
    std::map<std::string, Value> kv;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw.substr(0, raw.find('#'));
        size_t lead;
        if (trim(s, lead).empty()) continue;
        size_t eq = s.find('=');
        if (eq == std::string::npos) throw Error(ErrorKind::ParseError, where(line, int(lead) + 1) + ": expected key = value");
        size_t kl;
        std::string key = trim(s.substr(0, eq), kl);
        if (key.empty()) throw Error(ErrorKind::ParseError, where(line, int(lead) + 1) + ": missing key");
        if (key == "dimension") key = "N";
        static const char* keys[] = {"N", "surface", "theta", "eta", "order", "checks"};
        if (std::find(std::begin(keys), std::end(keys), key) == std::end(keys))
            throw Error(ErrorKind::ParseError, where(line, int(kl) + 1) + ": unknown key '" + key + "'");
        if (kv.count(key)) throw Error(ErrorKind::ParseError, where(line, int(kl) + 1) + ": duplicate key '" + key + "'");
        size_t vl;
        std::string val = trim(s.substr(eq + 1), vl);
        int col = int(eq + 1 + vl) + 1;
        if (val.empty()) throw Error(ErrorKind::ParseError, where(line, col) + ": missing value for '" + key + "'");
        kv[key] = {val, line, col};
    }

    ModelFile mf;
    if (!kv.count("N")) throw Error(ErrorKind::ParseError, where(line + 1, 1) + ": missing key 'N'");
    const Value& n = kv["N"];
    mf.spec.N = integer_at(n.text, n.line, n.col);
    if (mf.spec.N < 2 || mf.spec.N > atom::kMaxDims)
        throw Error(ErrorKind::ValidationError, where(n.line, n.col) + ": N must lie in [2, 9]");
    if (kv.count("order")) {
        const Value& o = kv["order"];
        mf.spec.truncation = integer_at(o.text, o.line, o.col);
    }
    if (kv.count("theta")) mf.spec.theta = rational_at(kv["theta"].text, kv["theta"].line, kv["theta"].col);
    if (kv.count("eta")) mf.spec.eta = rational_at(kv["eta"].text, kv["eta"].line, kv["eta"].col);
    if (kv.count("surface") && kv["surface"].text != "formal") {
        const Value& v = kv["surface"];
        mf.spec.G = surface_at(v.text, mf.spec.N, v.line, v.col);
    }
    if (kv.count("checks")) {
        const Value& c = kv["checks"];
        std::string item;
        std::istringstream cs(c.text);
        while (std::getline(cs, item, ',')) {
            size_t l;
            std::string t = trim(item, l);
            if (t.empty()) throw Error(ErrorKind::ParseError, where(c.line, c.col) + ": empty suite name");
            mf.checks.push_back(t);
        }
    }
    mf.spec.validate();
    return mf;
}

}  // namespace pomq::cli
