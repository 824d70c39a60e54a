#include "pomq/appendix.hpp"

#include <algorithm>

namespace pomq {

namespace {

Rational binom(int n, int k) {
    Rational r = 1;
    for (int t = 1; t <= k; ++t) r = r * (n - k + t) / t;
    return r;
}

Family zeros(const CtxPtr& ctx, int N) { return Family(N, std::vector<ScalarExpr>(N, ctx->zero())); }

ScalarExpr d(const ScalarExpr& f, int i) { return differentiate(f, i + 1); }

}  // namespace

ScalarExpr hbar_weight(const CtxPtr& ctx, int n) {
    Rational w = 1;
    for (int t = 1; t <= n; ++t) w /= 4 * t;
    return ctx->hbar(n).scaled(Coeff(w));
}

AppendixSeries::AppendixSeries(CtxPtr ctx, Reading reading) : ctx_(std::move(ctx)), N_(ctx_->N()), reading_(reading) {}

bool AppendixSeries::beyond(int k, const ScalarExpr& f) const { return f.is_zero() || k + f.min_hbar() > order(); }

bool AppendixSeries::beyond(int k, const Family& f) const {
    for (const auto& row : f)
        for (const auto& e : row)
            if (!beyond(k, e)) return false;
    return true;
}

ScalarExpr AppendixSeries::nu_d(const ScalarExpr& f, int times) const {
    ScalarExpr g = f;
    for (int t = 0; t < times && !g.is_zero(); ++t) {
        ScalarExpr h = ctx_->zero();
        for (int i = 0; i < N_; ++i) {
            ScalarExpr di = d(g, i);
            if (!di.is_zero()) h += ctx_->nu(i + 1) * di;
        }
        g = h;
    }
    return g;
}

ScalarExpr AppendixSeries::laplacian(const ScalarExpr& f, int times) const {
    ScalarExpr g = f;
    for (int t = 0; t < times && !g.is_zero(); ++t) {
        ScalarExpr h = ctx_->zero();
        for (int a = 0; a < N_; ++a) h += d(d(g, a), a);
        g = h;
    }
    return g;
}

const Family& AppendixSeries::V() {
    if (V_.empty()) {
        V_ = zeros(ctx_, N_);
        for (int i = 0; i < N_; ++i)
            for (int j = 0; j < N_; ++j) {
                ScalarExpr v = -ctx_->mu3(i + 1, j + 1);
                for (int k = 0; k < N_; ++k) v -= (ctx_->mu2(j + 1, i + 1, k + 1) * ctx_->nu(k + 1)).scaled(Coeff(2));
                V_[i][j] = v;
            }
    }
    return V_;
}

const Family& AppendixSeries::lambda(int n) {
    if (lambda_.empty()) {
        Family id = zeros(ctx_, N_);
        for (int i = 0; i < N_; ++i) id[i][i] = ctx_->one();
        lambda_.push_back(id);
    }
    while (int(lambda_.size()) <= n) {
        const Family& prev = lambda_.back();
        const Family& v = V();
        Family next = zeros(ctx_, N_);
        for (int i = 0; i < N_; ++i)
            for (int j = 0; j < N_; ++j) {
                ScalarExpr e = nu_d(prev[i][j]);
                for (int k = 0; k < N_; ++k) e += prev[i][k] * v[k][j];
                next[i][j] = e;
            }
        lambda_.push_back(std::move(next));
    }
    return lambda_[n];
}

const ScalarExpr& AppendixSeries::B(int m, int i, int j, int k, int l) {
    auto key = std::make_tuple(m, i, j, k, l);
    auto it = B_.find(key);
    if (it != B_.end()) return it->second;
    ScalarExpr s = ctx_->zero();
    for (int r = 0; r <= m; ++r) s += (lambda(r)[i][k] * lambda(m - r)[j][l]).scaled(Coeff(binom(m, r)));
    return B_.emplace(key, std::move(s)).first->second;
}

const Family& AppendixSeries::calB(int m) {
    auto it = calB_.find(m);
    if (it != calB_.end()) return it->second;
    Family out = zeros(ctx_, N_);
    for (int i = 0; i < N_; ++i)
        for (int j = 0; j < N_; ++j) {
            ScalarExpr s = ctx_->zero();
            for (int r = 0; r <= m; ++r) {
                const Family &A = lambda(r), &Bm = lambda(m - r);
                ScalarExpr part = ctx_->zero();
                for (int k = 0; k < N_; ++k)
                    for (int l = 0; l < N_; ++l) {
                        part += d(d(A[i][k] * Bm[j][l], k), l);
                        part += d(A[i][k], l) * d(Bm[j][l], k);
                    }
                s += part.scaled(Coeff(binom(m, r)));
            }
            out[i][j] = s;
        }
    return calB_.emplace(m, std::move(out)).first->second;
}

Family AppendixSeries::B_series() {
    Family out = zeros(ctx_, N_);
    for (int n = 1; n <= order(); ++n) {
        ScalarExpr w = hbar_weight(ctx_, n);
        for (int i = 0; i < N_; ++i)
            for (int j = 0; j < N_; ++j) {
                ScalarExpr s = ctx_->zero();
                for (int k = 0; k < N_; ++k) s += B(2 * n, k, k, i, j);
                out[i][j] += w * s;
            }
    }
    return out;
}

Family AppendixSeries::calB_series() {
    Family out = zeros(ctx_, N_);
    for (int n = 1; n <= order(); ++n) {
        ScalarExpr w = hbar_weight(ctx_, n);
        const Family& c = calB(2 * n);
        for (int i = 0; i < N_; ++i)
            for (int j = 0; j < N_; ++j) out[i][j] += w * c[i][j];
    }
    return out;
}

Family AppendixSeries::Uv() {
    Family out = zeros(ctx_, N_);
    if (order() < 2) return out;
    std::vector<ScalarExpr> tr(N_, ctx_->zero());
    for (int i = 0; i < N_; ++i)
        for (int k = 0; k < N_; ++k) tr[i] += ctx_->mu2(k + 1, i + 1, k + 1);
    for (int i = 0; i < N_; ++i)
        for (int j = 0; j < N_; ++j) {
            ScalarExpr s = (tr[i] * tr[j]).scaled(Coeff::frac(3, 4));
            for (int k = 0; k < N_; ++k) s += (ctx_->mu3(i + 1, k + 1) * ctx_->G({k + 1, j + 1})).scaled(Coeff::frac(1, 2));
            out[i][j] = ctx_->hbar(2) * s;
        }
    return out;
}

Family AppendixSeries::calA(int n) {
    Family out = zeros(ctx_, N_);
    ScalarExpr Gaa = ctx_->zero();
    for (int a = 0; a < N_; ++a) Gaa += ctx_->G({a + 1, a + 1});
    for (int k = 0; k < N_; ++k)
        for (int l = 0; l < N_; ++l) {
            ScalarExpr s = ctx_->zero();
            for (int m = 1; m <= n; ++m) {
                ScalarExpr base = laplacian(ctx_->mu3(k + 1, l + 1), m - 1);
                ScalarExpr inner = base * Gaa;
                for (int a = 0; a < N_; ++a) inner += (d(base, a) * ctx_->G({a + 1})).scaled(Coeff(2));
                s -= laplacian(inner, n - m);
            }
            out[k][l] = s;
        }
    return out;
}

AppendixSeries::ATerms AppendixSeries::appendix_a() {
    ATerms A{ctx_->zero(), ctx_->zero(), zeros(ctx_, N_), zeros(ctx_, N_)};
    int ord = order();
    const Coeff q(rat(1, 4)), h(rat(1, 2));
    for (int n = 0; 2 + n <= ord; ++n) {
        ScalarExpr s = ctx_->zero();
        for (int i = 0; i < N_; ++i)
            for (int k = 0; k < N_; ++k) {
                s += laplacian(d(ctx_->mu2(i + 1, k + 1, k + 1), i), n);
                if (3 + n <= ord)
                    for (int l = 0; l < N_; ++l)
                        s += (ctx_->hbar() * laplacian(d(d(d(ctx_->mu2(i + 1, k + 1, l + 1), i), k), l), n)).scaled(h);
            }
        A.UI += (ctx_->hbar(2) * hbar_weight(ctx_, n) * s).scaled(q);
    }
    for (int n = 1; 2 + n <= ord; ++n) {
        ScalarExpr s = ctx_->zero();
        for (int k = 0; k < N_; ++k)
            for (int l = 0; l < N_; ++l) s += laplacian(ctx_->mu3(k + 1, l + 1), n) * ctx_->G({k + 1, l + 1});
        A.UI -= (ctx_->hbar(2) * hbar_weight(ctx_, n) * s).scaled(q);
    }
    for (int n = 1; 1 + n <= ord; ++n) {
        Family a = calA(n);
        ScalarExpr s = ctx_->zero();
        for (int k = 0; k < N_; ++k) {
            s += a[k][k];
            if (2 + n <= ord)
                for (int l = 0; l < N_; ++l) s += (ctx_->hbar() * d(d(a[k][l], k), l)).scaled(h);
        }
        A.UI += (ctx_->hbar() * hbar_weight(ctx_, n) * s).scaled(h);
    }

    for (int k = 0; k < N_; ++k)
        for (int l = 0; l < N_; ++l) {
            ScalarExpr s = ctx_->zero();
            // printed prefactor hbar^2/4; counting the single p_v derivative among 2n gives hbar/2
            int hp = reading_ == Reading::Printed ? 2 : 1;
            for (int n = 0; hp + n <= ord; ++n) {
                ScalarExpr t = ctx_->zero();
                for (int i = 0; i < N_; ++i) t += laplacian(d(ctx_->mu2(i + 1, k + 1, l + 1), i), n);
                s += (ctx_->hbar(hp) * hbar_weight(ctx_, n) * t).scaled(hp == 2 ? q : h);
            }
            A.UII[k][l] = s;
            ScalarExpr u4 = ctx_->zero();
            for (int n = 1; n <= ord; ++n) u4 += hbar_weight(ctx_, n) * laplacian(ctx_->mu3(k + 1, l + 1), n);
            A.UIV[k][l] = u4;
        }
    for (int n = 1; n <= ord; ++n) {
        Family a = calA(n);
        ScalarExpr w = hbar_weight(ctx_, n);
        for (int k = 0; k < N_; ++k)
            for (int l = 0; l < N_; ++l) A.UII[k][l] += w * a[k][l];
    }

    for (int n = 0; 1 + n <= ord; ++n) {
        ScalarExpr s = ctx_->zero();
        for (int k = 0; k < N_; ++k) s += laplacian(ctx_->mu3(k + 1, k + 1), n);
        A.UIII += (ctx_->hbar() * hbar_weight(ctx_, n) * s).scaled(h);
    }
    for (int n = 1; 2 + n <= ord; ++n) {
        ScalarExpr s = ctx_->zero();
        for (int k = 0; k < N_; ++k)
            for (int l = 0; l < N_; ++l) s += laplacian(d(d(ctx_->mu3(k + 1, l + 1), k), l), n);
        A.UIII += (ctx_->hbar(2) * hbar_weight(ctx_, n) * s).scaled(q);
    }
    return A;
}

AppendixSeries::ATerms AppendixSeries::stage1_coefficients() {
    ATerms U = appendix_a();
    const Coeff q(rat(1, 4));
    ScalarExpr gg = ctx_->zero(), mu = ctx_->zero();
    for (int k = 0; k < N_; ++k)
        for (int l = 0; l < N_; ++l) {
            gg += ctx_->G({k + 1, l + 1}) * ctx_->G({k + 1, l + 1});
            mu += d(d(ctx_->mu3(k + 1, l + 1), k), l);
            U.UIV[k][l] += ctx_->mu3(k + 1, l + 1);
        }
    U.UI += (ctx_->hbar(2) * ctx_->calG_inv() * gg).scaled(q);
    U.UIII += (ctx_->hbar(2) * mu).scaled(q);
    return U;
}

Family AppendixSeries::M_II(const Family& UII, int budget) {
    Family out = zeros(ctx_, N_);
    for (int n = 1; !beyond(budget + n, UII); ++n) {
        ScalarExpr w = hbar_weight(ctx_, n);
        for (int m = 0; m <= 2 * n; ++m) {
            Rational c = binom(2 * n, m);
            for (int k = 0; k < N_; ++k)
                for (int l = 0; l < N_; ++l) {
                    ScalarExpr f = nu_d(UII[k][l], 2 * n - m);
                    if (f.is_zero()) continue;
                    for (int i = 0; i < N_; ++i)
                        for (int j = 0; j < N_; ++j) out[i][j] += (w * f * B(m, k, l, i, j)).scaled(Coeff(c));
                }
        }
    }
    return out;
}

Family AppendixSeries::M_IV(const Family& UIV, int budget) {
    Family out = zeros(ctx_, N_);
    for (int n = 0; !beyond(budget + n, UIV); ++n) {
        ScalarExpr w = hbar_weight(ctx_, n);
        for (int m = 0; m <= 2 * n + 1; ++m) {
            Rational c = binom(2 * n + 1, m);
            for (int k = 0; k < N_; ++k)
                for (int l = 0; l < N_; ++l) {
                    ScalarExpr f = nu_d(UIV[k][l], 2 * n + 1 - m);
                    if (f.is_zero()) continue;
                    for (int i = 0; i < N_; ++i)
                        for (int j = 0; j < N_; ++j) out[i][j] += (w * f * B(m, k, l, i, j)).scaled(Coeff(c));
                }
        }
    }
    return out;
}

ScalarExpr AppendixSeries::calU_II(const Family& UII) {
    ScalarExpr out = ctx_->zero();
    for (int n = 1; !beyond(2 + n, UII); ++n) {
        ScalarExpr w = ctx_->hbar(2) * hbar_weight(ctx_, n);
        for (int m = 0; m <= 2 * n; ++m) {
            Rational c = binom(2 * n, m);
            ScalarExpr s = ctx_->zero(), t = ctx_->zero();
            const Family& cb = calB(m);
            for (int k = 0; k < N_; ++k)
                for (int l = 0; l < N_; ++l) {
                    ScalarExpr f = nu_d(UII[k][l], 2 * n - m);
                    if (f.is_zero()) continue;
                    for (int i = 0; i < N_; ++i)
                        for (int j = 0; j < N_; ++j) s += d(f, i) * d(B(m, k, l, i, j), j);
                    t += f * cb[k][l];
                }
            out += (w * (s.scaled(Coeff(rat(1, 2))) + t.scaled(Coeff(rat(1, 4))))).scaled(Coeff(c));
        }
    }
    return out;
}

ScalarExpr AppendixSeries::calU_IV(const Family& UIV) {
    ScalarExpr out = ctx_->zero();
    for (int n = 0; !beyond(3 + n, UIV); ++n) {
        ScalarExpr w = ctx_->hbar(3) * hbar_weight(ctx_, n);
        for (int m = 0; m <= 2 * n + 1; ++m) {
            Rational c = binom(2 * n + 1, m);
            ScalarExpr s = ctx_->zero(), t = ctx_->zero();
            const Family& cb = calB(m);
            for (int i = 0; i < N_; ++i)
                for (int j = 0; j < N_; ++j) {
                    ScalarExpr f = nu_d(UIV[i][j], 2 * n + 1 - m);
                    if (f.is_zero()) continue;
                    for (int k = 0; k < N_; ++k)
                        for (int l = 0; l < N_; ++l) s += d(f, k) * d(B(m, i, j, k, l), l);
                    t += f * cb[i][j];
                }
            out += (w * (s.scaled(Coeff(rat(1, 4))) + t.scaled(Coeff(rat(1, 8))))).scaled(Coeff(c));
        }
    }
    return out;
}

ScalarExpr AppendixSeries::sum_nu_even(const ScalarExpr& f, int budget) {
    ScalarExpr out = ctx_->zero();
    for (int n = 0; !beyond(budget + n, f); ++n) out += hbar_weight(ctx_, n) * nu_d(f, 2 * n);
    return out;
}

Family AppendixSeries::m2(const ATerms& U) {
    Family out = zeros(ctx_, N_);
    Family b = B_series(), mii = M_II(U.UII), miv = M_IV(U.UIV, 1);
    for (int i = 0; i < N_; ++i)
        for (int j = 0; j < N_; ++j)
            out[i][j] = U.UII[i][j].scaled(Coeff(2)) + b[i][j] + mii[i][j].scaled(Coeff(2)) + ctx_->hbar() * miv[i][j];
    return out;
}

Family AppendixSeries::M2(const ATerms& U) {
    Family out = m2(U);
    for (int i = 0; i < N_; ++i) out[i][i] += ctx_->one();
    return out;
}

ScalarExpr AppendixSeries::U2_II(const ATerms& U) {
    Family M = M2(U), m = m2(U), uv = Uv(), cb = calB_series();
    ScalarExpr out = ctx_->zero();
    ScalarExpr gg = ctx_->zero(), u3 = ctx_->zero(), u4 = ctx_->zero();
    for (int i = 0; i < N_; ++i) {
        out += (ctx_->hbar(2) * cb[i][i]).scaled(Coeff(rat(1, 8)));
        u3 += ctx_->nu(i + 1) * d(U.UIII, i);
        for (int j = 0; j < N_; ++j) {
            ScalarExpr GiGj = ctx_->G({i + 1}) * ctx_->G({j + 1});
            out += (M[i][j] * uv[i][j]).scaled(Coeff(rat(1, 2)));
            out -= (ctx_->hbar(2) * GiGj * nu_d(m[i][j], 2)).scaled(Coeff(rat(1, 8)));
            ScalarExpr dm = nu_d(m[i][j]);
            for (int k = 0; k < N_; ++k)
                out += (ctx_->hbar(2) * ctx_->G({i + 1}) * ctx_->P(j + 1, k + 1) * d(dm, k)).scaled(Coeff(rat(1, 4)));
            gg += U.UII[i][j] * GiGj;
            u4 += U.UIV[i][j] * GiGj;
        }
    }
    out += sum_nu_even(ctx_->hbar() * ctx_->calG().scaled(Coeff(rat(1, 4))) + U.UI, 0);
    out += (ctx_->hbar() * sum_nu_even(gg + u3, 1)).scaled(Coeff(rat(1, 2)));
    out += (ctx_->hbar(2) * sum_nu_even(nu_d(u4), 2)).scaled(Coeff(rat(1, 4)));
    out += calU_II(U.UII) + calU_IV(U.UIV);
    return out;
}

ScalarExpr AppendixSeries::U2_I_printed(const Family& M) {
    ScalarExpr out = ctx_->zero();
    for (int i = 0; i < N_; ++i)
        for (int j = 0; j < N_; ++j)
            for (int k = 0; k < N_; ++k)
                for (int l = 0; l < N_; ++l) {
                    ScalarExpr Pik = ctx_->P(i + 1, k + 1), Pjl = ctx_->P(j + 1, l + 1), PP = Pik * Pjl;
                    ScalarExpr t = M[i][j] * (d(d(PP, k), l) + d(Pik, l) * d(Pjl, k));
                    t += d(M[i][j], k) * d(PP, l) + d(PP, k) * d(M[i][j], l);
                    out += t;
                }
    return (ctx_->hbar(2) * out).scaled(Coeff(rat(1, 8)));
}

// ------------------------------------------------------------------ operators

OperatorExpr stage1_v(const AlgebraTable& alg, int i) {
    return alg.op(gen::px(i)) + OperatorExpr::term(alg.ctx()->G({i}), Word{gen::lam()});
}

OperatorExpr stage2_v(const AlgebraTable& alg, int i) {
    OperatorExpr o(alg.ctx());
    for (int j = 1; j <= alg.ctx()->N(); ++j) o += symmetrized(OperatorExpr(alg.ctx()->P(i, j)), alg.op(gen::px(j)), alg);
    return o;
}

namespace {

// sum_kl {c_kl, v_k v_l}, or {c_kl, {v_k, v_l}} when sym is set
OperatorExpr quadratic(const Family& c, const std::vector<OperatorExpr>& v, const AlgebraTable& alg, bool sym) {
    OperatorExpr out(alg.ctx());
    int N = int(v.size());
    for (int k = 0; k < N; ++k)
        for (int l = 0; l < N; ++l) {
            if (c[k][l].is_zero()) continue;
            OperatorExpr vv = sym ? symmetrized(v[k], v[l], alg) : multiply(v[k], v[l], alg);
            out += symmetrized(OperatorExpr(c[k][l]), vv, alg);
        }
    return out;
}

OperatorExpr constant_term(const CtxPtr& ctx) { return OperatorExpr(ctx->hbar().scaled(Coeff(rat(-ctx->N(), 4)))); }

}  // namespace

OperatorExpr appendix_a_operator(AppendixSeries& s, const AlgebraTable& alg1) {
    const CtxPtr& ctx = s.ctx();
    int N = s.N();
    auto A = s.appendix_a();
    std::vector<OperatorExpr> v;
    for (int i = 1; i <= N; ++i) v.push_back(stage1_v(alg1, i));
    OperatorExpr pl = alg1.op(gen::plam());
    OperatorExpr out = constant_term(ctx) + OperatorExpr(A.UI) + quadratic(A.UII, v, alg1, false);
    out += symmetrized(OperatorExpr(A.UIII), pl, alg1);
    out += symmetrized(quadratic(A.UIV, v, alg1, false), pl, alg1);
    return out;
}

H1Pieces stage1_pieces(AppendixSeries& s, const AppendixSeries::ATerms& U, const AlgebraTable& alg1) {
    int N = s.N();
    std::vector<OperatorExpr> v;
    for (int i = 1; i <= N; ++i) v.push_back(stage1_v(alg1, i));
    OperatorExpr pl = alg1.op(gen::plam());
    H1Pieces p;
    p.kinetic = OperatorExpr(s.ctx());
    for (int i = 0; i < N; ++i) p.kinetic += multiply(v[i], v[i], alg1).scaled(Coeff(rat(1, 2)));
    p.UI = OperatorExpr(U.UI);
    p.UII = quadratic(U.UII, v, alg1, false);
    p.UIII = symmetrized(OperatorExpr(U.UIII), pl, alg1);
    p.UIV = symmetrized(quadratic(U.UIV, v, alg1, false), pl, alg1);
    return p;
}

H1Pieces appendix_b_operators(AppendixSeries& s, const AppendixSeries::ATerms& U, const AlgebraTable& alg2) {
    const CtxPtr& ctx = s.ctx();
    int N = s.N();
    std::vector<OperatorExpr> v;
    for (int i = 1; i <= N; ++i) v.push_back(stage2_v(alg2, i));
    Family b = s.B_series(), cb = s.calB_series(), uv = s.Uv();
    Family mii = s.M_II(U.UII), miv = s.M_IV(U.UIV, 1);
    auto h = [&](int k) { return ctx->hbar(k); };
    auto fr = [](long p, long q) { return Coeff(rat(p, q)); };

    // the G_i G_j (nu d)^2 F and G_i P_jk ((nu d) F)_;k pair shared by B2a, B4a, B6a
    auto drift = [&](const Family& F, const Coeff& c1, const Coeff& c2, int hb) {
        ScalarExpr out = ctx->zero();
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) {
                if (F[i][j].is_zero()) continue;
                out -= (h(hb) * ctx->G({i + 1}) * ctx->G({j + 1}) * s.nu_d(F[i][j], 2)).scaled(c1);
                ScalarExpr dF = s.nu_d(F[i][j]);
                for (int k = 0; k < N; ++k)
                    out += (h(hb) * ctx->G({i + 1}) * ctx->P(j + 1, k + 1) * differentiate(dF, k + 1)).scaled(c2);
            }
        return out;
    };
    auto contract = [&](const Family& a, const Family& c) {
        ScalarExpr out = ctx->zero();
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) out += a[i][j] * c[i][j];
        return out;
    };
    auto even_sum = [&](const ScalarExpr& f, int budget, int shift) {
        ScalarExpr out = ctx->zero();
        for (int n = 0; !f.is_zero() && budget + n + f.min_hbar() <= s.order(); ++n)
            out += hbar_weight(ctx, n) * s.nu_d(f, 2 * n + shift);
        return out;
    };
    ScalarExpr gg2 = ctx->zero(), gg4 = ctx->zero(), u3 = ctx->zero();
    for (int i = 0; i < N; ++i) {
        u3 += ctx->nu(i + 1) * differentiate(U.UIII, i + 1);
        for (int j = 0; j < N; ++j) {
            gg2 += U.UII[i][j] * ctx->G({i + 1}) * ctx->G({j + 1});
            gg4 += U.UIV[i][j] * ctx->G({i + 1}) * ctx->G({j + 1});
        }
    }

    H1Pieces p;
    // B2a
    ScalarExpr k2 = (h(1) * even_sum(ctx->calG(), 1, 0)).scaled(fr(1, 4)) + contract(b, uv).scaled(fr(1, 2)) +
                    drift(b, fr(1, 8), fr(1, 4), 2);
    for (int i = 0; i < N; ++i) k2 += (h(2) * cb[i][i]).scaled(fr(1, 8));
    p.kinetic = quadratic(b, v, alg2, true).scaled(fr(1, 2)) + OperatorExpr(k2);
    // B3
    ScalarExpr b3 = ctx->zero();
    for (int n = 1; !U.UI.is_zero() && n + U.UI.min_hbar() <= s.order(); ++n)
        b3 += hbar_weight(ctx, n) * s.nu_d(U.UI, 2 * n);
    p.UI = OperatorExpr(b3);
    // B4a
    ScalarExpr k4 = (h(1) * even_sum(gg2, 1, 0)).scaled(fr(1, 2)) + contract(mii, uv) + drift(mii, fr(1, 4), fr(1, 2), 2) +
                    s.calU_II(U.UII);
    p.UII = quadratic(mii, v, alg2, true) + OperatorExpr(k4);
    // B5
    p.UIII = OperatorExpr((h(1) * even_sum(u3, 1, 0)).scaled(fr(1, 2)));
    // B6a
    ScalarExpr k6 = (h(2) * even_sum(gg4, 2, 1)).scaled(fr(1, 4)) + (h(1) * contract(miv, uv)).scaled(fr(1, 2)) +
                    drift(miv, fr(1, 8), fr(1, 4), 3) + s.calU_IV(U.UIV);
    p.UIV = quadratic(miv, v, alg2, true).scaled(fr(1, 2)).left_scaled(h(1), s.order()) + OperatorExpr(k6);
    return p;
}

OperatorExpr stage2_projected(AppendixSeries& s, const AppendixSeries::ATerms& U, const AlgebraTable& alg2) {
    const CtxPtr& ctx = s.ctx();
    int N = s.N();
    std::vector<OperatorExpr> v;
    for (int i = 1; i <= N; ++i) v.push_back(stage2_v(alg2, i));
    Family c = U.UII, uv = s.Uv();
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) c[i][j] = c[i][j].scaled(Coeff(2)) + (i == j ? ctx->one() : ctx->zero());
    ScalarExpr sc = U.UI;
    for (int i = 0; i < N; ++i) {
        sc += uv[i][i].scaled(Coeff(rat(1, 2)));
        for (int j = 0; j < N; ++j) {
            sc += uv[i][j] * U.UII[i][j];
            sc -= (ctx->hbar(2) * ctx->G({i + 1}) * ctx->G({j + 1}) * s.nu_d(U.UII[i][j], 2)).scaled(Coeff(rat(1, 4)));
            ScalarExpr dF = s.nu_d(U.UII[i][j]);
            for (int k = 0; k < N; ++k)
                sc += (ctx->hbar(2) * ctx->G({i + 1}) * ctx->P(j + 1, k + 1) * differentiate(dF, k + 1))
                          .scaled(Coeff(rat(1, 2)));
        }
    }
    return constant_term(ctx) + quadratic(c, v, alg2, true).scaled(Coeff(rat(1, 2))) + OperatorExpr(sc);
}

TableCheck appendix_compare(const QuantumSystem& s0, const QuantumSystem& s1, const QuantumSystem& s2,
                            AppendixSeries::Reading reading) {
    if (s1.stage != Stage::S1 || s2.stage != Stage::S2 || !s1.projector || !s2.projector)
        throw Error(ErrorKind::InvalidSpec, "appendix comparison needs stages 1 and 2");
    const CtxPtr& ctx = s1.ctx;
    AppendixSeries s(ctx, reading);
    const AlgebraTable& alg1 = *s1.algebra;
    const AlgebraTable& alg2 = *s2.algebra;
    TableCheck t{"appendix series", {}};
    t.entries.push_back({"Q1 H", "closed form", s1.projector->q_correction(s0.hamiltonian), appendix_a_operator(s, alg1)});

    auto U = s.stage1_coefficients();
    H1Pieces h1 = stage1_pieces(s, U, alg1);
    t.entries.push_back({"H1", "closed form", s1.hamiltonian, constant_term(ctx) + h1.sum()});
    H1Pieces cf = appendix_b_operators(s, U, alg2);
    const Projector& P2 = *s2.projector;
    t.entries.push_back({"Q2 kinetic", "closed form", P2.q_correction(h1.kinetic), cf.kinetic});
    t.entries.push_back({"Q2 U_I", "closed form", P2.q_correction(h1.UI), cf.UI});
    t.entries.push_back({"Q2 U_II", "closed form", P2.q_correction(h1.UII), cf.UII});
    t.entries.push_back({"Q2 U_III", "closed form", P2.q_correction(h1.UIII), cf.UIII});
    t.entries.push_back({"Q2 U_IV", "closed form", P2.q_correction(h1.UIV), cf.UIV});
    t.entries.push_back({"P2 H1", "closed form", s2.p_part, stage2_projected(s, U, alg2)});
    return t;
}

Stage2Structure stage2_structure(const QuantumSystem& s2, AppendixSeries::Reading reading) {
    if (s2.stage != Stage::S2) throw Error(ErrorKind::InvalidSpec, "stage 2 structure needs the stage 2 system");
    const CtxPtr& ctx = s2.ctx;
    const AlgebraTable& alg = *s2.algebra;
    int N = ctx->N();
    AppendixSeries s(ctx, reading);
    auto U = s.stage1_coefficients();
    Family M = s.M2(U);
    ScalarExpr u2 = s.U2_II(U);

    Stage2Structure out{{"stage 2 closed form", {}}, {"U2_I printed reading", ctx->zero(), ctx->zero()}};
    KineticForm kf = kinetic_form(s2.hamiltonian, alg);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            ScalarExpr pmp = ctx->zero();
            for (int k = 0; k < N; ++k)
                for (int l = 0; l < N; ++l) pmp += ctx->P(i + 1, k + 1) * M[k][l] * ctx->P(l + 1, j + 1);
            out.table.entries.push_back({"Mt " + std::to_string(i + 1) + std::to_string(j + 1), "P M2 P",
                                         OperatorExpr(kf.Mt[i][j]), OperatorExpr(pmp)});
        }
    std::vector<OperatorExpr> v;
    for (int i = 1; i <= N; ++i) v.push_back(stage2_v(alg, i));
    OperatorExpr h = constant_term(ctx) + quadratic(M, v, alg, true).scaled(Coeff(rat(1, 2))) + OperatorExpr(u2);
    out.table.entries.push_back({"H2", "closed form", s2.hamiltonian, h});
    out.u2_i.derived = kf.U - constant_term(ctx).scalar_part() - u2;
    out.u2_i.expected = s.U2_I_printed(M);
    return out;
}

}  // namespace pomq
