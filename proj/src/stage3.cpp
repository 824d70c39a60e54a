#include <algorithm>

#include "model_internal.hpp"

namespace pomq {

using namespace detail;

namespace {

using MatS = std::vector<std::vector<ScalarExpr>>;

Stage3Pieces matrices(const ModelSpec& s) {
    Stage3Pieces m;
    int N = s.N;
    Mat e = epsilon(N), I = identity(N);
    m.Theta = scaled(e, s.theta);
    m.Xi = scaled(e, s.eta);
    m.G = m.Theta * m.Xi;
    m.M = I + scaled(m.G, rat(1, 4));
    m.Mbar = I - scaled(m.G, rat(1, 4));
    try {
        m.Minv = invert(m.M);
    } catch (const Error&) {
        throw Error(ErrorKind::SingularM, "I + G/4 is singular for theta = " + s.theta.get_str() + ", eta = " + s.eta.get_str());
    }
    m.calM = m.Minv * m.Xi * (I - scaled(m.Theta * m.Theta, rat(1, 4))) * m.Minv;
    return m;
}

void add_to(LinearForm& l, const LinearForm& o, const Rational& c) {
    if (sgn(c) == 0) return;
    for (const auto& [g, v] : o) l[g] += c * v;
}

LinearForm cleaned(LinearForm l) {
    for (auto it = l.begin(); it != l.end();) it = sgn(it->second) == 0 ? l.erase(it) : std::next(it);
    return l;
}

OperatorExpr linear_op(const AlgebraTable& alg, const LinearForm& l) {
    OperatorExpr o(alg.ctx());
    for (const auto& [g, c] : l)
        if (sgn(c) != 0) o += alg.op(g).scaled(Coeff(c));
    return o;
}

std::vector<Generator> family(GenKind k, int N) {
    std::vector<Generator> out;
    for (int i = 1; i <= N; ++i) out.push_back(Generator{k, uint16_t(i)});
    return out;
}

std::vector<Generator> concat(std::initializer_list<std::vector<Generator>> parts) {
    std::vector<Generator> out;
    for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

// Entries of the projected bracket as matrices of (M, Mbar, Theta, Xi, G).
std::optional<Rational> stage3_entry(const Stage3Pieces& m, Generator a, Generator b) {
    Mat I = identity(m.M.size());
    const Mat& Mi = m.Minv;
    auto at = [&](const Mat& x) { return std::optional<Rational>(x[a.index - 1][b.index - 1]); };
    GenKind ka = a.kind, kb = b.kind;
    if (ka == GenKind::X && kb == GenKind::X) return at(Mi * m.Theta * Mi);
    if (ka == GenKind::U && kb == GenKind::U) return at(Mi * m.Xi * Mi);
    if (ka == GenKind::X && kb == GenKind::PX) return at(Mi * (I + scaled(m.G * m.G, rat(1, 16))) * Mi);
    if (ka == GenKind::U && kb == GenKind::PU) return at(scaled(Mi * m.G * Mi, rat(1, 2)));
    if (ka == GenKind::PX && kb == GenKind::PX) return at(scaled(Mi * m.G * m.Xi * Mi, rat(-1, 4)));
    if (ka == GenKind::PU && kb == GenKind::PU) return at(scaled(Mi * m.G * m.Theta * Mi, rat(-1, 4)));
    if (ka == GenKind::X && kb == GenKind::U) return at(Mi * m.Mbar * Mi);
    if (ka == GenKind::U && kb == GenKind::PX) return at(scaled(Mi * m.Xi * m.Mbar * Mi, rat(1, 2)));
    if (ka == GenKind::X && kb == GenKind::PU) return at(scaled(Mi * m.Theta * m.Mbar * Mi, rat(1, 2)));
    if (ka == GenKind::PX && kb == GenKind::PU) return at(scaled(Mi * m.G * m.Mbar * Mi, rat(1, 4)));
    return std::nullopt;
}

TableCheck bracket_table(const std::string& label, const ConstBracket& w, const Stage3Pieces& m, const CtxPtr& ctx) {
    TableCheck t{label, {}};
    for (size_t a = 0; a < w.coords.size(); ++a)
        for (size_t b = a + 1; b < w.coords.size(); ++b) {
            Generator ga = w.coords[a], gb = w.coords[b];
            Rational e = 0;
            if (auto v = stage3_entry(m, ga, gb))
                e = *v;
            else if (auto v2 = stage3_entry(m, gb, ga))
                e = -*v2;
            t.entries.push_back({ga.name(), gb.name(), sc(ctx->num(w.omega[a][b])), sc(ctx->num(e))});
        }
    return t;
}

std::shared_ptr<AlgebraTable> constant_algebra(const CtxPtr& ctx, const ConstBracket& w) {
    auto alg = std::make_shared<AlgebraTable>(ctx);
    alg->add_generators(w.coords);
    for (size_t a = 0; a < w.coords.size(); ++a)
        for (size_t b = a + 1; b < w.coords.size(); ++b)
            if (sgn(w.omega[a][b]) != 0) alg->set(w.coords[a], w.coords[b], sc(ctx->num(w.omega[a][b])));
    return alg;
}

bool is_real(const ScalarExpr& s) {
    for (const auto& t : s.poly().terms)
        if (!t.c.is_real()) return false;
    return true;
}

ScalarExpr dx(const ScalarExpr& f, int k) { return d_coord(f, gen::x(k)); }

struct Assembly {
    const CtxPtr& ctx;
    const ConstBracket& w;
    int ord;
    int N;

    ScalarExpr p(int i) const { return ctx->var(gen::px(i)); }
    ScalarExpr sym(const ScalarExpr& a, const ScalarExpr& b) const { return moyal_sym(a, b, w, ord); }
    ScalarExpr h(int k, const Rational& c) const { return ctx->hbar(k).scaled(Coeff(c)); }
    // 1/2 {A_ij, {a_i, a_j}}
    ScalarExpr kinetic(const MatS& A, const std::vector<ScalarExpr>& a) const {
        ScalarExpr out = ctx->zero();
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j)
                if (!A[i][j].is_zero()) out += sym(A[i][j], sym(a[i], a[j])).scaled(Coeff::frac(1, 2));
        return out;
    }
};

MatS map_mat(const MatS& A, const std::function<ScalarExpr(const ScalarExpr&)>& f) {
    MatS out = A;
    for (auto& row : out)
        for (auto& e : row) e = f(e);
    return out;
}

}  // namespace

QuantumSystem project_stage3(const QuantumSystem& sys, const ModelSpec& spec) {
    if (sys.stage != Stage::S2) throw Error(ErrorKind::InvalidSpec, "stage 3 starts from stage 2");
    const CtxPtr& ctx = sys.ctx;
    int N = ctx->N(), ord = ctx->order();
    auto pieces = std::make_shared<Stage3Pieces>(matrices(spec));
    Stage3Pieces& m = *pieces;
    const AlgebraTable& alg2 = *sys.algebra;
    CanonicalPairs pairs = pairs_for(N, false, false);

    QuantumSystem out;
    out.stage = Stage::S3;
    out.spec = sys.spec;
    out.ctx = ctx;

    // additional constraints and the constraint algebra
    std::vector<LinearForm> psi2(N), ph4(N);
    for (int i = 1; i <= N; ++i) {
        psi2[i - 1][gen::px(i)] = -1;
        ph4[i - 1][gen::pu(i)] = 1;
        for (int j = 1; j <= N; ++j) {
            psi2[i - 1][gen::u(j)] += m.Mbar[i - 1][j - 1];
            psi2[i - 1][gen::x(j)] -= m.Xi[i - 1][j - 1] / 2;
            ph4[i - 1][gen::u(j)] += m.Theta[i - 1][j - 1] / 2;
        }
        psi2[i - 1] = cleaned(psi2[i - 1]);
        ph4[i - 1] = cleaned(ph4[i - 1]);
    }
    std::vector<NamedOp> kc;
    for (int i = 1; i <= N; ++i) kc.push_back({"phi4", i, linear_op(alg2, ph4[i - 1])});
    for (int i = 1; i <= N; ++i) kc.push_back({"psi3", i, -linear_op(alg2, psi2[i - 1])});
    TableCheck remaining{"stage 3 carried constraints", {}};
    for (const auto& c : sys.constraints)
        remaining.entries.push_back({c.label(), "phi4", c.op, kc[c.index - 1].op});
    out.tables.push_back(remaining);
    auto mat_entry = [&](const Mat& A, int i, int j) { return sc(ctx->num(A[i - 1][j - 1])); };
    out.tables.push_back(constraint_table("additional constraint algebra", kc, alg2,
                                          [&](const NamedOp& a, const NamedOp& b) -> std::optional<OperatorExpr> {
                                              if (a.name == "phi4" && b.name == "phi4") return mat_entry(m.Theta, a.index, b.index);
                                              if (a.name == "phi4" && b.name == "psi3") return mat_entry(m.Mbar, a.index, b.index);
                                              if (a.name == "psi3" && b.name == "psi3") return mat_entry(m.Xi, a.index, b.index);
                                              return std::nullopt;
                                          }));

    // ACCS
    std::vector<LinearForm> xi(N), pi(N), xi_e(N), pi_e(N);
    for (int i = 0; i < N; ++i) {
        for (int j = 0; j < N; ++j) {
            LinearForm a = psi2[j], b = ph4[j];
            for (int k = 0; k < N; ++k) {
                add_to(a, ph4[k], m.Xi[j][k] / 2);
                add_to(b, psi2[k], -m.Theta[j][k] / 2);
            }
            add_to(xi[i], a, m.Minv[i][j]);
            add_to(pi[i], b, m.Minv[i][j]);
            LinearForm ae{{gen::u(j + 1), 1}, {gen::px(j + 1), -1}}, be{{gen::pu(j + 1), 1}};
            Mat GT = m.G * m.Theta;
            for (int k = 0; k < N; ++k) {
                ae[gen::pu(k + 1)] += m.Xi[j][k] / 2;
                ae[gen::x(k + 1)] -= m.Xi[j][k] / 2;
                be[gen::u(k + 1)] += GT[j][k] / 8;
                be[gen::px(k + 1)] += m.Theta[j][k] / 2;
                be[gen::x(k + 1)] += m.G[j][k] / 4;
            }
            add_to(xi_e[i], ae, m.Minv[i][j]);
            add_to(pi_e[i], be, m.Minv[i][j]);
        }
        xi[i] = cleaned(xi[i]);
        pi[i] = cleaned(pi[i]);
        out.identities.push_back({"ACCS expanded xi_" + std::to_string(i + 1), linear_symbol(ctx, xi[i]),
                                  linear_symbol(ctx, cleaned(xi_e[i]))});
        out.identities.push_back({"ACCS expanded pi_" + std::to_string(i + 1), linear_symbol(ctx, pi[i]),
                                  linear_symbol(ctx, cleaned(pi_e[i]))});
    }
    auto red = std::make_shared<LinearReduction>(ctx, pairs, xi, pi);
    out.reduction = red;

    TableCheck act{"stage 3 hyper-operator actions", {}};
    {
        Mat MT = scaled(m.Minv * m.Theta, rat(-1, 2)), MX = scaled(m.Minv * m.Xi, rat(-1, 2)),
            MG = scaled(m.Minv * m.G, rat(1, 4)), Mm = scaled(m.Minv, Rational(-1));
        auto row = [&](const std::string& hyper, GenKind z, const Mat& want, bool is_xi) {
            for (int k = 1; k <= N; ++k)
                for (int i = 1; i <= N; ++i) {
                    Generator g{z, uint16_t(i)};
                    Rational d = is_xi ? red->minus_xi(k - 1, g) : red->minus_pi(k - 1, g);
                    act.entries.push_back({hyper + "_" + std::to_string(k), g.name(), sc(ctx->num(d)),
                                           sc(ctx->num(want[k - 1][i - 1]))});
                }
        };
        row("xi-", GenKind::X, m.Minv, true);
        row("pi-", GenKind::X, MT, false);
        row("xi-", GenKind::PX, MX, true);
        row("pi-", GenKind::PX, MG, false);
        row("xi-", GenKind::U, MX, true);
        row("pi-", GenKind::U, Mm, false);
    }
    out.tables.push_back(act);

    // projected algebra
    std::vector<Generator> xs = family(GenKind::X, N), pxs = family(GenKind::PX, N), us = family(GenKind::U, N),
                           pus = family(GenKind::PU, N);
    ConstBracket w = red->reduced_bracket(concat({xs, pxs, us, pus}));
    out.bracket = w;
    out.algebra = constant_algebra(ctx, w);
    out.generators = w.coords;
    out.tables.push_back(bracket_table("stage 3 algebra", w, m, ctx));

    // surface relations in the (x, px) chart
    auto chI = red->chart(concat({xs, pxs}));
    auto R = [&](const ScalarExpr& f) { return red->restrict(f, chI); };
    Mat MbInv = invert(m.Mbar);
    for (int i = 1; i <= N; ++i) {
        std::string s = std::to_string(i);
        out.identities.push_back({"phi4_" + s + " annihilated", R(linear_symbol(ctx, ph4[i - 1])), ctx->zero()});
        out.identities.push_back({"psi2_" + s + " annihilated", R(linear_symbol(ctx, psi2[i - 1])), ctx->zero()});
        ScalarExpr printed = ctx->var(gen::pu(i)), ue = ctx->zero(), pue = ctx->zero();
        for (int j = 1; j <= N; ++j) printed += ctx->var(gen::px(j)).scaled(Coeff(m.Theta[i - 1][j - 1] / 2));
        out.notes.push_back({"p_u + Theta p^x / 2 on the surface", R(printed), ctx->zero()});
        for (int j = 1; j <= N; ++j) {
            ScalarExpr bj = ctx->var(gen::px(j));
            for (int k = 1; k <= N; ++k) bj += ctx->x(k).scaled(Coeff(m.Xi[j - 1][k - 1] / 2));
            ue += bj.scaled(Coeff(MbInv[i - 1][j - 1]));
            pue += bj.scaled(Coeff(-(m.Theta * MbInv)[i - 1][j - 1] / 2));
        }
        out.identities.push_back({"u_" + s + " elimination", R(ctx->var(gen::u(i))), ue});
        out.identities.push_back({"p_u_" + s + " elimination", R(ctx->var(gen::pu(i))), pue});
    }

    // representatives as symbols in the (x, px) chart; reps keep the stage-2 operators
    out.reps = sys.reps;
    for (const auto& [g, r] : sys.reps) {
        if (std::find(w.coords.begin(), w.coords.end(), g) != w.coords.end())
            out.rep_symbols[g] = R(ctx->var(g));
        else
            out.rep_symbols[g] = R(weyl_symbol(r, pairs, ord));
    }
    ConstBracket wI = red->reduced_bracket(concat({xs, pxs}));
    Assembly A{ctx, wI, ord, N};
    for (int i = 1; i <= N; ++i) {
        ScalarExpr v = ctx->zero();
        for (int j = 1; j <= N; ++j) v += A.sym(ctx->P(i, j), A.p(j));
        out.identities.push_back({"v_" + std::to_string(i) + " elimination", out.rep_symbols.at(gen::v(i)), v});
    }
    {
        ScalarExpr lam = ctx->zero();
        for (int j = 1; j <= N; ++j) lam -= A.sym(ctx->calG_inv() * ctx->G({j}), A.p(j));
        out.identities.push_back({"lambda elimination", out.rep_symbols.at(gen::lam()), lam});
    }

    // Hamiltonian
    ScalarExpr sig2 = weyl_symbol(sys.hamiltonian, pairs, ord);
    ScalarExpr smeared = red->smear(sig2, ord);
    m.full = (sig2 + smeared).truncated(ord);
    ScalarExpr Pd = R(sig2), Qd = R(smeared);
    out.p_symbol = Pd;
    out.q_symbol = Qd;
    out.hamiltonian_symbol = (Pd + Qd).truncated(ord);
    out.properties_hermitian = is_real(*out.hamiltonian_symbol);

    KineticForm kf = kinetic_form(sys.hamiltonian, alg2);
    m.Mt = kf.Mt;
    ScalarExpr c0 = A.h(1, rat(-N, 4));
    m.U2 = kf.U - c0;

    // hyper-derivations on functions of x
    Mat Lq(N, std::vector<Rational>(N, Rational(0)));
    for (int k = 0; k < N; ++k)
        for (int a = 0; a < N; ++a)
            for (int b = 0; b < N; ++b)
                Lq[a][b] += red->minus_xi(k, xs[a]) * red->minus_xi(k, xs[b]) + red->minus_pi(k, xs[a]) * red->minus_pi(k, xs[b]);
    MatS X = map_mat(m.Mt, [&](const ScalarExpr& f) { return gaussian_series(f, xs, Lq, ord); });
    MatS Xt = m.Mt;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) Xt[i][j] = (Xt[i][j] + X[i][j]).truncated(ord);
    m.Xt = Xt;
    m.QU = gaussian_series(m.U2, xs, Lq, ord);
    Mat Lp = m.Minv * m.Minv + scaled(m.Minv * m.Theta * m.Theta * m.Minv, rat(1, 4));
    ScalarExpr QU_printed = gaussian_series(m.U2, xs, Lp, ord);

    Mat C = m.Minv * m.G * m.Minv, Am = m.Minv * m.G * m.Theta * m.Minv, B = m.Minv * m.Xi * m.Minv;
    std::vector<std::vector<DerivCache>> dM, dX, dT;
    for (int i = 0; i < N; ++i) {
        dM.emplace_back();
        dX.emplace_back();
        dT.emplace_back();
        for (int j = 0; j < N; ++j) {
            dM[i].emplace_back(m.Mt[i][j]);
            dX[i].emplace_back(X[i][j]);
            dT[i].emplace_back(Xt[i][j]);
        }
    }
    auto second = [&](std::vector<std::vector<DerivCache>>& c, int i, int j, int k, int l) -> const ScalarExpr& {
        return c[i - 1][j - 1].get({gen::x(k), gen::x(l)});
    };
    auto first = [&](std::vector<std::vector<DerivCache>>& c, int i, int j, int k) -> const ScalarExpr& {
        return c[i - 1][j - 1].get({gen::x(k)});
    };
    ScalarExpr UI = ctx->zero(), UQ = ctx->zero();
    Mat G2 = m.Minv * m.G * m.G * m.Minv, X2 = m.Minv * m.Xi * m.Xi * m.Minv;
    for (int i = 1; i <= N; ++i)
        for (int j = 1; j <= N; ++j) {
            const ScalarExpr& Tij = Xt[i - 1][j - 1];
            UQ += Tij.scaled(Coeff(G2[i - 1][j - 1] / 64 - X2[i - 1][j - 1] / 16)).hbar_shifted(1);
            for (int k = 1; k <= N; ++k) {
                Rational cik = C[i - 1][k - 1], cjk = C[j - 1][k - 1];
                if (sgn(cik) != 0) {
                    UI += second(dM, i, j, k, j).scaled(Coeff(-cik / 16)).hbar_shifted(2);
                    UQ += second(dX, i, j, k, j).scaled(Coeff(-cik / 8)).hbar_shifted(2);
                }
                if (sgn(cjk) != 0) UI += second(dM, i, j, k, i).scaled(Coeff(-cjk / 16)).hbar_shifted(2);
                for (int l = 1; l <= N; ++l) {
                    Rational cc = cik * C[j - 1][l - 1];
                    Rational t = Am[i - 1][k - 1] * Am[j - 1][l - 1] / 512 + B[i - 1][k - 1] * B[j - 1][l - 1] / 32 -
                                 B[i - 1][k - 1] * Am[j - 1][l - 1] / 64;
                    if (sgn(cc) != 0) {
                        UI += second(dM, i, j, k, l).scaled(Coeff(cc / 32)).hbar_shifted(2);
                        UQ += second(dX, i, j, k, l).scaled(Coeff(cc / 32)).hbar_shifted(2);
                    }
                    if (sgn(t) != 0) UQ += second(dT, i, j, k, l).scaled(Coeff(t)).hbar_shifted(2);
                }
            }
        }
    m.UI = UI.truncated(ord);
    m.UQ = UQ.truncated(ord);

    std::vector<ScalarExpr> ps;
    for (int i = 1; i <= N; ++i) ps.push_back(A.p(i));
    ScalarExpr drift2 = ctx->zero(), driftM = ctx->zero();
    for (int i = 1; i <= N; ++i)
        for (int j = 1; j <= N; ++j)
            for (int k = 1; k <= N; ++k) {
                Rational c = -Am[i - 1][k - 1] / 16 + B[i - 1][k - 1] / 4;
                if (sgn(c) != 0) drift2 += A.sym(first(dT, i, j, k), A.p(j)).scaled(Coeff(c)).hbar_shifted(1);
                Rational cm = m.calM[j - 1][k - 1] / 4;
                if (sgn(cm) != 0) driftM += A.sym(first(dT, i, j, k), A.p(i)).scaled(Coeff(cm)).hbar_shifted(1);
            }
    drift2 = drift2.truncated(ord);
    driftM = driftM.truncated(ord);

    ScalarExpr p_expected = (c0 + A.kinetic(m.Mt, ps) + m.UI + m.U2).truncated(ord);
    ScalarExpr q_expected = (A.kinetic(X, ps) + drift2 + m.UQ + m.QU).truncated(ord);
    ScalarExpr printed = (c0 + A.kinetic(Xt, ps) + driftM + m.UI + m.U2 + m.UQ).truncated(ord);
    out.identities.push_back({"stage 3 projected term", Pd, p_expected});
    out.identities.push_back({"stage 3 ACCS expansion term", Qd, q_expected});
    out.identities.push_back({"stage 3 drift term in calM form", drift2, driftM});
    out.identities.push_back({"stage 3 Hamiltonian", *out.hamiltonian_symbol, (printed + m.QU).truncated(ord)});
    out.notes.push_back({"stage 3 Hamiltonian without the potential expansion term", *out.hamiltonian_symbol, printed});
    out.notes.push_back({"potential expansion term in printed matrix form", m.QU, QU_printed});
    out.s3 = pieces;
    return out;
}

namespace {

ScalarExpr lin(const CtxPtr& ctx, const std::vector<Generator>& gs, const std::vector<Rational>& c) {
    ScalarExpr out = ctx->zero();
    for (size_t k = 0; k < gs.size(); ++k)
        if (sgn(c[k]) != 0) out += ctx->var(gs[k]).scaled(Coeff(c[k]));
    return out;
}

// R A S with rational R, S.
MatS sandwich(const Mat& Rm, const MatS& A, const Mat& S) {
    size_t N = A.size();
    const CtxPtr& ctx = A[0][0].ctx();
    MatS out(N, std::vector<ScalarExpr>(N, ctx->zero()));
    for (size_t i = 0; i < N; ++i)
        for (size_t j = 0; j < N; ++j)
            for (size_t k = 0; k < N; ++k) {
                if (sgn(Rm[i][k]) == 0) continue;
                for (size_t l = 0; l < N; ++l)
                    if (sgn(S[l][j]) != 0) out[i][j] += A[k][l].scaled(Coeff(Rm[i][k] * S[l][j]));
            }
    return out;
}

ScalarExpr R_I_symbol(const LinearReduction& red, const Stage3Pieces& m, const std::map<Generator, LinearForm>& chI) {
    return red.restrict(m.full, chI);
}

}  // namespace

QuantumSystem finalize(const QuantumSystem& sys, FinalKind which) {
    if (sys.stage != Stage::S3) throw Error(ErrorKind::InvalidSpec, "the final systems start from stage 3");
    const CtxPtr& ctx = sys.ctx;
    int N = ctx->N(), ord = ctx->order();
    const Stage3Pieces& m = *sys.s3;
    const LinearReduction& red = *sys.reduction;
    CanonicalPairs pairs = pairs_for(N, false, false);
    std::vector<Generator> xs = family(GenKind::X, N), pxs = family(GenKind::PX, N), us = family(GenKind::U, N);

    QuantumSystem out;
    out.stage = which == FinalKind::I ? Stage::StarI : Stage::StarII;
    out.spec = sys.spec;
    out.ctx = ctx;
    out.reduction = sys.reduction;
    out.s3 = sys.s3;
    std::vector<Generator> keep = concat({xs, which == FinalKind::I ? pxs : us});
    ConstBracket w = red.reduced_bracket(keep);
    out.bracket = w;
    out.algebra = constant_algebra(ctx, w);
    out.generators = keep;
    out.tables.push_back(bracket_table(which == FinalKind::I ? "final algebra I" : "final algebra II", w, m, ctx));
    auto ch = red.chart(keep);
    auto R = [&](const ScalarExpr& f) { return red.restrict(f, ch); };
    for (const auto& [g, r] : sys.reps) {
        if (std::find(keep.begin(), keep.end(), g) != keep.end())
            out.rep_symbols[g] = ctx->var(g);
        else if (g.kind == GenKind::X || g.kind == GenKind::PX || g.kind == GenKind::U || g.kind == GenKind::PU)
            out.rep_symbols[g] = R(ctx->var(g));
        else
            out.rep_symbols[g] = R(weyl_symbol(r, pairs, ord));
    }
    out.hamiltonian_symbol = R(m.full);
    out.properties_hermitian = is_real(*out.hamiltonian_symbol);
    Assembly A{ctx, w, ord, N};
    Mat MbInv = invert(m.Mbar);

    // momenta and eliminated coordinates as linear symbols of the chart
    std::vector<ScalarExpr> p(N), u(N), pu(N);
    for (int i = 0; i < N; ++i) {
        std::vector<Rational> cx(N), cp(N);
        if (which == FinalKind::I) {
            for (int j = 0; j < N; ++j) {
                Mat MX = MbInv * m.Xi;
                cp[j] = MbInv[i][j];
                cx[j] = MX[i][j] / 2;
            }
            u[i] = lin(ctx, xs, cx) + lin(ctx, pxs, cp);
            p[i] = ctx->var(pxs[i]);
        } else {
            for (int j = 0; j < N; ++j) {
                cp[j] = m.Mbar[i][j];
                cx[j] = -m.Xi[i][j] / 2;
            }
            p[i] = lin(ctx, us, cp) + lin(ctx, xs, cx);
            u[i] = ctx->var(us[i]);
        }
    }
    for (int i = 0; i < N; ++i) {
        pu[i] = ctx->zero();
        for (int j = 0; j < N; ++j) pu[i] -= u[j].scaled(Coeff(m.Theta[i][j] / 2));
    }
    for (int i = 1; i <= N; ++i) {
        std::string s = std::to_string(i);
        if (which == FinalKind::I)
            out.identities.push_back({"u_" + s + " elimination", out.rep_symbols.at(gen::u(i)), u[i - 1]});
        else
            out.identities.push_back({"p^x_" + s + " elimination", out.rep_symbols.at(gen::px(i)), p[i - 1]});
        out.identities.push_back({"p_u_" + s + " elimination", out.rep_symbols.at(gen::pu(i)), pu[i - 1]});
        ScalarExpr v = ctx->zero();
        for (int j = 1; j <= N; ++j) v += A.sym(ctx->P(i, j), p[j - 1]);
        out.identities.push_back({"v_" + s + " elimination", out.rep_symbols.at(gen::v(i)), v});
    }
    ScalarExpr lam = ctx->zero();
    for (int j = 1; j <= N; ++j) lam -= A.sym(ctx->calG_inv() * ctx->G({j}), p[j - 1]);
    out.identities.push_back({"lambda elimination", out.rep_symbols.at(gen::lam()), lam});

    // printed assembly in the chart
    ScalarExpr c0 = A.h(1, rat(-N, 4));
    ScalarExpr tail = (m.UI + m.U2 + m.UQ).truncated(ord);
    ScalarExpr drift = ctx->zero();
    for (int i = 1; i <= N; ++i)
        for (int k = 1; k <= N; ++k)
            for (int l = 1; l <= N; ++l) {
                Rational cm = m.calM[k - 1][l - 1] / 4;
                if (sgn(cm) != 0) drift += A.sym(dx(m.Xt[i - 1][k - 1], l), p[i - 1]).scaled(Coeff(cm)).hbar_shifted(1);
            }
    ScalarExpr first = (c0 + A.kinetic(m.Xt, p) + drift.truncated(ord) + tail).truncated(ord);
    if (which == FinalKind::I) {
        out.identities.push_back({"final Hamiltonian I", *out.hamiltonian_symbol, (first + m.QU).truncated(ord)});
        out.notes.push_back({"final Hamiltonian I without the potential expansion term", *out.hamiltonian_symbol, first});
        return out;
    }
    std::vector<ScalarExpr> xv, uv;
    for (int i = 1; i <= N; ++i) {
        xv.push_back(ctx->x(i));
        uv.push_back(ctx->var(gen::u(i)));
    }
    Mat I = identity(N);
    MatS MXM = sandwich(m.Mbar, m.Xt, m.Mbar), XXM = sandwich(m.Xi, m.Xt, m.Mbar), XXX = sandwich(m.Xi, m.Xt, m.Xi);
    ScalarExpr AK = ctx->zero();
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            if (!XXM[i][j].is_zero()) AK += A.sym(XXM[i][j], A.sym(xv[i], uv[j])).scaled(Coeff::frac(1, 2));
            if (!XXX[i][j].is_zero()) AK -= A.sym(XXX[i][j], A.sym(xv[i], xv[j])).scaled(Coeff::frac(1, 8));
        }
    // contracted derivatives D_j = X~_jk;l calM_kl
    std::vector<ScalarExpr> D(N, ctx->zero());
    for (int j = 1; j <= N; ++j)
        for (int k = 1; k <= N; ++k)
            for (int l = 1; l <= N; ++l)
                if (sgn(m.calM[k - 1][l - 1]) != 0) D[j - 1] += dx(m.Xt[j - 1][k - 1], l).scaled(Coeff(m.calM[k - 1][l - 1]));
    for (int i = 0; i < N; ++i) {
        ScalarExpr a = ctx->zero(), b = ctx->zero();
        for (int j = 0; j < N; ++j) {
            a += D[j].scaled(Coeff(m.Mbar[i][j]));
            b += D[j].scaled(Coeff(m.Xi[i][j]));
        }
        AK += A.sym(a, uv[i]).scaled(Coeff::frac(1, 4)).hbar_shifted(1);
        AK += A.sym(b, xv[i]).scaled(Coeff::frac(1, 8)).hbar_shifted(1);
    }
    AK = AK.truncated(ord);
    ScalarExpr second = (c0 + A.kinetic(MXM, uv) + AK + tail).truncated(ord);
    out.identities.push_back({"A_K rewrite", first, second});
    out.identities.push_back({"final Hamiltonian II", *out.hamiltonian_symbol, (second + m.QU).truncated(ord)});
    out.notes.push_back({"final Hamiltonian II without the potential expansion term", *out.hamiltonian_symbol, second});

    // equivalence with the (x, p^x) chart
    auto chI = red.chart(concat({xs, pxs}));
    ConstBracket wI = red.reduced_bracket(concat({xs, pxs}));
    std::map<Generator, ScalarExpr> to_I;
    std::map<Generator, LinearForm> forms;
    for (auto g : xs) forms[g] = {{g, Rational(1)}};
    for (int i = 1; i <= N; ++i) {
        forms[gen::u(i)] = chI.at(gen::u(i));
        to_I[gen::u(i)] = linear_symbol(ctx, chI.at(gen::u(i)));
    }
    TableCheck eq{"final systems equivalence", {}};
    for (size_t a = 0; a < keep.size(); ++a)
        for (size_t b = a + 1; b < keep.size(); ++b)
            eq.entries.push_back({keep[a].name(), keep[b].name(), sc(ctx->num(pb_linear(forms[keep[a]], forms[keep[b]], wI))),
                                  sc(ctx->num(w.omega[a][b]))});
    out.tables.push_back(eq);
    out.identities.push_back({"final Hamiltonians agree", substitute_vars(*out.hamiltonian_symbol, to_I), R_I_symbol(red, m, chI)});
    (void)I;
    return out;
}

}  // namespace pomq
