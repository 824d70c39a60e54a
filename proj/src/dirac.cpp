#include "pomq/dirac.hpp"

#include <algorithm>

#include "model_internal.hpp"

namespace pomq {

using namespace detail;

ScalarExpr poisson(const ScalarExpr& f, const ScalarExpr& g, const CanonicalPairs& pairs) {
    ScalarExpr out = f.ctx()->zero();
    for (const auto& [q, p] : pairs) {
        ScalarExpr fq = d_coord(f, q), gp = d_coord(g, p), fp = d_coord(f, p), gq = d_coord(g, q);
        if (!fq.is_zero() && !gp.is_zero()) out += fq * gp;
        if (!fp.is_zero() && !gq.is_zero()) out -= fp * gq;
    }
    return out;
}

namespace {

Rational value(const ScalarExpr& e, const PhasePoint& pt) {
    Coeff c = eval_numeric(e, pt, 0);
    if (!c.is_real()) throw Error(ErrorKind::Unsupported, "complex classical value " + e.str());
    return c.re;
}

Mat inverse_or_throw(const Mat& m) {
    try {
        return invert(m);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::DivisionByZero) throw;
        throw Error(ErrorKind::SingularConstraintMatrix, "constraint bracket matrix is singular at a sample point");
    }
}

// Rational points of the unit sphere by inverse stereographic projection,
// with fixed rational momenta.
std::vector<PhasePoint> chart_points(int N) {
    const std::vector<std::vector<Rational>> params{
        {rat(1, 2), rat(1, 3), rat(2, 5)}, {Rational(2), rat(-1, 3), rat(3, 7)}, {rat(-3, 4), Rational(5), rat(-1, 2)}};
    std::vector<PhasePoint> out;
    for (size_t k = 0; k < params.size(); ++k) {
        Rational s2 = 0;
        for (int i = 0; i < N - 1; ++i) s2 += params[k][i] * params[k][i];
        PhasePoint pt;
        for (int i = 0; i < N - 1; ++i) pt[gen::x(i + 1)] = 2 * params[k][i] / (s2 + 1);
        pt[gen::x(N)] = (s2 - 1) / (s2 + 1);
        for (int i = 1; i <= N; ++i) pt[gen::px(i)] = rat(long((i + 2 * k) % 5) - 2, long(k + i + 1));
        out.push_back(pt);
    }
    return out;
}

// Completes (x, p^x) to a point where every constraint vanishes; the
// constraints are affine in the remaining coordinates.
PhasePoint solve_surface(PhasePoint pt, const std::vector<ScalarExpr>& chi, const std::vector<Generator>& unknowns) {
    for (auto g : unknowns) pt[g] = 0;
    size_t n = unknowns.size();
    if (chi.size() != n) throw Error(ErrorKind::Unsupported, "constraint count does not match the eliminated coordinates");
    Mat J(n, std::vector<Rational>(n));
    std::vector<Rational> r(n);
    for (size_t a = 0; a < n; ++a) {
        r[a] = value(chi[a], pt);
        for (size_t u = 0; u < n; ++u) J[a][u] = value(d_coord(chi[a], unknowns[u]), pt);
    }
    Mat Ji = inverse_or_throw(J);
    for (size_t u = 0; u < n; ++u) {
        Rational y = 0;
        for (size_t a = 0; a < n; ++a) y -= Ji[u][a] * r[a];
        pt[unknowns[u]] = y;
    }
    for (const auto& c : chi)
        if (sgn(value(c, pt)) != 0) throw Error(ErrorKind::Unsupported, "constraints are not affine off the chart");
    return pt;
}

}  // namespace

bool DiracReport::leading_agree() const {
    if (!hamiltonian.ok()) return false;
    return std::all_of(brackets.begin(), brackets.end(), [](const DiracEntry& e) { return e.ok(); });
}

int DiracReport::min_extra_order() const {
    int m = -1;
    for (const auto& e : extras)
        if (m < 0 || e.hbar < m) m = e.hbar;
    return m;
}

std::vector<std::string> DiracReport::mismatches() const {
    std::vector<std::string> out;
    auto one = [&](const DiracEntry& e) {
        for (size_t k = 0; k < e.dirac.size(); ++k)
            if (e.dirac[k] != e.pom[k])
                out.push_back("{" + e.a + ", " + e.b + "} at point " + std::to_string(k) + ": Dirac " +
                              e.dirac[k].get_str() + ", projection " + e.pom[k].get_str());
    };
    for (const auto& e : brackets) one(e);
    one(hamiltonian);
    return out;
}

DiracReport dirac_compare(const QuantumSystem& sys_final, const ModelSpec& spec) {
    if (sys_final.stage != Stage::StarI && sys_final.stage != Stage::StarII)
        throw Error(ErrorKind::InvalidSpec, "Dirac comparison needs a final system");
    const CtxPtr& ctx = sys_final.ctx;
    if (ctx->mode() != GMode::Bound) throw Error(ErrorKind::InvalidSpec, "Dirac comparison needs a bound surface");
    int N = spec.N, ord = ctx->order();
    if (N != ctx->N()) throw Error(ErrorKind::InvalidSpec, "spec does not match the system");

    QuantumSystem s0 = build_initial(spec);
    CanonicalPairs pairs = pairs_for(N, true, true);
    std::vector<ScalarExpr> chi;
    for (const auto& c : s0.constraints) chi.push_back(weyl_symbol(c.op, pairs, ord).hbar_part(0));
    Mat eps = epsilon(N), Xi = scaled(eps, spec.eta), Th = scaled(eps, spec.theta);
    Mat Mbar = identity(N) - scaled(Th * Xi, rat(1, 4));
    for (int i = 0; i < N; ++i) {
        ScalarExpr c = -ctx->var(gen::px(i + 1));
        for (int j = 0; j < N; ++j) {
            c += ctx->var(gen::u(j + 1)).scaled(Coeff(Mbar[i][j]));
            c -= ctx->var(gen::x(j + 1)).scaled(Coeff(Xi[i][j] / 2));
        }
        chi.push_back(c);
    }
    ScalarExpr Hcl = weyl_symbol(s0.hamiltonian, pairs, ord).hbar_part(0);

    std::vector<Generator> gens = s0.generators, unknowns;
    for (auto g : gens)
        if (g.kind != GenKind::X && g.kind != GenKind::PX) unknowns.push_back(g);
    size_t n = chi.size();
    std::vector<std::vector<ScalarExpr>> C(n, std::vector<ScalarExpr>(n, ctx->zero()));
    for (size_t a = 0; a < n; ++a)
        for (size_t b = a + 1; b < n; ++b) {
            C[a][b] = poisson(chi[a], chi[b], pairs);
            C[b][a] = -C[a][b];
        }
    std::map<Generator, std::vector<ScalarExpr>> zc;
    for (auto g : gens)
        for (size_t a = 0; a < n; ++a) zc[g].push_back(poisson(ctx->var(g), chi[a], pairs));

    DiracReport rep;
    rep.system = stage_name(sys_final.stage);
    const ConstBracket& w = *sys_final.bracket;
    const auto& reps = sys_final.rep_symbols;
    for (const auto& base : chart_points(N)) rep.points.push_back(solve_surface(base, chi, unknowns));

    std::vector<Mat> Cinv;
    for (const auto& pt : rep.points) {
        Mat Cv(n, std::vector<Rational>(n));
        for (size_t a = 0; a < n; ++a)
            for (size_t b = 0; b < n; ++b) Cv[a][b] = value(C[a][b], pt);
        Cinv.push_back(inverse_or_throw(Cv));
    }

    for (size_t i = 0; i < gens.size(); ++i)
        for (size_t j = i + 1; j < gens.size(); ++j) {
            Generator a = gens[i], b = gens[j];
            DiracEntry e{a.name(), b.name(), {}, {}};
            ScalarExpr can = poisson(ctx->var(a), ctx->var(b), pairs);
            ScalarExpr mb = moyal_bracket(reps.at(a), reps.at(b), w, ord);
            ScalarExpr lead = mb.hbar_part(0);
            for (size_t k = 0; k < rep.points.size(); ++k) {
                const PhasePoint& pt = rep.points[k];
                Rational d = value(can, pt);
                std::vector<Rational> za(n), zb(n);
                for (size_t c = 0; c < n; ++c) {
                    za[c] = value(zc[a][c], pt);
                    zb[c] = value(zc[b][c], pt);
                }
                for (size_t c = 0; c < n; ++c)
                    for (size_t f = 0; f < n; ++f)
                        if (sgn(za[c]) != 0 && sgn(zb[f]) != 0) d += za[c] * Cinv[k][c][f] * zb[f];
                e.dirac.push_back(d);
                e.pom.push_back(value(lead, pt));
            }
            rep.brackets.push_back(e);
            for (int h = 1; h <= mb.max_hbar(); ++h) {
                ScalarExpr part = mb.hbar_part(h);
                if (!part.is_zero()) rep.extras.push_back({"[" + e.a + ", " + e.b + "]", h, part});
            }
        }

    const ScalarExpr& H = *sys_final.hamiltonian_symbol;
    rep.hamiltonian = {"H", "classical", {}, {}};
    for (const auto& pt : rep.points) {
        rep.hamiltonian.dirac.push_back(value(Hcl, pt));
        rep.hamiltonian.pom.push_back(value(H.hbar_part(0), pt));
    }
    for (int h = 1; h <= H.max_hbar(); ++h) {
        ScalarExpr part = H.hbar_part(h);
        if (!part.is_zero()) rep.extras.push_back({"H", h, part});
    }
    return rep;
}

}  // namespace pomq
