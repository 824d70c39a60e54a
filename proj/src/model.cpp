#include "pomq/model.hpp"

#include "model_internal.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

namespace pomq {

using namespace detail;

const char* stage_name(Stage s) {
    switch (s) {
        case Stage::S: return "S";
        case Stage::S1: return "S1";
        case Stage::S2: return "S2";
        case Stage::S3: return "S3";
        case Stage::StarI: return "StarI";
        case Stage::StarII: return "StarII";
    }
    return "?";
}

CtxPtr ModelSpec::context() const {
    validate();
    if (G) return Context::bound(N, truncation, *G);
    return Context::formal(N, truncation);
}

void ModelSpec::validate() const {
    if (N < 2 || N > atom::kMaxDims) throw Error(ErrorKind::ValidationError, "N must lie in [2, 9]");
    if (truncation < 1) throw Error(ErrorKind::ValidationError, "order must be at least 1");
    Mat M = identity(N) + scaled(scaled(epsilon(N), theta) * scaled(epsilon(N), eta), rat(1, 4));
    try {
        invert(M);
    } catch (const Error&) {
        throw Error(ErrorKind::ValidationError, "I + Theta Xi / 4 is singular for theta = " + theta.get_str() +
                                                    ", eta = " + eta.get_str());
    }
}

std::string NamedOp::label() const { return index ? name + "_" + std::to_string(index) : name; }

bool TableCheck::ok() const {
    return std::all_of(entries.begin(), entries.end(), [](const TableEntry& e) { return e.ok(); });
}

std::vector<std::string> TableCheck::mismatches() const {
    std::vector<std::string> out;
    for (const auto& e : entries)
        if (!e.ok()) out.push_back("[" + e.a + ", " + e.b + "]: derived " + e.derived.str() + ", expected " + e.expected.str());
    return out;
}

bool QuantumSystem::all_checks_pass() const {
    for (const auto& t : tables)
        if (!t.ok()) return false;
    for (const auto& s : identities)
        if (!s.ok()) return false;
    return true;
}

namespace {

// Evaluates a commutative classical expression on the constraint surface of the initial system.
ScalarExpr on_surface(const ScalarExpr& f, const ModelSpec& spec) {
    const CtxPtr& ctx = f.ctx();
    int N = spec.N;
    std::map<Generator, ScalarExpr> s1;
    for (int i = 1; i <= N; ++i) {
        s1[gen::pv(i)] = ctx->zero();
        s1[gen::v(i)] = ctx->var(gen::px(i)) + ctx->G({i}) * ctx->var(gen::lam());
        ScalarExpr pu = ctx->zero();
        for (int j = 1; j <= N; ++j) pu -= ctx->var(gen::u(j)).scaled(Coeff(theta_ij(spec, i, j) / 2));
        s1[gen::pu(i)] = pu;
    }
    s1[gen::plam()] = ctx->zero();
    ScalarExpr lam = ctx->zero();
    for (int k = 1; k <= N; ++k) lam -= ctx->calG_inv() * ctx->G({k}) * ctx->var(gen::px(k));
    std::map<Generator, ScalarExpr> s2{{gen::lam(), lam}};
    return substitute_vars(substitute_vars(f, s1), s2);
}

}  // namespace

QuantumSystem build_initial(const ModelSpec& spec) {
    QuantumSystem sys;
    sys.stage = Stage::S;
    sys.spec = spec;
    sys.ctx = spec.context();
    const CtxPtr& ctx = sys.ctx;
    int N = spec.N;
    auto alg = std::make_shared<AlgebraTable>(AlgebraTable::canonical(ctx, pairs_for(N, true, true)));
    sys.algebra = alg;
    sys.generators = initial_generators(N);
    for (auto g : sys.generators) sys.reps[g] = alg->op(g);

    for (int i = 1; i <= N; ++i)
        sys.constraints.push_back(
            {"phi1", i, alg->op(gen::v(i)) - alg->op(gen::px(i)) - OperatorExpr::term(ctx->G({i}), Word{gen::lam()})});
    for (int i = 1; i <= N; ++i) sys.constraints.push_back({"phi2", i, alg->op(gen::pv(i))});
    sys.constraints.push_back({"phi3", 0, alg->op(gen::plam())});
    for (int i = 1; i <= N; ++i) sys.constraints.push_back({"phi4", i, phi4(*alg, spec, i)});
    OperatorExpr psi1(ctx);
    for (int i = 1; i <= N; ++i) psi1 += symmetrized(sc(ctx->G({i})), alg->op(gen::v(i)), *alg);
    sys.constraints.push_back({"psi1", 0, psi1});

    auto vv = [&](int k, int l) { return multiply(alg->op(gen::v(k)), alg->op(gen::v(l)), *alg); };
    OperatorExpr H(ctx);
    for (int i = 1; i <= N; ++i) {
        const OperatorExpr& phi1 = sys.constraints[i - 1].op;
        H += symmetrized(-alg->op(gen::v(i)), phi1, *alg);
        OperatorExpr mu2(ctx);
        for (int k = 1; k <= N; ++k)
            for (int l = 1; l <= N; ++l) mu2 += vv(k, l).left_scaled(ctx->mu2(i, k, l), ctx->order());
        H += symmetrized(mu2, alg->op(gen::pv(i)), *alg);
    }
    OperatorExpr mu3(ctx);
    for (int k = 1; k <= N; ++k)
        for (int l = 1; l <= N; ++l) mu3 += vv(k, l).left_scaled(ctx->mu3(k, l), ctx->order());
    H += symmetrized(mu3, alg->op(gen::plam()), *alg);
    OperatorExpr h0(ctx);
    for (int i = 1; i <= N; ++i) h0 += vv(i, i).scaled(Coeff::frac(1, 2));
    H += h0;
    sys.hamiltonian = H;

    for (int i = 1; i <= N; ++i)
        for (int k = 1; k <= N; ++k)
            for (int l = 1; l <= N; ++l)
                sys.identities.push_back({"multiplier relation " + std::to_string(i) + std::to_string(k) + std::to_string(l),
                                          ctx->mu2(i, k, l), ctx->G({i}) * ctx->mu3(k, l)});
    sys.tables.push_back(verify_consistency_algebra(sys));
    sys.tables.push_back(consistency_audit(sys));
    sys.properties_hermitian = is_hermitian(H, *alg);
    return sys;
}

TableCheck verify_consistency_algebra(const QuantumSystem& sys) {
    const CtxPtr& ctx = sys.ctx;
    int N = ctx->N();
    const AlgebraTable& alg = *sys.algebra;
    ModelSpec spec = sys.spec;
    spec.N = N;
    auto expect = [&](const NamedOp& a, const NamedOp& b) -> std::optional<OperatorExpr> {
        if (a.name == "phi1" && b.name == "phi2") return sc(a.index == b.index ? ctx->one() : ctx->zero());
        if (a.name == "phi1" && b.name == "phi3") return sc(-ctx->G({a.index}));
        if (a.name == "phi1" && b.name == "psi1") {
            OperatorExpr o(ctx);
            for (int j = 1; j <= N; ++j) o += OperatorExpr::term(ctx->G({a.index, j}), Word{gen::v(j)});
            return o;
        }
        if (a.name == "phi2" && b.name == "psi1") return sc(-ctx->G({a.index}));
        if (a.name == "phi4" && b.name == "phi4") return sc(ctx->num(theta_ij(spec, a.index, b.index)));
        return std::nullopt;
    };
    return constraint_table("consistency algebra", sys.constraints, alg, [&](const NamedOp& a, const NamedOp& b) {
        auto v = expect(a, b);
        if (v) return v;
        // everything not listed vanishes; report zero for one orientation only
        bool listed = expect(b, a).has_value();
        return listed ? std::nullopt : std::optional<OperatorExpr>(OperatorExpr(ctx));
    });
}

TableCheck consistency_audit(const QuantumSystem& sys) {
    TableCheck t{"time evolution closes on constraints", {}};
    const CtxPtr& ctx = sys.ctx;
    const AlgebraTable& alg = *sys.algebra;
    CanonicalPairs pairs = pairs_for(ctx->N(), true, true);
    for (const auto& c : sys.constraints) {
        OperatorExpr d = commutator_over_ihbar(c.op, sys.hamiltonian, alg, 0);
        ScalarExpr classical = weyl_symbol(d, pairs, 0).hbar_part(0);
        t.entries.push_back({c.label(), "H", sc(on_surface(classical, sys.spec)), OperatorExpr(ctx)});
    }
    return t;
}

Classification classify_constraints(const QuantumSystem& sys) {
    const auto& K = sys.constraints;
    const AlgebraTable& alg = *sys.algebra;
    size_t n = K.size();
    std::vector<std::vector<OperatorExpr>> C(n, std::vector<OperatorExpr>(n));
    for (size_t a = 0; a < n; ++a)
        for (size_t b = 0; b < n; ++b) C[a][b] = commutator_over_ihbar(K[a].op, K[b].op, alg, sys.ctx->order());
    // connected components of the bracket graph
    std::vector<int> comp(n, -1);
    int nc = 0;
    for (size_t s = 0; s < n; ++s) {
        if (comp[s] >= 0) continue;
        std::vector<size_t> stack{s};
        comp[s] = nc;
        while (!stack.empty()) {
            size_t a = stack.back();
            stack.pop_back();
            for (size_t b = 0; b < n; ++b)
                if (comp[b] < 0 && !C[a][b].is_zero()) {
                    comp[b] = nc;
                    stack.push_back(b);
                }
        }
        ++nc;
    }
    auto is_const = [](const OperatorExpr& o) { return o.is_scalar() && o.scalar_part().is_constant(); };
    Classification out;
    for (int c = 0; c < nc; ++c) {
        std::vector<size_t> mem;
        for (size_t a = 0; a < n; ++a)
            if (comp[a] == c) mem.push_back(a);
        bool all_const = true;
        for (auto a : mem)
            for (auto b : mem) all_const = all_const && is_const(C[a][b]);
        if (all_const) {
            for (auto a : mem) out.C.push_back(K[a]);
            continue;
        }
        // families pairing as [X_i, Y_j] = delta_ij
        std::set<std::string> fams, paired;
        for (auto a : mem) fams.insert(K[a].name);
        for (const auto& f1 : fams)
            for (const auto& f2 : fams) {
                if (f1 == f2) continue;
                bool delta = true;
                int ones = 0;
                for (auto a : mem)
                    for (auto b : mem)
                        if (K[a].name == f1 && K[b].name == f2) {
                            bool want_one = K[a].index == K[b].index;
                            ones += want_one;
                            delta = delta && is_const(C[a][b]) &&
                                    C[a][b].scalar_part().constant_value() == Coeff(want_one ? 1 : 0);
                        }
                if (delta && ones > 0) {
                    paired.insert(f1);
                    paired.insert(f2);
                }
            }
        for (auto a : mem) (paired.count(K[a].name) ? out.A : out.B).push_back(K[a]);
    }
    return out;
}

QuantumSystem project_stage1(const QuantumSystem& sys) {
    if (sys.stage != Stage::S) throw Error(ErrorKind::InvalidSpec, "stage 1 starts from the initial system");
    const CtxPtr& ctx = sys.ctx;
    int N = ctx->N(), ord = ctx->order();
    auto src = sys.algebra;
    auto tgt = std::make_shared<AlgebraTable>(AlgebraTable::canonical(ctx, pairs_for(N, false, true)));
    Classification cls = classify_constraints(sys);
    AccsPair accs;
    for (const auto& c : cls.A)
        (c.name == "phi1" ? accs.xi : accs.pi).push_back(c.op);
    std::map<Generator, OperatorExpr> images;
    for (int i = 1; i <= N; ++i) {
        images[gen::v(i)] = src->op(gen::px(i)) + OperatorExpr::term(ctx->G({i}), Word{gen::lam()});
        images[gen::pv(i)] = OperatorExpr(ctx);
    }
    auto P = std::make_shared<Projector>(src, tgt, accs, images);

    QuantumSystem out;
    out.stage = Stage::S1;
    out.spec = sys.spec;
    out.ctx = ctx;
    out.algebra = tgt;
    out.generators = tgt->generators();
    out.projector = P;
    for (const auto& c : cls.A)
        if (!P->project(c.op).is_zero()) throw Error(ErrorKind::ProjectionResidual, c.label() + " does not vanish");
    for (const auto& [g, r] : sys.reps) out.reps[g] = P->project(r);
    for (int i = 1; i <= N; ++i) {
        out.eliminated[gen::v(i)] = out.reps[gen::v(i)];
        out.eliminated[gen::pv(i)] = out.reps[gen::pv(i)];
    }

    auto& R = out.reps;
    OperatorExpr lam = tgt->op(gen::lam());
    Expect expect = [&](Generator a, Generator b) -> std::optional<OperatorExpr> {
        if (a.kind == GenKind::X && b.kind == GenKind::PX) return sc(a.index == b.index ? ctx->one() : ctx->zero());
        if (a.kind == GenKind::X && b.kind == GenKind::V) return sc(a.index == b.index ? ctx->one() : ctx->zero());
        if (a.kind == GenKind::V && b.kind == GenKind::PX) return lam.left_scaled(ctx->G({a.index, b.index}), ord);
        if (a.kind == GenKind::V && b.kind == GenKind::PLambda) return sc(ctx->G({a.index}));
        if (a.kind == GenKind::Lambda && b.kind == GenKind::PLambda) return sc(ctx->one());
        if (a.kind == GenKind::U && b.kind == GenKind::PU) return sc(a.index == b.index ? ctx->one() : ctx->zero());
        return std::nullopt;
    };
    out.tables.push_back(generator_table("stage 1 algebra", sys.generators, R, *tgt, expect));

    // remaining constraints
    TableCheck rem{"stage 1 remaining constraints", {}};
    std::vector<NamedOp> remaining;
    for (const auto& c : sys.constraints) {
        if (c.name == "phi1" || c.name == "phi2") continue;
        NamedOp p{c.name, c.index, P->project(c.op)};
        OperatorExpr e(ctx);
        if (c.name == "phi3") e = tgt->op(gen::plam());
        if (c.name == "phi4") e = phi4(*tgt, sys.spec, c.index);
        if (c.name == "psi1")
            for (int i = 1; i <= N; ++i) e += symmetrized(sc(ctx->G({i})), R.at(gen::v(i)), *tgt);
        rem.entries.push_back({c.label(), "P", p.op, e});
        remaining.push_back(p);
    }
    out.tables.push_back(rem);
    out.constraints = remaining;
    out.tables.push_back(constraint_table(
        "stage 1 constraint algebra", remaining, *tgt, [&](const NamedOp& a, const NamedOp& b) -> std::optional<OperatorExpr> {
            if (a.name == "psi1" && b.name == "phi3") return sc(ctx->calG());
            if (a.name == "phi4" && b.name == "phi4") return sc(ctx->num(theta_ij(sys.spec, a.index, b.index)));
            if ((a.name == "phi4") != (b.name == "phi4")) return OperatorExpr(ctx);
            if (a.name == "phi3" && b.name == "psi1") return std::nullopt;
            return std::nullopt;
        }));

    out.p_part = P->project(sys.hamiltonian);
    out.q_part = P->q_correction(sys.hamiltonian);
    out.hamiltonian = out.p_part + out.q_part;

    // constant and kinetic pieces
    ScalarExpr s1 = out.hamiltonian.scalar_part();
    out.identities.push_back({"stage 1 constant at hbar^1", s1.hbar_part(1), ctx->num(rat(-N, 4))});
    OperatorExpr lead(ctx);
    for (int i = 1; i <= N; ++i)
        lead += multiply(R.at(gen::v(i)), R.at(gen::v(i)), *tgt).scaled(Coeff::frac(1, 2));
    OperatorExpr quartic(ctx);
    for (int k = 1; k <= N; ++k)
        for (int l = 1; l <= N; ++l)
            quartic += symmetrized(sc(ctx->mu3(k, l)), multiply(R.at(gen::v(k)), R.at(gen::v(l)), *tgt), *tgt);
    lead += symmetrized(quartic, tgt->op(gen::plam()), *tgt);
    out.tables.push_back({"stage 1 leading Hamiltonian", {{"H", "hbar^0", out.hamiltonian.hbar_part(0), lead.hbar_part(0)}}});
    out.properties_hermitian = is_hermitian(out.hamiltonian, *tgt);
    return out;
}

QuantumSystem project_stage2(const QuantumSystem& sys) {
    if (sys.stage != Stage::S1) throw Error(ErrorKind::InvalidSpec, "stage 2 starts from stage 1");
    const CtxPtr& ctx = sys.ctx;
    int N = ctx->N(), ord = ctx->order();
    auto src = sys.algebra;
    auto tgt = std::make_shared<AlgebraTable>(AlgebraTable::canonical(ctx, pairs_for(N, false, false)));
    const auto& R1 = sys.reps;

    AccsPair accs;
    OperatorExpr xi(ctx);
    for (int i = 1; i <= N; ++i) xi += symmetrized(sc(ctx->calG_inv() * ctx->G({i})), R1.at(gen::v(i)), *src);
    accs.xi.push_back(xi);
    accs.pi.push_back(src->op(gen::plam()));
    OperatorExpr lam_img(ctx);
    for (int i = 1; i <= N; ++i) lam_img -= symmetrized(sc(ctx->calG_inv() * ctx->G({i})), src->op(gen::px(i)), *src);
    std::map<Generator, OperatorExpr> images{{gen::lam(), lam_img}, {gen::plam(), OperatorExpr(ctx)}};
    auto P = std::make_shared<Projector>(src, tgt, accs, images);

    QuantumSystem out;
    out.stage = Stage::S2;
    out.spec = sys.spec;
    out.ctx = ctx;
    out.algebra = tgt;
    out.generators = tgt->generators();
    out.projector = P;
    std::vector<NamedOp> remaining;
    for (const auto& c : sys.constraints) {
        OperatorExpr p = P->project(c.op);
        if (c.name == "phi3" || c.name == "psi1") {
            if (!p.is_zero()) throw Error(ErrorKind::ProjectionResidual, c.label() + " does not vanish");
            continue;
        }
        remaining.push_back({c.name, c.index, p});
    }
    for (const auto& [g, r] : R1) out.reps[g] = P->project(r);
    auto& R = out.reps;
    for (auto g : {gen::lam(), gen::plam()}) out.eliminated[g] = R.at(g);
    for (int i = 1; i <= N; ++i)
        for (auto g : {gen::v(i), gen::pv(i)}) out.eliminated[g] = R.at(g);

    // algebra of the projected set before elimination
    std::vector<Generator> gens;
    for (auto g : sys.reps)
        if (g.first.kind != GenKind::PV && g.first.kind != GenKind::PLambda) gens.push_back(g.first);
    OperatorExpr L = R.at(gen::lam());
    auto V = [&](int k) { return R.at(gen::v(k)); };
    auto delta = [&](int a, int b) { return sc(a == b ? ctx->one() : ctx->zero()); };
    Expect expect = [&](Generator a, Generator b) -> std::optional<OperatorExpr> {
        int i = a.index, j = b.index;
        if (a.kind == GenKind::X && b.kind == GenKind::PX) return delta(i, j);
        if (a.kind == GenKind::U && b.kind == GenKind::PU) return delta(i, j);
        if (a.kind == GenKind::V && b.kind == GenKind::V) {
            OperatorExpr o(ctx);
            for (int k = 1; k <= N; ++k) o += symmetrized(sc(ctx->mu2(i, j, k) - ctx->mu2(j, i, k)), V(k), *tgt);
            return o;
        }
        if (a.kind == GenKind::X && b.kind == GenKind::V) return sc(ctx->P(i, j));
        if (a.kind == GenKind::V && b.kind == GenKind::PX) {
            OperatorExpr o(ctx);
            for (int k = 1; k <= N; ++k) {
                o += symmetrized(L, sc(ctx->P(i, k) * ctx->G({k, j})), *tgt);
                o += symmetrized(sc(ctx->mu2(i, j, k)), V(k), *tgt);
            }
            return o;
        }
        if (a.kind == GenKind::X && b.kind == GenKind::Lambda) return sc(ctx->nu(i));
        if (a.kind == GenKind::Lambda && b.kind == GenKind::PX) {
            OperatorExpr o(ctx);
            for (int k = 1; k <= N; ++k) {
                o += symmetrized(sc(ctx->mu3(j, k)), V(k), *tgt);
                o += symmetrized(L, sc(ctx->mu2(k, j, k)), *tgt);
            }
            return o;
        }
        if (a.kind == GenKind::Lambda && b.kind == GenKind::V) {
            OperatorExpr o(ctx);
            for (int k = 1; k <= N; ++k) o += symmetrized(sc(ctx->mu3(j, k)), V(k), *tgt);
            return o;
        }
        return std::nullopt;
    };
    out.tables.push_back(generator_table("stage 2 intermediate algebra", gens, R, *tgt, expect));

    TableCheck elim{"stage 2 eliminations", {}};
    for (int i = 1; i <= N; ++i) {
        OperatorExpr e(ctx);
        for (int j = 1; j <= N; ++j) e += symmetrized(sc(ctx->P(i, j)), tgt->op(gen::px(j)), *tgt);
        elim.entries.push_back({gen::v(i).name(), "image", V(i), e});
        elim.entries.push_back({gen::pv(i).name(), "image", R.at(gen::pv(i)), OperatorExpr(ctx)});
    }
    OperatorExpr le(ctx);
    for (int i = 1; i <= N; ++i) le -= symmetrized(sc(ctx->calG_inv() * ctx->G({i})), tgt->op(gen::px(i)), *tgt);
    elim.entries.push_back({"lam", "image", L, le});
    elim.entries.push_back({"plam", "image", R.at(gen::plam()), OperatorExpr(ctx)});
    out.tables.push_back(elim);

    std::vector<Generator> kept;
    for (int i = 1; i <= N; ++i) kept.push_back(gen::x(i));
    for (int i = 1; i <= N; ++i) kept.push_back(gen::px(i));
    for (int i = 1; i <= N; ++i) kept.push_back(gen::u(i));
    for (int i = 1; i <= N; ++i) kept.push_back(gen::pu(i));
    out.tables.push_back(generator_table("stage 2 algebra", kept, R, *tgt, [&](Generator a, Generator b) -> std::optional<OperatorExpr> {
        if (a.kind == GenKind::X && b.kind == GenKind::PX) return delta(a.index, b.index);
        if (a.kind == GenKind::U && b.kind == GenKind::PU) return delta(a.index, b.index);
        return std::nullopt;
    }));

    TableCheck rem{"stage 2 remaining constraints", {}};
    for (const auto& c : remaining) rem.entries.push_back({c.label(), "P", c.op, phi4(*tgt, sys.spec, c.index)});
    out.tables.push_back(rem);
    out.constraints = remaining;
    out.tables.push_back(constraint_table("stage 2 constraint algebra", remaining, *tgt,
                                          [&](const NamedOp& a, const NamedOp& b) -> std::optional<OperatorExpr> {
                                              return sc(ctx->num(theta_ij(sys.spec, a.index, b.index)));
                                          }));

    out.p_part = P->project(sys.hamiltonian);
    out.q_part = P->q_correction(sys.hamiltonian);
    out.hamiltonian = out.p_part + out.q_part;
    KineticForm kf = kinetic_form(out.hamiltonian, *tgt);
    out.tables.push_back({"stage 2 Hamiltonian form", {{"H", "residual", kf.residual, OperatorExpr(ctx)}}});
    out.identities.push_back({"stage 2 constant at hbar^1", kf.U.hbar_part(1) - ctx->calG().scaled(Coeff::frac(1, 4)),
                              ctx->num(rat(-N, 4))});
    out.properties_hermitian = is_hermitian(out.hamiltonian, *tgt);
    (void)ord;
    return out;
}

KineticForm kinetic_form(const OperatorExpr& h, const AlgebraTable& alg) {
    const CtxPtr& ctx = alg.ctx();
    int N = ctx->N();
    KineticForm kf;
    kf.Mt.assign(N, std::vector<ScalarExpr>(N, ctx->zero()));
    for (int i = 1; i <= N; ++i)
        for (int j = i; j <= N; ++j) {
            ScalarExpr c = h.coeff(Word{gen::px(i), gen::px(j)});
            kf.Mt[i - 1][j - 1] = i == j ? c.scaled(Coeff(2)) : c;
            kf.Mt[j - 1][i - 1] = kf.Mt[i - 1][j - 1];
        }
    OperatorExpr rest = h - kinetic_operator(kf.Mt, alg);
    kf.U = rest.scalar_part();
    kf.residual = rest - OperatorExpr(kf.U);
    kf.constant = kf.U;
    return kf;
}

OperatorExpr kinetic_operator(const std::vector<std::vector<ScalarExpr>>& Mt, const AlgebraTable& alg) {
    const CtxPtr& ctx = alg.ctx();
    int N = ctx->N();
    OperatorExpr out(ctx);
    for (int i = 1; i <= N; ++i)
        for (int j = 1; j <= N; ++j) {
            OperatorExpr pp = symmetrized(alg.op(gen::px(i)), alg.op(gen::px(j)), alg);
            out += symmetrized(OperatorExpr(Mt[i - 1][j - 1]), pp, alg).scaled(Coeff::frac(1, 2));
        }
    return out;
}

}  // namespace pomq
