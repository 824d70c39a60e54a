#include "model_internal.hpp"

namespace pomq::detail {

std::vector<Generator> initial_generators(int N) {
    std::vector<Generator> g;
    for (int i = 1; i <= N; ++i) g.push_back(gen::x(i));
    for (int i = 1; i <= N; ++i) g.push_back(gen::px(i));
    for (int i = 1; i <= N; ++i) g.push_back(gen::v(i));
    for (int i = 1; i <= N; ++i) g.push_back(gen::pv(i));
    g.push_back(gen::lam());
    g.push_back(gen::plam());
    for (int i = 1; i <= N; ++i) g.push_back(gen::u(i));
    for (int i = 1; i <= N; ++i) g.push_back(gen::pu(i));
    return g;
}

CanonicalPairs pairs_for(int N, bool v, bool lam) {
    CanonicalPairs p;
    for (int i = 1; i <= N; ++i) p.push_back({gen::x(i), gen::px(i)});
    if (v)
        for (int i = 1; i <= N; ++i) p.push_back({gen::v(i), gen::pv(i)});
    if (lam) p.push_back({gen::lam(), gen::plam()});
    for (int i = 1; i <= N; ++i) p.push_back({gen::u(i), gen::pu(i)});
    return p;
}

TableCheck generator_table(const std::string& label, const std::vector<Generator>& gens,
                           const std::map<Generator, OperatorExpr>& reps, const AlgebraTable& alg, const Expect& expect) {
    TableCheck t{label, {}};
    const CtxPtr& ctx = alg.ctx();
    int ord = ctx->order();
    for (size_t a = 0; a < gens.size(); ++a)
        for (size_t b = a + 1; b < gens.size(); ++b) {
            Generator ga = gens[a], gb = gens[b];
            OperatorExpr d = commutator_over_ihbar(reps.at(ga), reps.at(gb), alg, ord);
            OperatorExpr e(ctx);
            if (auto v = expect(ga, gb))
                e = *v;
            else if (auto w = expect(gb, ga))
                e = -*w;
            t.entries.push_back({ga.name(), gb.name(), d, e.truncated(ord)});
        }
    return t;
}

TableCheck constraint_table(const std::string& label, const std::vector<NamedOp>& ops, const AlgebraTable& alg,
                            const std::function<std::optional<OperatorExpr>(const NamedOp&, const NamedOp&)>& expect) {
    TableCheck t{label, {}};
    const CtxPtr& ctx = alg.ctx();
    int ord = ctx->order();
    for (size_t a = 0; a < ops.size(); ++a)
        for (size_t b = a + 1; b < ops.size(); ++b) {
            OperatorExpr d = commutator_over_ihbar(ops[a].op, ops[b].op, alg, ord);
            OperatorExpr e(ctx);
            if (auto v = expect(ops[a], ops[b]))
                e = *v;
            else if (auto w = expect(ops[b], ops[a]))
                e = -*w;
            t.entries.push_back({ops[a].label(), ops[b].label(), d, e.truncated(ord)});
        }
    return t;
}

Rational theta_ij(const ModelSpec& s, int i, int j) { return s.theta * epsilon(s.N)[i - 1][j - 1]; }

OperatorExpr phi4(const AlgebraTable& alg, const ModelSpec& s, int i) {
    OperatorExpr o = alg.op(gen::pu(i));
    for (int j = 1; j <= s.N; ++j) {
        Rational t = theta_ij(s, i, j) / 2;
        if (sgn(t) != 0) o += alg.op(gen::u(j)).scaled(Coeff(t));
    }
    return o;
}

}  // namespace pomq::detail
