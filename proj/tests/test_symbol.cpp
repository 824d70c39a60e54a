#include <gtest/gtest.h>

#include <random>

#include "pomq/hyper.hpp"
#include "pomq/symbol.hpp"

using namespace pomq;

namespace {

OperatorExpr random_op(const CtxPtr& ctx, const AlgebraTable& alg, const std::vector<Generator>& pool, std::mt19937& rng,
                       int max_len) {
    std::uniform_int_distribution<int> len(0, max_len), pick(0, int(pool.size()) - 1), coef(-2, 2), nt(1, 3);
    std::vector<std::pair<ScalarExpr, Word>> raw;
    int n = nt(rng);
    for (int t = 0; t < n; ++t) {
        ScalarExpr s = ctx->num(coef(rng));
        if (rng() % 3 == 0) s *= ctx->G({1});
        if (rng() % 4 == 0) s *= ctx->x(1);
        Word w;
        int l = len(rng);
        for (int k = 0; k < l; ++k) w.push_back(pool[pick(rng)]);
        raw.push_back({s, w});
    }
    return normal_order(raw, alg);
}

ScalarExpr random_poly(const CtxPtr& ctx, const std::vector<Generator>& vars, std::mt19937& rng, int deg) {
    std::uniform_int_distribution<int> pick(0, int(vars.size()) - 1), coef(-3, 3), len(0, deg);
    ScalarExpr s = ctx->zero();
    for (int t = 0; t < 4; ++t) {
        ScalarExpr m = ctx->num(coef(rng));
        int l = len(rng);
        for (int k = 0; k < l; ++k) m *= ctx->var(vars[pick(rng)]);
        s += m;
    }
    return s;
}

// Noncanonical constant bracket on (x1, x2, px1, px2).
ConstBracket skewed() {
    ConstBracket w;
    w.coords = {gen::x(1), gen::x(2), gen::px(1), gen::px(2)};
    w.omega = {{0, Rational(-2, 3), 1, 0}, {Rational(2, 3), 0, 0, 1}, {-1, 0, 0, Rational(1, 2)},
               {0, -1, Rational(-1, 2), 0}};
    return w;
}

}  // namespace

TEST(Symbol, BracketOfCoordinates) {
    auto ctx = Context::formal(2, 4);
    ConstBracket w = skewed();
    for (auto a : w.coords)
        for (auto b : w.coords) EXPECT_EQ(moyal_bracket(ctx->var(a), ctx->var(b), w, 4), ctx->num(w.get(a, b)));
}

TEST(Symbol, SymmetricPartIsAverage) {
    auto ctx = Context::formal(2, 4);
    ConstBracket w = skewed();
    std::mt19937 rng(7);
    for (int t = 0; t < 20; ++t) {
        auto f = random_poly(ctx, w.coords, rng, 3), g = random_poly(ctx, w.coords, rng, 3);
        ScalarExpr avg = (moyal(f, g, w, 4) + moyal(g, f, w, 4)).scaled(Coeff::frac(1, 2));
        EXPECT_TRUE((moyal_sym(f, g, w, 4) - avg).is_zero());
    }
}

TEST(Symbol, MoyalAssociative) {
    auto ctx = Context::formal(2, 6);
    ConstBracket w = skewed();
    std::mt19937 rng(11);
    for (int t = 0; t < 10; ++t) {
        auto f = random_poly(ctx, w.coords, rng, 2), g = random_poly(ctx, w.coords, rng, 2),
             h = random_poly(ctx, w.coords, rng, 2);
        EXPECT_TRUE((moyal(moyal(f, g, w, 6), h, w, 6) - moyal(f, moyal(g, h, w, 6), w, 6)).is_zero());
    }
}

// Operator products against Moyal products of symbols, with G coefficients.
TEST(Symbol, WeylAgreesWithOperatorProduct) {
    const int ord = 4;
    auto ctx = Context::formal(2, ord);
    CanonicalPairs pairs{{gen::x(1), gen::px(1)}, {gen::x(2), gen::px(2)}};
    AlgebraTable alg = AlgebraTable::canonical(ctx, pairs);
    ConstBracket w = ConstBracket::canonical(pairs);
    std::vector<Generator> pool{gen::x(2), gen::px(1), gen::px(2)};
    std::mt19937 rng(3);
    for (int t = 0; t < 25; ++t) {
        auto a = random_op(ctx, alg, pool, rng, 3), b = random_op(ctx, alg, pool, rng, 3);
        ScalarExpr sa = weyl_symbol(a, pairs, ord), sb = weyl_symbol(b, pairs, ord);
        EXPECT_EQ(weyl_operator(sa, pairs, ord), a);
        ScalarExpr lhs = weyl_symbol(multiply(a, b, alg, ord), pairs, ord);
        EXPECT_TRUE((lhs - moyal(sa, sb, w, ord)).is_zero()) << a << " | " << b;
    }
}

// With a commutative target, the symbol route and the hyper-operator route agree.
TEST(Symbol, LinearReductionMatchesProjector) {
    const int ord = 4;
    auto ctx = Context::formal(1, ord);
    CanonicalPairs pairs{{gen::x(1), gen::px(1)}, {gen::u(1), gen::pu(1)}};
    auto source = std::make_shared<AlgebraTable>(AlgebraTable::canonical(ctx, pairs));
    auto target = std::make_shared<AlgebraTable>(AlgebraTable::canonical(ctx, {{gen::x(1), gen::px(1)}}));
    AccsPair accs;
    accs.xi.push_back(source->op(gen::u(1)) - source->op(gen::px(1)));
    accs.pi.push_back(source->op(gen::pu(1)));
    std::map<Generator, OperatorExpr> images{{gen::u(1), target->op(gen::px(1))},
                                             {gen::pu(1), OperatorExpr(ctx->zero())}};
    Projector proj(source, target, accs, images);

    LinearReduction red(ctx, pairs, {{{gen::u(1), 1}, {gen::px(1), -1}}}, {{{gen::pu(1), 1}}});
    auto chart = red.chart({gen::x(1), gen::px(1)});
    CanonicalPairs tpairs{{gen::x(1), gen::px(1)}};

    std::vector<Generator> pool{gen::px(1), gen::u(1), gen::pu(1)};
    std::mt19937 rng(5);
    for (int t = 0; t < 25; ++t) {
        auto o = random_op(ctx, *source, pool, rng, 4);
        OperatorExpr viaOps = proj.project(o) + proj.q_correction(o);
        ScalarExpr s = weyl_symbol(o, pairs, ord);
        ScalarExpr viaSym = red.restrict(s + red.smear(s, ord), chart);
        EXPECT_TRUE((weyl_symbol(viaOps, tpairs, ord) - viaSym).is_zero()) << o;
    }
}
