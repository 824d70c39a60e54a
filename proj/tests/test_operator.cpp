#include <gtest/gtest.h>

#include <random>

#include "pomq/operator.hpp"

using namespace pomq;

namespace {

AlgebraTable initial_table(const CtxPtr& c) {
    std::vector<std::pair<Generator, Generator>> pairs;
    for (int i = 1; i <= c->N(); ++i) {
        pairs.push_back({gen::x(i), gen::px(i)});
        pairs.push_back({gen::v(i), gen::pv(i)});
        pairs.push_back({gen::u(i), gen::pu(i)});
    }
    pairs.push_back({gen::lam(), gen::plam()});
    return AlgebraTable::canonical(c, pairs);
}

OperatorExpr random_op(const AlgebraTable& alg, std::mt19937& rng, int max_len) {
    const CtxPtr& c = alg.ctx();
    std::vector<Generator> pool;
    for (auto g : alg.generators()) pool.push_back(g);
    std::uniform_int_distribution<int> len(0, max_len), pick(0, int(pool.size()) - 1), coef(-2, 2), nt(1, 3);
    std::vector<std::pair<ScalarExpr, Word>> raw;
    int n = nt(rng);
    for (int t = 0; t < n; ++t) {
        ScalarExpr s = c->num(coef(rng));
        if (rng() % 2) s *= c->G({1 + int(rng() % c->N())});
        Word w;
        int l = len(rng);
        for (int k = 0; k < l; ++k) w.push_back(pool[pick(rng)]);
        raw.push_back({s, w});
    }
    return normal_order(raw, alg);
}

}  // namespace

TEST(Operator, CanonicalCommutators) {
    auto c = Context::formal(2, 4);
    AlgebraTable alg = initial_table(c);
    EXPECT_EQ(commutator(alg.op(gen::x(1)), alg.op(gen::px(1)), alg), OperatorExpr(c->i() * c->hbar()));
    EXPECT_TRUE(commutator(alg.op(gen::x(1)), alg.op(gen::x(2)), alg).is_zero());
    EXPECT_TRUE(commutator(alg.op(gen::x(1)), alg.op(gen::px(2)), alg).is_zero());
}

TEST(Operator, ThetaConstraintCommutator) {
    auto c = Context::formal(2, 4);
    AlgebraTable alg = initial_table(c);
    Rational theta(2, 3);
    // Theta^{ij} = theta eps^{ij}, eps^{ij} = 1 for i > j
    auto Theta = [&](int i, int j) { return i == j ? Rational(0) : (i > j ? theta : Rational(-theta)); };
    auto phi4 = [&](int i) {
        OperatorExpr o = alg.op(gen::pu(i));
        for (int j = 1; j <= 2; ++j) o += alg.op(gen::u(j)).scaled(Coeff(Rational(Theta(i, j) / 2)));
        return o;
    };
    OperatorExpr got = commutator(phi4(1), phi4(2), alg);
    EXPECT_EQ(got, OperatorExpr(c->num(-theta) * c->i() * c->hbar()));
}

TEST(Operator, NormalOrderSwaps) {
    auto c = Context::formal(2, 4);
    AlgebraTable alg = initial_table(c);
    OperatorExpr px_x = normal_order({{c->one(), Word{gen::px(1), gen::x(1)}}}, alg);
    OperatorExpr expect = OperatorExpr::term(c->x(1), Word{gen::px(1)}) - OperatorExpr(c->i() * c->hbar());
    EXPECT_EQ(px_x, expect);
    OperatorExpr pl_l = normal_order({{c->one(), Word{gen::plam(), gen::lam()}}}, alg);
    EXPECT_EQ(pl_l, OperatorExpr::term(c->one(), Word{gen::lam(), gen::plam()}) - OperatorExpr(c->i() * c->hbar()));
    OperatorExpr ordered = normal_order({{c->one(), Word{gen::v(1), gen::px(2)}}}, alg);
    EXPECT_EQ(ordered, OperatorExpr::term(c->one(), Word{gen::v(1), gen::px(2)}));
}

TEST(Operator, SymmetrizedProducts) {
    auto c = Context::formal(2, 4);
    AlgebraTable alg = initial_table(c);
    OperatorExpr psi(c->zero());
    for (int i = 1; i <= 2; ++i) psi += symmetrized(OperatorExpr(c->G({i})), alg.op(gen::v(i)), alg);
    OperatorExpr expect(c->zero());
    for (int i = 1; i <= 2; ++i) expect += OperatorExpr::term(c->G({i}), Word{gen::v(i)});
    EXPECT_EQ(psi, expect);
    OperatorExpr xp = symmetrized(alg.op(gen::x(1)), alg.op(gen::px(1)), alg);
    EXPECT_EQ(xp, OperatorExpr::term(c->x(1), Word{gen::px(1)}) -
                      OperatorExpr(c->i() * c->hbar() * c->num(Rational(1, 2))));
    OperatorExpr a = alg.op(gen::v(1)) + alg.op(gen::pv(1));
    EXPECT_EQ(symmetrized(a, a, alg), multiply(a, a, alg));
    EXPECT_TRUE(is_hermitian(xp, alg));
}

TEST(Operator, CoefficientMovesThroughMomentum) {
    auto c = Context::formal(2, 4);
    AlgebraTable alg = initial_table(c);
    OperatorExpr pg = multiply(alg.op(gen::px(1)), OperatorExpr(c->G()), alg);
    OperatorExpr expect = OperatorExpr::term(c->G(), Word{gen::px(1)}) - OperatorExpr(c->i() * c->hbar() * c->G({1}));
    EXPECT_EQ(pg, expect);
}

TEST(Operator, JacobiOnCanonicalTriples) {
    auto c = Context::formal(2, 4);
    AlgebraTable alg = initial_table(c);
    const auto& gs = alg.generators();
    for (auto a : gs)
        for (auto b : gs)
            for (auto d : gs) EXPECT_TRUE(check_jacobi(alg, a, b, d));
}

TEST(Operator, JacobiDetectsCorruptedTable) {
    auto c = Context::formal(2, 4);
    auto A = gen::custom("ja"), B = gen::custom("jb"), C = gen::custom("jc");
    AlgebraTable alg(c);
    alg.add_generators({A, B, C});
    alg.set(A, B, alg.op(C));
    EXPECT_TRUE(check_jacobi(alg, A, B, C));
    alg.set(B, C, alg.op(B));
    EXPECT_FALSE(check_jacobi(alg, A, B, C));
}

TEST(Operator, UnknownGeneratorThrows) {
    auto c = Context::formal(2, 4);
    AlgebraTable alg = AlgebraTable::canonical(c, {{gen::x(1), gen::px(1)}});
    EXPECT_THROW(alg.op(gen::lam()), Error);
}

TEST(Operator, AntisymmetryAndReassociation) {
    auto c = Context::formal(2, 4);
    AlgebraTable alg = initial_table(c);
    std::mt19937 rng(7);
    for (int k = 0; k < 30; ++k) {
        OperatorExpr a = random_op(alg, rng, 3), b = random_op(alg, rng, 3), d = random_op(alg, rng, 2);
        EXPECT_EQ(commutator(a, b, alg), -commutator(b, a, alg));
        EXPECT_EQ(multiply(multiply(a, b, alg), d, alg), multiply(a, multiply(b, d, alg), alg));
        OperatorExpr s = symmetrized(a + adjoint(a, alg), b + adjoint(b, alg), alg);
        EXPECT_TRUE(is_hermitian(s, alg));
        EXPECT_EQ(adjoint(adjoint(a, alg), alg), a);
    }
}

TEST(Operator, LeibnizRule) {
    auto c = Context::formal(2, 4);
    AlgebraTable alg = initial_table(c);
    std::mt19937 rng(9);
    for (int k = 0; k < 20; ++k) {
        OperatorExpr a = random_op(alg, rng, 2), b = random_op(alg, rng, 2), d = random_op(alg, rng, 2);
        OperatorExpr lhs = commutator(a, multiply(b, d, alg), alg);
        OperatorExpr rhs = multiply(commutator(a, b, alg), d, alg) + multiply(b, commutator(a, d, alg), alg);
        EXPECT_EQ(lhs, rhs);
    }
}
