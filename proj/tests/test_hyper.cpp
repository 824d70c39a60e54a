#include <gtest/gtest.h>

#include <random>

#include "pomq/hyper.hpp"
#include "pomq/oracles.hpp"

using namespace pomq;

namespace {

// Positions x_1 with momentum, plus M abstract canonical ACCS pairs commuting with them.
struct Abstract {
    CtxPtr ctx;
    std::shared_ptr<AlgebraTable> source, target;
    std::unique_ptr<Projector> proj;

    explicit Abstract(int M, int order = 4) {
        ctx = Context::formal(1, order);
        std::vector<std::pair<Generator, Generator>> pairs{{gen::x(1), gen::px(1)}};
        for (int a = 1; a <= M; ++a) pairs.push_back({gen::xi(a), gen::pi(a)});
        source = std::make_shared<AlgebraTable>(AlgebraTable::canonical(ctx, pairs));
        target = std::make_shared<AlgebraTable>(AlgebraTable::canonical(ctx, {{gen::x(1), gen::px(1)}}));
        AccsPair accs;
        std::map<Generator, OperatorExpr> images;
        for (int a = 1; a <= M; ++a) {
            accs.xi.push_back(source->op(gen::xi(a)));
            accs.pi.push_back(source->op(gen::pi(a)));
            images[gen::xi(a)] = OperatorExpr(ctx->zero());
            images[gen::pi(a)] = OperatorExpr(ctx->zero());
        }
        proj = std::make_unique<Projector>(source, target, accs, images);
    }
    OperatorExpr op(Generator g) const { return source->op(g); }
    OperatorExpr mul(const OperatorExpr& a, const OperatorExpr& b) const { return multiply(a, b, *source); }
    OperatorExpr ih() const { return OperatorExpr(ctx->i() * ctx->hbar()); }
};

OperatorExpr random_op(const Abstract& A, std::mt19937& rng, int max_len) {
    std::vector<Generator> pool = A.source->generators();
    pool.push_back(gen::x(1));
    std::uniform_int_distribution<int> len(0, max_len), pick(0, int(pool.size()) - 1), coef(-2, 2), nt(1, 3);
    std::vector<std::pair<ScalarExpr, Word>> raw;
    int n = nt(rng);
    for (int t = 0; t < n; ++t) {
        ScalarExpr s = A.ctx->num(coef(rng));
        if (rng() % 3 == 0) s *= A.ctx->G({1});
        Word w;
        int l = len(rng);
        for (int k = 0; k < l; ++k) w.push_back(pool[pick(rng)]);
        raw.push_back({s, w});
    }
    return normal_order(raw, *A.source);
}

}  // namespace

TEST(Hyper, MinusActions) {
    Abstract A(1);
    auto xi = A.op(gen::xi(1)), pi = A.op(gen::pi(1));
    EXPECT_EQ(A.proj->minus_pi(0, xi, 4), OperatorExpr(A.ctx->num(-1)));
    EXPECT_EQ(A.proj->minus_xi(0, pi, 4), OperatorExpr(A.ctx->one()));
    EXPECT_EQ(A.proj->plus_xi(0, OperatorExpr(A.ctx->one()), 4), xi);
    OperatorExpr sym = A.proj->plus_pi(0, xi, 4);
    EXPECT_EQ(sym, A.mul(xi, pi) - A.ih().scaled(Coeff::frac(1, 2)));
}

TEST(Hyper, MinusTableAgreesWithCommutator) {
    auto ctx = Context::formal(2, 4);
    std::vector<std::pair<Generator, Generator>> pairs;
    for (int i = 1; i <= 2; ++i) {
        pairs.push_back({gen::x(i), gen::px(i)});
        pairs.push_back({gen::v(i), gen::pv(i)});
    }
    pairs.push_back({gen::lam(), gen::plam()});
    AlgebraTable alg = AlgebraTable::canonical(ctx, pairs);
    for (int k = 1; k <= 2; ++k) {
        OperatorExpr xi = alg.op(gen::v(k)) - alg.op(gen::px(k)) - OperatorExpr::term(ctx->G({k}), Word{gen::lam()});
        std::map<Generator, OperatorExpr> action;
        for (int i = 1; i <= 2; ++i) {
            action[gen::x(i)] = OperatorExpr(i == k ? ctx->one() : ctx->zero());
            action[gen::px(i)] = OperatorExpr::term(-ctx->G({k, i}), Word{gen::lam()});
            action[gen::pv(i)] = OperatorExpr(i == k ? ctx->one() : ctx->zero());
        }
        action[gen::plam()] = OperatorExpr(-ctx->G({k}));
        std::mt19937 rng(k);
        for (int t = 0; t < 10; ++t) {
            std::vector<std::pair<ScalarExpr, Word>> raw;
            Word w;
            for (int j = 0; j < 3; ++j) w.push_back(alg.generators()[rng() % alg.generators().size()]);
            raw.push_back({ctx->G({1 + int(rng() % 2)}), w});
            OperatorExpr o = normal_order(raw, alg);
            EXPECT_EQ(apply_minus_table(action, o, alg, 4), commutator_over_ihbar(xi, o, alg, 4));
        }
    }
}

TEST(Hyper, ProjectionBasics) {
    Abstract A(1);
    auto xi = A.op(gen::xi(1)), pi = A.op(gen::pi(1));
    EXPECT_TRUE(A.proj->project(xi).is_zero());
    EXPECT_TRUE(A.proj->project(pi).is_zero());
    OperatorExpr free = A.mul(OperatorExpr(A.ctx->G()), A.op(gen::px(1)));
    EXPECT_EQ(A.proj->project(free), free);
    EXPECT_EQ(A.proj->project(A.mul(xi, pi)), A.ih().scaled(Coeff::frac(1, 2)));
    EXPECT_EQ(A.proj->project(A.mul(pi, xi)), A.ih().scaled(Coeff::frac(-1, 2)));
    EXPECT_TRUE(A.proj->project(A.mul(xi, xi)).is_zero());
}

TEST(Hyper, QCorrection) {
    Abstract A(1);
    auto xi = A.op(gen::xi(1));
    EXPECT_TRUE(A.proj->q_correction(OperatorExpr(A.ctx->num(7))).is_zero());
    EXPECT_EQ(A.proj->q_correction(A.mul(xi, xi)), OperatorExpr(A.ctx->hbar().scaled(Coeff::frac(1, 2))));
}

TEST(Hyper, QMomentsMatchGaussianTable) {
    Abstract A(1, 8);
    auto xi = A.op(gen::xi(1)), pi = A.op(gen::pi(1));
    for (int a = 0; a <= 4; a += 2)
        for (int b = 0; a + b <= 6; b += 2) {
            // symbol-symmetric xi+^a pi+^b 1
            OperatorExpr o(A.ctx->one());
            for (int k = 0; k < b; ++k) o = A.proj->plus_pi(0, o, 8);
            for (int k = 0; k < a; ++k) o = A.proj->plus_xi(0, o, 8);
            OperatorExpr val = A.proj->project(o) + A.proj->q_correction(o);
            ScalarExpr expect = A.ctx->num(coherent_moment_table(a, b)) * A.ctx->hbar((a + b) / 2);
            EXPECT_EQ(val, OperatorExpr(expect)) << a << " " << b;
            double quad = coherent_moment(a, b, 1.0).real();
            EXPECT_NEAR(quad, coherent_moment_table(a, b).get_d(), 1e-10);
        }
}

TEST(Hyper, UnityDecomposition) {
    Abstract A(1);
    auto xi = A.op(gen::xi(1)), pi = A.op(gen::pi(1));
    EXPECT_TRUE(A.proj->check_unity_decomposition(xi, 1, true));
    EXPECT_FALSE(A.proj->check_unity_decomposition(xi, 1, false));
    EXPECT_TRUE(A.proj->check_unity_decomposition(A.op(gen::px(1)), 0, true));
    EXPECT_FALSE(A.proj->check_unity_decomposition(A.mul(xi, pi), 1, true));
    EXPECT_TRUE(A.proj->check_unity_decomposition(A.mul(xi, pi), 2, true));
    Abstract B(2);
    std::mt19937 rng(21);
    for (int t = 0; t < 10; ++t) {
        OperatorExpr o = random_op(B, rng, 3);
        EXPECT_TRUE(B.proj->check_unity_decomposition(o, 3, true));
    }
}

TEST(Hyper, StarProductBasics) {
    Abstract A(1);
    auto xi = A.op(gen::xi(1)), pi = A.op(gen::pi(1));
    OperatorExpr one(A.ctx->one());
    EXPECT_EQ(A.proj->star(one, pi, 4), pi);
    EXPECT_TRUE((A.proj->star(xi, pi, 4) - A.proj->star(pi, xi, 4)).is_zero());
}

TEST(Hyper, StarProductIdentities) {
    Abstract A(2);
    std::mt19937 rng(33);
    const AlgebraTable& tg = A.proj->target();
    for (int t = 0; t < 25; ++t) {
        OperatorExpr X = random_op(A, rng, 2), Y = random_op(A, rng, 2);
        OperatorExpr PX = A.proj->project(X), PY = A.proj->project(Y);
        OperatorExpr xy = A.proj->star(X, Y, 4), yx = A.proj->star(Y, X, 4);
        EXPECT_EQ(commutator(PX, PY, tg), A.proj->project(xy - yx));
        EXPECT_EQ(symmetrized(PX, PY, tg), A.proj->project(xy + yx).scaled(Coeff::frac(1, 2)));
        OperatorExpr pxy = A.proj->pstar(X, Y, 4), pyx = A.proj->pstar(Y, X, 4);
        EXPECT_EQ(A.proj->project(commutator(X, Y, *A.source)), pxy - pyx);
        EXPECT_EQ(A.proj->project(symmetrized(X, Y, *A.source)), (pxy + pyx).scaled(Coeff::frac(1, 2)));
    }
}

TEST(Hyper, HyperCommutatorAlgebra) {
    Abstract A(2);
    std::mt19937 rng(5);
    const Projector& P = *A.proj;
    for (int t = 0; t < 10; ++t) {
        OperatorExpr o = random_op(A, rng, 3);
        for (size_t a = 0; a < 2; ++a)
            for (size_t b = 0; b < 2; ++b) {
                OperatorExpr delta = a == b ? o : OperatorExpr(A.ctx);
                // [xi-_a, pi+_b] o = J o and [xi+_a, pi-_b] o = J o
                EXPECT_EQ(P.minus_xi(a, P.plus_pi(b, o, 4), 4) - P.plus_pi(b, P.minus_xi(a, o, 4), 4), delta);
                EXPECT_EQ(P.plus_xi(a, P.minus_pi(b, o, 4), 4) - P.minus_pi(b, P.plus_xi(a, o, 4), 4), delta);
                EXPECT_TRUE((P.minus_xi(a, P.minus_pi(b, o, 4), 4) - P.minus_pi(b, P.minus_xi(a, o, 4), 4)).is_zero());
                EXPECT_TRUE((P.plus_xi(a, P.plus_xi(b, o, 4), 4) - P.plus_xi(b, P.plus_xi(a, o, 4), 4)).is_zero());
            }
    }
}

TEST(Hyper, Idempotence) {
    Abstract A(2);
    std::mt19937 rng(8);
    for (int t = 0; t < 50; ++t) {
        OperatorExpr o = random_op(A, rng, 3);
        OperatorExpr p = A.proj->project(o);
        EXPECT_EQ(A.proj->project(p), p);
    }
}

TEST(Oracle, NaiveProjectionAgrees) {
    Abstract A(2);
    std::mt19937 rng(77);
    for (int t = 0; t < 100; ++t) {
        OperatorExpr o = random_op(A, rng, 3);
        EXPECT_EQ(naive_project(o, *A.proj), A.proj->project(o));
    }
    EXPECT_TRUE(naive_project(A.op(gen::xi(1)), *A.proj).is_zero());
    OperatorExpr big(A.ctx->one());
    for (int k = 0; k < 7; ++k) big = A.mul(big, A.op(gen::xi(1)));
    EXPECT_THROW(naive_project(big, *A.proj), Error);
}

TEST(Oracle, CoherentMoments) {
    EXPECT_NEAR(coherent_moment(2, 0, 1.0).real(), 0.5, 1e-10);
    EXPECT_NEAR(coherent_moment(0, 2, 1.0).real(), 0.5, 1e-10);
    EXPECT_NEAR(std::abs(coherent_moment(1, 0, 1.0)), 0.0, 1e-10);
    EXPECT_NEAR(std::abs(coherent_moment(0, 1, 1.0)), 0.0, 1e-10);
    EXPECT_NEAR(std::abs(coherent_moment(1, 1, 1.0)), 0.0, 1e-10);
    EXPECT_NEAR(coherent_moment(2, 0, 0.25).real(), 0.125, 1e-10);
    UncertaintyReport r = uncertainty_check(1.0);
    EXPECT_NEAR(r.product, 0.5, 1e-10);
    EXPECT_TRUE(r.minimal);
    UncertaintyReport e = uncertainty_check(1.0, {0.0, 1.0});
    EXPECT_GT(e.product, 0.5 + 1e-6);
}
