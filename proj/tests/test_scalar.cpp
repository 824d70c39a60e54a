#include <gtest/gtest.h>

#include <random>

#include "pomq/scalar.hpp"

using namespace pomq;

namespace {

Poly sphere(int N) {
    Poly s = Poly::constant(Coeff(-1));
    for (int k = 1; k <= N; ++k) s = s + Poly::atom(atom::var(gen::x(k)), 2);
    return s;
}

ScalarExpr random_expr(const CtxPtr& c, std::mt19937& rng, bool with_functions) {
    std::uniform_int_distribution<int> nterms(1, 3), natoms(0, 4), coef(-3, 3);
    ScalarExpr e = c->zero();
    int n = nterms(rng);
    for (int t = 0; t < n; ++t) {
        ScalarExpr term = c->num(coef(rng));
        int na = natoms(rng);
        for (int a = 0; a < na; ++a) {
            int kind = std::uniform_int_distribution<int>(0, with_functions ? 4 : 1)(rng);
            int i = std::uniform_int_distribution<int>(1, c->N())(rng);
            int j = std::uniform_int_distribution<int>(1, c->N())(rng);
            switch (kind) {
                case 0:
                case 1: term *= c->x(i); break;
                case 2: term *= c->G({i}); break;
                case 3: term *= c->G({i, j}); break;
                default: term *= c->calG_inv(); break;
            }
        }
        e += term;
    }
    return e;
}

}  // namespace

TEST(Scalar, DerivativeOfGIsAtom) {
    auto c = Context::formal(2, 4);
    EXPECT_EQ(differentiate(c->G(), 1), c->G({1}));
    EXPECT_EQ(differentiate(c->G({1}), 2), c->G({1, 2}));
    EXPECT_EQ(c->G({2, 1}), c->G({1, 2}));
}

TEST(Scalar, DerivativeOfCalG) {
    auto c = Context::formal(3, 4);
    for (int i = 1; i <= 3; ++i) {
        ScalarExpr expect = c->zero();
        for (int k = 1; k <= 3; ++k) expect += c->num(2) * c->G({k}) * c->G({k, i});
        EXPECT_EQ(differentiate(c->calG(), i), expect);
    }
}

TEST(Scalar, DerivativeOfNu) {
    auto c = Context::formal(2, 4);
    for (int i = 1; i <= 2; ++i)
        for (int j = 1; j <= 2; ++j) {
            ScalarExpr dcal = differentiate(c->calG(), i);
            ScalarExpr expect = c->calG_inv() * c->calG_inv() * dcal * c->G({j}) - c->calG_inv() * c->G({j, i});
            EXPECT_EQ(differentiate(c->nu(j), i), expect);
        }
}

TEST(Scalar, InverseCancels) {
    auto c = Context::formal(3, 4);
    EXPECT_EQ(c->calG() * c->calG_inv(), c->one());
    EXPECT_EQ(c->calG() * c->calG_inv() * c->calG_inv(), c->calG_inv());
    EXPECT_EQ(c->G({1}) * c->G({1}) * c->calG_inv() + c->G({2}) * c->G({2}) * c->calG_inv() +
                  c->G({3}) * c->G({3}) * c->calG_inv(),
              c->one());
}

TEST(Scalar, SubstituteSphere) {
    auto f = Context::formal(2, 4);
    auto b = Context::bound(2, 4, sphere(2));
    for (int i = 1; i <= 2; ++i) EXPECT_EQ(substitute(f->G({i}), b), b->num(2) * b->x(i));
    EXPECT_EQ(substitute(f->x(1), b), b->x(1));
    ScalarExpr q = b->num(4) * (b->x(1) * b->x(1) + b->x(2) * b->x(2));
    EXPECT_EQ(q * substitute(f->calG_inv(), b), b->one());
}

TEST(Scalar, UnboundAndZeroSurface) {
    auto f = Context::formal(2, 4);
    EXPECT_THROW(eval_numeric(f->G({1}), {{gen::x(1), 1}, {gen::x(2), 0}}, 1), Error);
    EXPECT_THROW(Context::bound(2, 4, Poly::constant(Coeff(3))), Error);
}

TEST(Scalar, EvalNumeric) {
    auto b = Context::bound(2, 4, sphere(2));
    std::map<Generator, Rational> pt{{gen::x(1), 1}, {gen::x(2), 0}};
    EXPECT_EQ(eval_numeric(b->calG_inv(), pt, 1), Coeff(Rational(1, 4)));
    EXPECT_EQ(eval_numeric(b->num(2) * b->x(1), {{gen::x(1), 3}}, 1), Coeff(6));
    EXPECT_EQ(eval_numeric(b->hbar(2), {}, Rational(1, 2)), Coeff(Rational(1, 4)));
    EXPECT_THROW(eval_numeric(b->calG_inv(), {{gen::x(1), 0}, {gen::x(2), 0}}, 1), Error);
}

TEST(Scalar, TruncationRecordsDrops) {
    auto c = Context::formal(2, 2);
    uint64_t before = c->dropped();
    ScalarExpr e = c->hbar(2) * c->hbar(1);
    EXPECT_TRUE(e.is_zero());
    EXPECT_GT(c->dropped(), before);
}

TEST(Scalar, NormalFormIdempotent) {
    auto c = Context::formal(3, 4);
    std::mt19937 rng(11);
    for (int k = 0; k < 50; ++k) {
        ScalarExpr e = random_expr(c, rng, true) * c->calG();
        EXPECT_EQ(c->normal_form(e.poly()), e.poly());
    }
}

TEST(Scalar, DerivativesCommute) {
    auto c = Context::formal(3, 4);
    std::mt19937 rng(5);
    for (int k = 0; k < 50; ++k) {
        ScalarExpr e = random_expr(c, rng, true);
        for (int i = 1; i <= 3; ++i)
            for (int j = i + 1; j <= 3; ++j)
                EXPECT_EQ(differentiate(differentiate(e, i), j), differentiate(differentiate(e, j), i));
    }
}

TEST(Scalar, SubstituteCommutesWithDerivative) {
    std::mt19937 rng(17);
    std::uniform_int_distribution<int> coef(-3, 3), deg(0, 3);
    for (int N = 2; N <= 3; ++N) {
        for (int trial = 0; trial < 10; ++trial) {
            Poly surf = Poly::constant(Coeff(coef(rng)));
            for (int t = 0; t < 4; ++t) {
                Poly m = Poly::constant(Coeff(coef(rng)));
                for (int k = 1; k <= N; ++k) m = Poly::mul(m, Poly::atom(atom::var(gen::x(k)), deg(rng) % 2), 99);
                surf = surf + m;
            }
            surf = surf + Poly::atom(atom::var(gen::x(1)), 2);
            auto f = Context::formal(N, 4);
            auto b = Context::bound(N, 4, surf);
            for (int k = 0; k < 10; ++k) {
                ScalarExpr e = random_expr(f, rng, true);
                for (int i = 1; i <= N; ++i)
                    EXPECT_EQ(substitute(differentiate(e, i), b), differentiate(substitute(e, b), i));
            }
        }
    }
}

TEST(Scalar, EvalIsRingHomomorphism) {
    auto b = Context::bound(2, 6, sphere(2));
    std::mt19937 rng(3);
    std::map<Generator, Rational> pt{{gen::x(1), Rational(3, 5)}, {gen::x(2), Rational(-2, 7)}};
    Rational h(1, 3);
    for (int k = 0; k < 50; ++k) {
        ScalarExpr a = random_expr(b, rng, false) + b->calG_inv() * b->x(1);
        ScalarExpr c = random_expr(b, rng, false) + b->hbar(1) * b->x(2);
        EXPECT_EQ(eval_numeric(a + c, pt, h), eval_numeric(a, pt, h) + eval_numeric(c, pt, h));
        EXPECT_EQ(eval_numeric(a * c, pt, h), eval_numeric(a, pt, h) * eval_numeric(c, pt, h));
    }
}
