#include <gtest/gtest.h>

#include "pomq/appendix.hpp"

using namespace pomq;

namespace {

ModelSpec spec(int N, bool bound) {
    ModelSpec s;
    s.N = N;
    if (bound) {
        Poly g = Poly::constant(Coeff(-1));
        for (int k = 1; k <= N; ++k) g = g + Poly::atom(atom::var(gen::x(k)), 2);
        s.G = g;
    }
    s.truncation = 2;
    return s;
}

void expect_table(const TableCheck& t) {
    for (const auto& e : t.entries)
        EXPECT_TRUE(e.ok()) << e.a << " / " << e.b << ": " << (e.derived - e.expected);
}

}  // namespace

TEST(Appendix, LambdaRecursion) {
    auto ctx = Context::formal(2, 3);
    AppendixSeries s(ctx);
    const Family& V = s.V();
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            EXPECT_EQ(s.lambda(0)[i][j], i == j ? ctx->one() : ctx->zero());
            EXPECT_EQ(s.lambda(1)[i][j], V[i][j]);
            ScalarExpr l2 = s.nu_d(V[i][j]);
            for (int k = 0; k < 2; ++k) l2 += V[i][k] * V[k][j];
            EXPECT_TRUE((s.lambda(2)[i][j] - l2).is_zero());
        }
}

TEST(Appendix, BFamilyLowOrders) {
    auto ctx = Context::formal(2, 3);
    AppendixSeries s(ctx);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l) {
                    EXPECT_EQ(s.B(0, i, j, k, l), (i == k && j == l) ? ctx->one() : ctx->zero());
                    ScalarExpr b2 = s.lambda(2)[i][k] * s.lambda(0)[j][l] + s.lambda(0)[i][k] * s.lambda(2)[j][l] +
                                    (s.lambda(1)[i][k] * s.lambda(1)[j][l]).scaled(Coeff(2));
                    EXPECT_TRUE((s.B(2, i, j, k, l) - b2).is_zero());
                }
}

TEST(Appendix, SphereMatchesPipeline) {
    for (int N : {2, 3}) {
        auto s0 = build_initial(spec(N, true));
        auto s1 = project_stage1(s0);
        auto s2 = project_stage2(s1);
        expect_table(appendix_compare(s0, s1, s2));
    }
}

TEST(Appendix, FormalMatchesPipeline) {
    auto s0 = build_initial(spec(2, false));
    auto s1 = project_stage1(s0);
    auto s2 = project_stage2(s1);
    expect_table(appendix_compare(s0, s1, s2));
    auto st = stage2_structure(s2);
    expect_table(st.table);
    EXPECT_TRUE(st.u2_i.ok());
}

// The disputed term is div(x / r^2) on the sphere, zero only for N = 2.
TEST(Appendix, PrintedReadingDisagreesAtFirstOrder) {
    auto s0 = build_initial(spec(3, true));
    auto s1 = project_stage1(s0);
    auto s2 = project_stage2(s1);
    auto t = appendix_compare(s0, s1, s2, AppendixSeries::Reading::Printed);
    const auto& q1 = t.entries.front();
    EXPECT_FALSE(q1.ok());
    OperatorExpr diff = q1.derived - q1.expected;
    EXPECT_TRUE(diff.hbar_part(0).is_zero());
    EXPECT_FALSE(diff.hbar_part(1).is_zero());
}

TEST(Appendix, Stage2Structure) {
    for (int N : {2, 3}) {
        auto s2 = project_stage2(project_stage1(build_initial(spec(N, true))));
        auto st = stage2_structure(s2);
        expect_table(st.table);
        EXPECT_TRUE(st.u2_i.ok()) << (st.u2_i.derived - st.u2_i.expected);
    }
}
