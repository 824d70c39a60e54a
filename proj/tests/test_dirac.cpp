#include <gtest/gtest.h>

#include "pomq/dirac.hpp"

using namespace pomq;

namespace {

ModelSpec sphere_spec(int N, Rational th, Rational et) {
    ModelSpec s;
    s.N = N;
    Poly g = Poly::constant(Coeff(-1));
    for (int k = 1; k <= N; ++k) g = g + Poly::atom(atom::var(gen::x(k)), 2);
    s.G = g;
    s.theta = th;
    s.eta = et;
    s.truncation = 2;
    return s;
}

QuantumSystem final_system(const ModelSpec& spec, FinalKind k) {
    auto s3 = project_stage3(project_stage2(project_stage1(build_initial(spec))), spec);
    return finalize(s3, k);
}

int min_order(const DiracReport& r, bool hamiltonian) {
    int m = -1;
    for (const auto& e : r.extras)
        if ((e.where == "H") == hamiltonian && (m < 0 || e.hbar < m)) m = e.hbar;
    return m;
}

Coeff constant_term(const ScalarExpr& e) {
    for (const auto& t : e.poly().terms)
        if (t.m.is_one()) return t.c;
    return Coeff();
}

}  // namespace

TEST(Dirac, LeadingOrderAgrees) {
    for (auto [th, et] : {std::pair<int, int>{1, 1}, {0, 0}, {1, 0}})
        for (auto k : {FinalKind::I, FinalKind::II}) {
            ModelSpec spec = sphere_spec(2, th, et);
            auto r = dirac_compare(final_system(spec, k), spec);
            EXPECT_TRUE(r.leading_agree()) << r.system << " theta " << th << " eta " << et;
            for (const auto& m : r.mismatches()) ADD_FAILURE() << m;
            EXPECT_EQ(r.brackets.size(), 91u);
            EXPECT_EQ(r.points.size(), 3u);
        }
}

TEST(Dirac, ThreeDimensions) {
    ModelSpec spec = sphere_spec(3, 1, 1);
    auto r = dirac_compare(final_system(spec, FinalKind::I), spec);
    EXPECT_TRUE(r.leading_agree());
}

TEST(Dirac, NoncommutativeCoordinates) {
    ModelSpec spec = sphere_spec(2, 1, 1);
    auto r = dirac_compare(final_system(spec, FinalKind::I), spec);
    for (const auto& e : r.brackets)
        if (e.a == "x_1" && e.b == "x_2")
            for (const auto& d : e.dirac) EXPECT_EQ(d, Rational(-16, 9));
}

TEST(Dirac, ExtraTerms) {
    ModelSpec spec = sphere_spec(2, 1, 1);
    auto r = dirac_compare(final_system(spec, FinalKind::I), spec);
    EXPECT_FALSE(r.extras.empty());
    EXPECT_EQ(min_order(r, false), 2);
    // the Hamiltonian already differs at hbar^1
    EXPECT_EQ(min_order(r, true), 1);
}

TEST(Dirac, HalfHbarConstant) {
    ModelSpec spec = sphere_spec(2, 0, 0);
    auto f = final_system(spec, FinalKind::I);
    EXPECT_EQ(constant_term(f.hamiltonian_symbol->hbar_part(1)), Coeff::frac(-2, 4));
}

TEST(Dirac, NeedsBoundSurface) {
    QuantumSystem q;
    q.stage = Stage::StarI;
    q.ctx = Context::formal(2, 2);
    ModelSpec spec;
    EXPECT_THROW(dirac_compare(q, spec), Error);
    q.stage = Stage::S3;
    EXPECT_THROW(dirac_compare(q, sphere_spec(2, 1, 1)), Error);
}
