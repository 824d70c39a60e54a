#include <gtest/gtest.h>

#include <chrono>

#include "pomq/model.hpp"

using namespace pomq;

namespace {

void expect_clean(const QuantumSystem& s) {
    for (const auto& t : s.tables) {
        EXPECT_TRUE(t.ok()) << t.label;
        for (const auto& m : t.mismatches()) ADD_FAILURE() << t.label << ": " << m;
    }
    for (const auto& i : s.identities) EXPECT_TRUE(i.ok()) << i.label << ": derived - expected = " << (i.derived - i.expected).str();
}

ModelSpec sphere(int N, Rational th, Rational et) {
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

ModelSpec formal(int N, Rational th = 0, Rational et = 0) {
    ModelSpec s;
    s.N = N;
    s.theta = th;
    s.eta = et;
    s.truncation = 2;
    return s;
}

}  // namespace

TEST(Model, InitialConsistency) {
    for (int N : {2, 3}) {
        auto s = build_initial(formal(N, 1, 1));
        expect_clean(s);
        EXPECT_TRUE(s.properties_hermitian);
    }
}

TEST(Model, Classification) {
    auto s = build_initial(formal(2, 1, 1));
    auto c = classify_constraints(s);
    EXPECT_EQ(c.A.size(), 4u);
    EXPECT_EQ(c.B.size(), 2u);
    EXPECT_EQ(c.C.size(), 2u);
    for (const auto& k : c.C) EXPECT_EQ(k.name, "phi4");
}

TEST(Model, Stage1) {
    auto s0 = build_initial(formal(2, 1, 1));
    auto s1 = project_stage1(s0);
    expect_clean(s1);
    EXPECT_TRUE(s1.properties_hermitian);
}

TEST(Model, Stage2) {
    auto t0 = std::chrono::steady_clock::now();
    auto s2 = project_stage2(project_stage1(build_initial(formal(2, 1, 1))));
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    expect_clean(s2);
    EXPECT_TRUE(s2.properties_hermitian);
    EXPECT_LT(secs, 60.0);
}

TEST(Model, RejectsBadSpec) {
    ModelSpec s = formal(1);
    EXPECT_THROW(build_initial(s), Error);
}


const ScalarCheck& note(const QuantumSystem& s, const std::string& label) {
    for (const auto& n : s.notes)
        if (n.label == label) return n;
    throw std::runtime_error("no note " + label);
}

QuantumSystem stage3(const ModelSpec& spec) {
    return project_stage3(project_stage2(project_stage1(build_initial(spec))), spec);
}

TEST(Model, Stage3) {
    ModelSpec spec = formal(2, 1, 1);
    auto t0 = std::chrono::steady_clock::now();
    auto s3 = stage3(spec);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    expect_clean(s3);
    EXPECT_TRUE(s3.properties_hermitian);
    EXPECT_LT(secs, 60.0);
    const auto& w = *s3.bracket;
    EXPECT_EQ(w.get(gen::x(1), gen::x(2)), Rational(-16, 9));
    EXPECT_FALSE(note(s3, "stage 3 Hamiltonian without the potential expansion term").ok());
    EXPECT_FALSE(note(s3, "potential expansion term in printed matrix form").ok());
}

// The printed matrix form of the potential term differs only through its Theta^2 part.
TEST(Model, Stage3PotentialTermSign) {
    EXPECT_TRUE(note(stage3(formal(2, 0, 1)), "potential expansion term in printed matrix form").ok());
    EXPECT_FALSE(note(stage3(formal(2, 1, 0)), "potential expansion term in printed matrix form").ok());
}

TEST(Model, Stage3CommutativeLimit) {
    auto s3 = stage3(formal(2));
    expect_clean(s3);
    const auto& w = *s3.bracket;
    for (int i = 1; i <= 2; ++i)
        for (int j = 1; j <= 2; ++j) {
            EXPECT_EQ(w.get(gen::x(i), gen::px(j)), Rational(i == j ? 1 : 0));
            EXPECT_EQ(w.get(gen::x(i), gen::x(j)), Rational(0));
            EXPECT_EQ(w.get(gen::px(i), gen::px(j)), Rational(0));
        }
}

TEST(Model, FinalSystems) {
    ModelSpec spec = formal(2, 1, 1);
    auto s3 = stage3(spec);
    auto f1 = finalize(s3, FinalKind::I);
    auto f2 = finalize(s3, FinalKind::II);
    expect_clean(f1);
    expect_clean(f2);
    EXPECT_TRUE(f1.properties_hermitian);
    EXPECT_TRUE(f2.properties_hermitian);
    EXPECT_EQ(*f1.hamiltonian_symbol, *s3.hamiltonian_symbol);
}

TEST(Model, SphereAllStages) {
    for (int N : {2, 3}) {
        ModelSpec spec = sphere(N, 1, 1);
        auto s0 = build_initial(spec);
        auto s1 = project_stage1(s0);
        auto s2 = project_stage2(s1);
        auto s3 = project_stage3(s2, spec);
        for (const auto* s : {&s0, &s1, &s2, &s3}) {
            expect_clean(*s);
            EXPECT_TRUE(s->properties_hermitian);
        }
        expect_clean(finalize(s3, FinalKind::I));
        expect_clean(finalize(s3, FinalKind::II));
        if (N == 2) EXPECT_EQ(s3.bracket->get(gen::x(1), gen::x(2)), Rational(-16, 9));
    }
}
