#include <gtest/gtest.h>

#include "cli.hpp"
#include "pomq/appendix.hpp"

using namespace pomq;
using namespace pomq::cli;

namespace {

std::string error_of(const std::string& text, ErrorKind kind) {
    try {
        parse_model(text);
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), kind) << e.what();
        return e.what();
    }
    ADD_FAILURE() << "no error for\n" << text;
    return {};
}

}  // namespace

TEST(ModelFile, Sphere) {
    auto mf = parse_model("N = 2\nsurface = x_1^2 + x_2^2 - 1\n");
    ASSERT_TRUE(mf.spec.G.has_value());
    Poly want = Poly::constant(Coeff(-1)) + Poly::atom(atom::var(gen::x(1)), 2) + Poly::atom(atom::var(gen::x(2)), 2);
    EXPECT_EQ(*mf.spec.G, want);
    EXPECT_EQ(mf.spec.truncation, 2);
}

TEST(ModelFile, FormalAndRationals) {
    auto mf = parse_model("# comment\ndimension = 3\nsurface = formal\ntheta = 1/3   # trailing\neta = -2/4\norder = 1\n"
                          "checks = algebra,dirac\n");
    EXPECT_FALSE(mf.spec.G.has_value());
    EXPECT_EQ(mf.spec.N, 3);
    EXPECT_EQ(mf.spec.theta, Rational(1, 3));
    EXPECT_EQ(mf.spec.eta, Rational(-1, 2));
    EXPECT_EQ(mf.spec.truncation, 1);
    EXPECT_EQ(mf.checks, (std::vector<std::string>{"algebra", "dirac"}));
}

TEST(ModelFile, ErrorsCarryPosition) {
    EXPECT_NE(error_of("N = 2\ntheta = 0.5\n", ErrorKind::ParseError).find("line 2, column 10"), std::string::npos);
    EXPECT_NE(error_of("N = 2\nsurface = x_1^2 + * x_2\n", ErrorKind::ParseError).find("line 2, column 19"), std::string::npos);
    EXPECT_NE(error_of("N = 2\n  colour = red\n", ErrorKind::ParseError).find("line 2, column 3"), std::string::npos);
    error_of("N = 2\nN = 3\n", ErrorKind::ParseError);
    error_of("surface = formal\n", ErrorKind::ParseError);
    error_of("N = 2\nsurface = x_3 - 1\n", ErrorKind::ParseError);
    error_of("N = 2\nsurface = (x_1 - 1\n", ErrorKind::ParseError);
}

TEST(ModelFile, Validation) {
    error_of("N = 1\n", ErrorKind::ValidationError);
    error_of("N = 2\norder = 0\n", ErrorKind::ValidationError);
    error_of("N = 2\ntheta = 2\neta = 2\n", ErrorKind::ValidationError);
    error_of("N = 2\nsurface = 3\n", ErrorKind::ValidationError);
    error_of("N = 2\nsurface = px_1 + x_1\n", ErrorKind::ValidationError);
    EXPECT_NO_THROW(parse_model("N = 3\ntheta = 2\neta = 2\n"));
}

TEST(Checks, UnknownSuite) {
    PipelineRun run;
    EXPECT_THROW(run_checks({"algebra", "spectra"}, run), Error);
    EXPECT_THROW(parse_stage("S4"), Error);
    EXPECT_EQ(parse_stage("II"), Stage::StarII);
}

// Every emitted expression parses back to the same canonical form.
TEST(Report, RenderRoundTrip) {
    auto mf = parse_model("N = 2\nsurface = x_1^2 + x_2^2 - 1\ntheta = 1\neta = 1\n");
    PipelineRun run = run_pipeline(mf.spec);
    ASSERT_EQ(run.systems.size(), 6u);
    int n = 0;
    for (const auto& q : run.systems) {
        auto check = [&](const ScalarExpr& e) {
            EXPECT_EQ(parse_scalar(e.str(), q.ctx), e) << e.str();
            ++n;
        };
        if (q.hamiltonian_symbol)
            for (int k = 0; k <= 2; ++k) check(q.hamiltonian_symbol->hbar_part(k));
        for (const auto& [w, c] : q.hamiltonian.terms()) check(c);
        for (const auto& [p, v] : q.algebra->entries())
            for (const auto& [w, c] : v.terms()) check(c);
    }
    EXPECT_GT(n, 50);

    auto ctx = Context::formal(2, 2);
    AppendixSeries s(ctx);
    auto U = s.stage1_coefficients();
    for (const auto& e : {U.UI, U.UIII, U.UII[0][1], U.UIV[1][1], ctx->i() * ctx->calG_inv()})
        EXPECT_EQ(parse_scalar(e.str(), ctx), e) << e.str();
}

TEST(Report, Deterministic) {
    auto mf = parse_model("N = 2\nsurface = x_1^2 + x_2^2 - 1\ntheta = 1/2\neta = 1\n");
    auto a = full_report(run_pipeline(mf.spec, Stage::S3), {}).dump();
    auto b = full_report(run_pipeline(mf.spec, Stage::S3), {}).dump();
    EXPECT_EQ(a, b);
}

// theta = eta = 0: the (x, p^x) block stays canonical, u acts as p^x and p_u is central.
TEST(Report, CommutativeLimitKeepsCanonicalAlgebra) {
    auto mf = parse_model("N = 2\nsurface = x_1^2 + x_2^2 - 1\n");
    PipelineRun run = run_pipeline(mf.spec, Stage::S3);
    const QuantumSystem &s2 = *run.find(Stage::S2), &s3 = *run.find(Stage::S3);
    ASSERT_TRUE(s3.bracket.has_value());
    const ConstBracket& w = *s3.bracket;
    std::vector<Generator> xp{gen::x(1), gen::x(2), gen::px(1), gen::px(2)};
    for (auto a : xp)
        for (auto b : xp) {
            EXPECT_EQ(OperatorExpr(s3.ctx->num(w.get(a, b))), s2.algebra->get(a, b)) << a.name() << " " << b.name();
        }
    for (int i = 1; i <= 2; ++i)
        for (auto b : w.coords) {
            EXPECT_EQ(w.get(gen::u(i), b), w.get(gen::px(i), b));
            EXPECT_EQ(w.get(gen::pu(i), b), 0);
        }
}
