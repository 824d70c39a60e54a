#pragma once

#include <map>
#include <tuple>
#include <vector>

#include "pomq/model.hpp"

namespace pomq {

// [i][j], 0-based; atoms and generators stay 1-based.
using Family = std::vector<std::vector<ScalarExpr>>;

// (hbar/4)^n / n!
ScalarExpr hbar_weight(const CtxPtr& ctx, int n);

// Closed forms of the stage 1 and stage 2 correction series, evaluated
// literally and truncated at the context order. Terms whose hbar prefactor
// already exceeds the order are skipped, not computed.
class AppendixSeries {
public:
    // Printed: the mu^(2) series of calU_II carries hbar^2/4 as typeset.
    // Corrected: hbar/2, which is what the expansion produces.
    enum class Reading { Corrected, Printed };
    explicit AppendixSeries(CtxPtr ctx, Reading reading = Reading::Corrected);
    Reading reading() const { return reading_; }
    const CtxPtr& ctx() const { return ctx_; }
    int N() const { return N_; }
    int order() const { return ctx_->order(); }

    // (nu d)^times f
    ScalarExpr nu_d(const ScalarExpr& f, int times = 1) const;
    // (d_a d_a)^times f
    ScalarExpr laplacian(const ScalarExpr& f, int times = 1) const;

    const Family& V();
    const Family& lambda(int n);
    // B^{(m)kl}_{ij} = sum_r C(m,r) Lambda^(r)_ik Lambda^(m-r)_jl
    const ScalarExpr& B(int m, int i, int j, int k, int l);
    // calB^{(m)}_ij
    const Family& calB(int m);
    // B^{ij} and calB_ij series
    Family B_series();
    Family calB_series();
    // U^v_ij
    Family Uv();

    // calA^(n)_kl
    Family calA(int n);

    struct ATerms {
        ScalarExpr UI, UIII;
        Family UII, UIV;
    };
    ATerms appendix_a();
    // U_I .. U_IV of the stage 1 Hamiltonian from the corrections above.
    ATerms stage1_coefficients();

    // M_II^{ij}, M_IV^{ij}; `budget` is the hbar power of the prefactor the result will carry.
    Family M_II(const Family& UII, int budget = 0);
    Family M_IV(const Family& UIV, int budget = 0);
    ScalarExpr calU_II(const Family& UII);
    ScalarExpr calU_IV(const Family& UIV);

    // m^(2)_ij and M^(2)_ij of the stage 2 kinetic term.
    Family m2(const ATerms& U);
    Family M2(const ATerms& U);
    // U^(2)_II
    ScalarExpr U2_II(const ATerms& U);
    // Printed reading of U^(2)_I for a given M^(2).
    ScalarExpr U2_I_printed(const Family& M);

private:
    bool beyond(int k, const ScalarExpr& f) const;
    bool beyond(int k, const Family& f) const;
    ScalarExpr sum_nu_even(const ScalarExpr& f, int budget);

    CtxPtr ctx_;
    int N_;
    Reading reading_;
    std::vector<Family> lambda_;
    std::map<int, Family> calB_;
    std::map<std::tuple<int, int, int, int, int>, ScalarExpr> B_;
    Family V_;
};

// v_i at stage 1 (p^x_i + G_i lambda) and at stage 2 ({P_ij, p^x_j}).
OperatorExpr stage1_v(const AlgebraTable& alg, int i);
OperatorExpr stage2_v(const AlgebraTable& alg, int i);

// Operator forms on the stage 1 algebra.
OperatorExpr appendix_a_operator(AppendixSeries& s, const AlgebraTable& alg1);
struct H1Pieces {
    OperatorExpr kinetic, UI, UII, UIII, UIV;
    OperatorExpr sum() const { return kinetic + UI + UII + UIII + UIV; }
};
H1Pieces stage1_pieces(AppendixSeries& s, const AppendixSeries::ATerms& U, const AlgebraTable& alg1);
// Closed forms of Q^(2) applied to each piece, on the stage 2 algebra.
H1Pieces appendix_b_operators(AppendixSeries& s, const AppendixSeries::ATerms& U, const AlgebraTable& alg2);
// Closed form of P^(2) H^(1).
OperatorExpr stage2_projected(AppendixSeries& s, const AppendixSeries::ATerms& U, const AlgebraTable& alg2);

// Pipeline output against the closed forms: Q^(1)H, each Q^(2) piece, and P^(2)H^(1).
TableCheck appendix_compare(const QuantumSystem& s0, const QuantumSystem& s1, const QuantumSystem& s2,
                            AppendixSeries::Reading reading = AppendixSeries::Reading::Corrected);

// Stage 2 Hamiltonian against the assembled closed forms: the kinetic matrix
// P M2 P, H = -hbar N/4 + 1/2 {M2, {v, v}} + U2_II, and the reordering scalar
// U2_I derived from the pipeline next to its printed reading.
struct Stage2Structure {
    TableCheck table;
    ScalarCheck u2_i;
};
Stage2Structure stage2_structure(const QuantumSystem& s2, AppendixSeries::Reading reading = AppendixSeries::Reading::Corrected);

}  // namespace pomq
