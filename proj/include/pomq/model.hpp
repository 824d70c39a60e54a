#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pomq/hyper.hpp"
#include "pomq/symbol.hpp"

namespace pomq {

enum class Stage { S, S1, S2, S3, StarI, StarII };
const char* stage_name(Stage s);

struct ModelSpec {
    int N = 2;
    // Bound surface G(x) as a polynomial in x; formal G when empty.
    std::optional<Poly> G;
    Rational theta = 0;
    Rational eta = 0;
    int truncation = 2;

    CtxPtr context() const;
    void validate() const;
};

struct NamedOp {
    std::string name;  // family, e.g. "phi1"
    int index = 0;     // 0 for unindexed members
    OperatorExpr op;
    std::string label() const;
};

// One derived entry against its expected value.
struct TableEntry {
    std::string a, b;
    OperatorExpr derived;
    OperatorExpr expected;
    bool ok() const { return (derived - expected).is_zero(); }
};

struct TableCheck {
    std::string label;
    std::vector<TableEntry> entries;
    bool ok() const;
    std::vector<std::string> mismatches() const;
};

// Scalar identity checks (name, derived, expected).
struct ScalarCheck {
    std::string label;
    ScalarExpr derived;
    ScalarExpr expected;
    bool ok() const { return (derived - expected).is_zero(); }
};

// Matrices and x-dependent pieces of the stage-3 Hamiltonian.
struct Stage3Pieces {
    Mat Theta, Xi, G, M, Mbar, Minv, calM;
    std::vector<std::vector<ScalarExpr>> Mt, Xt;
    ScalarExpr U2, UI, UQ, QU;
    // Symbol of P + Q on the stage-2 phase space, before restriction.
    ScalarExpr full;
};

struct QuantumSystem {
    Stage stage = Stage::S;
    ModelSpec spec;
    CtxPtr ctx;
    bool properties_hermitian = false;
    std::shared_ptr<const AlgebraTable> algebra;
    std::vector<Generator> generators;
    OperatorExpr hamiltonian;
    // Stage 3 and the final systems carry the Hamiltonian as a Weyl symbol
    // over the constant bracket below; operator form is not available there.
    std::optional<ScalarExpr> hamiltonian_symbol;
    std::optional<ConstBracket> bracket;
    std::vector<NamedOp> constraints;
    std::map<Generator, OperatorExpr> eliminated;
    // Current representative of every initial generator.
    std::map<Generator, OperatorExpr> reps;
    std::map<Generator, ScalarExpr> rep_symbols;
    std::vector<TableCheck> tables;
    std::vector<ScalarCheck> identities;
    // Printed forms superseded by a derived reading; reported, not asserted.
    std::vector<ScalarCheck> notes;
    std::shared_ptr<const Projector> projector;
    std::shared_ptr<const LinearReduction> reduction;
    // Pieces of the Hamiltonian kept for later comparisons.
    OperatorExpr p_part, q_part;
    std::optional<ScalarExpr> p_symbol, q_symbol;
    std::shared_ptr<const Stage3Pieces> s3;

    bool all_checks_pass() const;
};

QuantumSystem build_initial(const ModelSpec& spec);
TableCheck verify_consistency_algebra(const QuantumSystem& sys);
// Audit that the time evolution of every constraint closes on the constraint surface.
TableCheck consistency_audit(const QuantumSystem& sys);

struct Classification {
    std::vector<NamedOp> A, B, C;
};
Classification classify_constraints(const QuantumSystem& sys);

QuantumSystem project_stage1(const QuantumSystem& sys);
QuantumSystem project_stage2(const QuantumSystem& sys);
QuantumSystem project_stage3(const QuantumSystem& sys, const ModelSpec& spec);
enum class FinalKind { I, II };
QuantumSystem finalize(const QuantumSystem& sys, FinalKind which);

// Decomposition of a stage-2 Hamiltonian as c + 1/2 {Mt_ij, {px_i, px_j}} + U(x).
struct KineticForm {
    ScalarExpr constant;
    std::vector<std::vector<ScalarExpr>> Mt;
    ScalarExpr U;
    OperatorExpr residual;  // zero when the form holds
};
KineticForm kinetic_form(const OperatorExpr& h, const AlgebraTable& alg);
OperatorExpr kinetic_operator(const std::vector<std::vector<ScalarExpr>>& Mt, const AlgebraTable& alg);

}  // namespace pomq
