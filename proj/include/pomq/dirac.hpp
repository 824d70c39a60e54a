#pragma once

#include <map>
#include <string>
#include <vector>

#include "pomq/model.hpp"

namespace pomq {

using PhasePoint = std::map<Generator, Rational>;

// Leading-order bracket of two initial generators at every sample point.
struct DiracEntry {
    std::string a, b;
    std::vector<Rational> dirac, pom;
    bool ok() const { return dirac == pom; }
};

// A term present only on the projection side, with its hbar grading.
struct ExtraTerm {
    std::string where;
    int hbar = 0;
    ScalarExpr term;
};

struct DiracReport {
    std::string system;
    std::vector<PhasePoint> points;
    std::vector<DiracEntry> brackets;
    // hbar^0 part of the final Hamiltonian against the classical one on the surface
    DiracEntry hamiltonian;
    std::vector<ExtraTerm> extras;

    bool leading_agree() const;
    int min_extra_order() const;  // -1 when there are none
    std::vector<std::string> mismatches() const;
};

// Classical Dirac brackets for the full second-class set at once, at exact
// rational points of the constraint surface, against a final system.
DiracReport dirac_compare(const QuantumSystem& sys_final, const ModelSpec& spec);

// Poisson bracket over canonical pairs (x through the chain rule).
ScalarExpr poisson(const ScalarExpr& f, const ScalarExpr& g, const CanonicalPairs& pairs);

}  // namespace pomq
