#pragma once

#include <functional>
#include <optional>

#include "pomq/model.hpp"

namespace pomq::detail {

std::vector<Generator> initial_generators(int N);
CanonicalPairs pairs_for(int N, bool v, bool lam);
inline OperatorExpr sc(const ScalarExpr& s) { return OperatorExpr(s); }

// Both orders of a pair are covered by antisymmetry.
using Expect = std::function<std::optional<OperatorExpr>(Generator, Generator)>;
TableCheck generator_table(const std::string& label, const std::vector<Generator>& gens,
                           const std::map<Generator, OperatorExpr>& reps, const AlgebraTable& alg, const Expect& expect);
TableCheck constraint_table(const std::string& label, const std::vector<NamedOp>& ops, const AlgebraTable& alg,
                            const std::function<std::optional<OperatorExpr>(const NamedOp&, const NamedOp&)>& expect);
Rational theta_ij(const ModelSpec& s, int i, int j);
OperatorExpr phi4(const AlgebraTable& alg, const ModelSpec& s, int i);

}  // namespace pomq::detail
