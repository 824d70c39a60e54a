#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "pomq/operator.hpp"

namespace pomq {

// Canonical pairs (xi_a, pi_a) built from constraints, as operators of the source algebra.
struct AccsPair {
    std::vector<OperatorExpr> xi;
    std::vector<OperatorExpr> pi;
    size_t size() const { return xi.size(); }
};

enum class HyperKind { Minus, Plus };

struct HyperOperator {
    HyperKind kind = HyperKind::Minus;
    OperatorExpr source;
    // Optional action on generators (minus kind only), extended by the Leibniz rule.
    std::map<Generator, OperatorExpr> action;
};

// Minus: (1/(i hbar))[Z, o]; plus: {Z, o}.
OperatorExpr apply_hyper(const HyperOperator& h, const OperatorExpr& o, const AlgebraTable& alg, int order);
// Leibniz extension of an explicit generator action table.
OperatorExpr apply_minus_table(const std::map<Generator, OperatorExpr>& action, const OperatorExpr& o,
                               const AlgebraTable& alg, int order);

// Projection onto the surface xi = pi = 0. Operators of the source algebra are
// mapped to the target algebra, whose generators stand for the projected ones.
// images[g] is a source operator with the same projection as the eliminated generator g.
class Projector {
public:
    Projector(std::shared_ptr<const AlgebraTable> source, std::shared_ptr<const AlgebraTable> target, AccsPair accs,
              std::map<Generator, OperatorExpr> images);

    const AlgebraTable& source() const { return *source_; }
    const AlgebraTable& target() const { return *target_; }
    const AccsPair& accs() const { return accs_; }
    size_t pairs() const { return accs_.size(); }
    int order() const { return source_->ctx()->order(); }
    // True when every target generator is a source generator commuting with the ACCS.
    bool embedded() const { return embedded_; }

    OperatorExpr minus_xi(size_t a, const OperatorExpr& o, int order) const;
    OperatorExpr minus_pi(size_t a, const OperatorExpr& o, int order) const;
    OperatorExpr plus_xi(size_t a, const OperatorExpr& o, int order) const;
    OperatorExpr plus_pi(size_t a, const OperatorExpr& o, int order) const;
    // sum_a (xi-_a xi-_a + pi-_a pi-_a)
    OperatorExpr laplacian(const OperatorExpr& o, int order) const;

    OperatorExpr project(const OperatorExpr& o) const { return project(o, order()); }
    OperatorExpr project(const OperatorExpr& o, int order) const;
    OperatorExpr q_correction(const OperatorExpr& o) const { return q_correction(o, order()); }
    OperatorExpr q_correction(const OperatorExpr& o, int order) const;

    // exp((hbar/2i) Omega) X Y in the source algebra.
    OperatorExpr star(const OperatorExpr& x, const OperatorExpr& y, int order) const;
    // P(eta)P(zeta) exp((hbar/2i) Omega^t) X Y, a target operator equal to P(XY).
    OperatorExpr pstar(const OperatorExpr& x, const OperatorExpr& y, int order) const;

    // Sum over n+m <= order of sign/(n!m!) xi+^n pi+^m P xi-^m pi-^n o compared with o.
    // sign_on_n selects (-1)^n, otherwise (-1)^m. Requires an embedded projector.
    bool check_unity_decomposition(const OperatorExpr& o, int order, bool sign_on_n) const;

    // Degree in the ACCS generators for an embedded projector.
    int accs_degree(const OperatorExpr& o) const;

private:
    struct Chain {
        OperatorExpr left, right;
        int sign;
    };
    std::vector<std::vector<Chain>> omega_chains(const OperatorExpr& x, const OperatorExpr& y, int order) const;
    OperatorExpr project_term(const ScalarExpr& c, const Word& w, int order, int depth) const;
    OperatorExpr project_word(const Word& w, int order, int depth) const;
    OperatorExpr project_impl(const OperatorExpr& o, int order, int depth) const;
    OperatorExpr pstar_impl(const OperatorExpr& x, const OperatorExpr& y, int order, int depth) const;
    OperatorExpr minus(const OperatorExpr& z, const OperatorExpr& o, int order) const;

    std::shared_ptr<const AlgebraTable> source_;
    std::shared_ptr<const AlgebraTable> target_;
    AccsPair accs_;
    std::map<Generator, OperatorExpr> images_;
    bool embedded_ = false;
    std::vector<Generator> accs_gens_;

    struct KeyLess {
        bool operator()(const std::pair<int, Word>& a, const std::pair<int, Word>& b) const {
            if (a.first != b.first) return a.first < b.first;
            return WordLess()(a.second, b.second);
        }
    };
    mutable std::mutex mutex_;
    mutable std::map<std::pair<int, Word>, OperatorExpr, KeyLess> word_cache_;
};

// Gaussian ground-state moment <xi^a pi^b> of the symmetrized (Weyl) product for one pair.
Rational coherent_moment_table(int a, int b);

}  // namespace pomq
