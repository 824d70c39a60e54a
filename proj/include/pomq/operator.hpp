#pragma once

#include <boost/container/small_vector.hpp>

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "pomq/scalar.hpp"

namespace pomq {

using Word = boost::container::small_vector<Generator, 6>;

struct WordLess {
    bool operator()(const Word& a, const Word& b) const {
        if (a.size() != b.size()) return a.size() < b.size();
        for (size_t k = 0; k < a.size(); ++k)
            if (a[k] != b[k]) return a[k] < b[k];
        return false;
    }
};

std::string word_str(const Word& w);
bool is_ordered(const Word& w);

class OperatorExpr {
public:
    using Map = std::map<Word, ScalarExpr, WordLess>;

    OperatorExpr() = default;
    explicit OperatorExpr(CtxPtr ctx) : ctx_(std::move(ctx)) {}
    OperatorExpr(const ScalarExpr& c);
    // c * w with w assumed already ordered.
    static OperatorExpr term(const ScalarExpr& c, const Word& w);

    const CtxPtr& ctx() const { return ctx_; }
    const Map& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    bool is_scalar() const;
    ScalarExpr scalar_part() const;
    ScalarExpr coeff(const Word& w) const;
    int max_hbar() const;
    int min_hbar() const;
    size_t max_word_length() const;
    bool mentions(Generator g) const;

    void add(const Word& w, const ScalarExpr& c);
    OperatorExpr operator-() const;
    OperatorExpr& operator+=(const OperatorExpr& o);
    OperatorExpr& operator-=(const OperatorExpr& o);
    friend OperatorExpr operator+(OperatorExpr a, const OperatorExpr& b) { return a += b; }
    friend OperatorExpr operator-(OperatorExpr a, const OperatorExpr& b) { return a -= b; }
    friend bool operator==(const OperatorExpr& a, const OperatorExpr& b);
    friend bool operator!=(const OperatorExpr& a, const OperatorExpr& b) { return !(a == b); }

    OperatorExpr scaled(const Coeff& c) const;
    // c(x) * O; exact because coefficients sit on the left.
    OperatorExpr left_scaled(const ScalarExpr& c, int order) const;
    OperatorExpr truncated(int order) const;
    OperatorExpr hbar_shifted(int d) const;
    OperatorExpr hbar_part(int k) const;
    OperatorExpr map_coeffs(const std::function<ScalarExpr(const ScalarExpr&)>& f) const;

    std::string str() const;

private:
    CtxPtr ctx_;
    Map terms_;
};

inline std::ostream& operator<<(std::ostream& os, const OperatorExpr& e) { return os << e.str(); }

// Pairwise commutators [a,b] = i hbar T(a,b). Entries are stored once per
// ordered pair a < b; position generators commute among themselves unless a
// pair (x_i, x_j) is registered, in which case x enters words.
class AlgebraTable {
public:
    explicit AlgebraTable(CtxPtr ctx) : ctx_(std::move(ctx)) {}
    AlgebraTable(const AlgebraTable& o);
    AlgebraTable& operator=(const AlgebraTable& o);

    const CtxPtr& ctx() const { return ctx_; }
    void add_generator(Generator g);
    void add_generators(const std::vector<Generator>& gs);
    bool has(Generator g) const;
    const std::vector<Generator>& generators() const { return gens_; }
    // Sets [a,b] = i hbar * value.
    void set(Generator a, Generator b, const OperatorExpr& value);
    // Value of [a,b]/(i hbar).
    OperatorExpr get(Generator a, Generator b) const;
    bool x_in_words() const { return x_in_words_; }
    const std::map<std::pair<Generator, Generator>, OperatorExpr>& entries() const { return table_; }

    // The generator as an operator; commuting positions become coefficients.
    OperatorExpr op(Generator g) const;
    // Canonical pairs [q_k, p_k] = i hbar.
    static AlgebraTable canonical(const CtxPtr& ctx, const std::vector<std::pair<Generator, Generator>>& pairs);

    OperatorExpr order_word(const Word& w, int order) const;
    void require(Generator g) const;

private:
    CtxPtr ctx_;
    std::vector<Generator> gens_;
    std::map<std::pair<Generator, Generator>, OperatorExpr> table_;
    bool x_in_words_ = false;
    struct KeyLess {
        bool operator()(const std::pair<int, Word>& a, const std::pair<int, Word>& b) const {
            if (a.first != b.first) return a.first < b.first;
            return WordLess()(a.second, b.second);
        }
    };
    mutable std::mutex cache_mutex_;
    mutable std::map<std::pair<int, Word>, OperatorExpr, KeyLess> order_cache_;
};

OperatorExpr multiply(const OperatorExpr& a, const OperatorExpr& b, const AlgebraTable& alg, int order);
OperatorExpr multiply(const OperatorExpr& a, const OperatorExpr& b, const AlgebraTable& alg);
OperatorExpr power(const OperatorExpr& a, int e, const AlgebraTable& alg);
OperatorExpr commutator(const OperatorExpr& a, const OperatorExpr& b, const AlgebraTable& alg);
// [a,b]/(i hbar), accurate to the given order.
OperatorExpr commutator_over_ihbar(const OperatorExpr& a, const OperatorExpr& b, const AlgebraTable& alg, int order);
OperatorExpr symmetrized(const OperatorExpr& a, const OperatorExpr& b, const AlgebraTable& alg);
OperatorExpr symmetrized(const OperatorExpr& a, const OperatorExpr& b, const AlgebraTable& alg, int order);
OperatorExpr normal_order(const std::vector<std::pair<ScalarExpr, Word>>& raw, const AlgebraTable& alg);
OperatorExpr adjoint(const OperatorExpr& a, const AlgebraTable& alg);
bool is_hermitian(const OperatorExpr& a, const AlgebraTable& alg);
bool check_jacobi(const AlgebraTable& alg, Generator a, Generator b, Generator c);

// Substitutes generators by operators (products taken in alg) and returns the result in alg.
OperatorExpr substitute_generators(const OperatorExpr& o, const std::map<Generator, OperatorExpr>& images,
                                   const AlgebraTable& alg, int order);

}  // namespace pomq
