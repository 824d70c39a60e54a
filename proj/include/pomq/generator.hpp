#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

namespace pomq {

// Declaration order is the global normal-ordering order; X never appears in
// operator words because position dependence lives in coefficients.
enum class GenKind : uint8_t { X = 0, V, Lambda, U, PU, PX, PV, PLambda, Custom, Xi, Pi };

struct Generator {
    GenKind kind = GenKind::X;
    uint16_t index = 0;  // 1-based for indexed families, 0 for lambda/p_lambda

    constexpr Generator() = default;
    constexpr Generator(GenKind k, uint16_t i) : kind(k), index(i) {}

    constexpr uint32_t packed() const { return (uint32_t(kind) << 16) | index; }
    static constexpr Generator unpack(uint32_t p) { return Generator(GenKind(p >> 16), uint16_t(p & 0xffff)); }

    friend constexpr bool operator==(Generator a, Generator b) { return a.packed() == b.packed(); }
    friend constexpr bool operator!=(Generator a, Generator b) { return a.packed() != b.packed(); }
    friend constexpr bool operator<(Generator a, Generator b) { return a.packed() < b.packed(); }
    friend constexpr bool operator>(Generator a, Generator b) { return a.packed() > b.packed(); }

    std::string name() const;
};

namespace gen {
inline Generator x(int i) { return {GenKind::X, uint16_t(i)}; }
inline Generator px(int i) { return {GenKind::PX, uint16_t(i)}; }
inline Generator v(int i) { return {GenKind::V, uint16_t(i)}; }
inline Generator pv(int i) { return {GenKind::PV, uint16_t(i)}; }
inline Generator lam() { return {GenKind::Lambda, 0}; }
inline Generator plam() { return {GenKind::PLambda, 0}; }
inline Generator u(int i) { return {GenKind::U, uint16_t(i)}; }
inline Generator pu(int i) { return {GenKind::PU, uint16_t(i)}; }
inline Generator xi(int a) { return {GenKind::Xi, uint16_t(a)}; }
inline Generator pi(int a) { return {GenKind::Pi, uint16_t(a)}; }
// Named generator for abstract algebras; registration order fixes its rank.
Generator custom(const std::string& name);
}  // namespace gen

std::optional<Generator> generator_from_name(const std::string& name);

}  // namespace pomq

template <>
struct std::hash<pomq::Generator> {
    size_t operator()(pomq::Generator g) const noexcept { return std::hash<uint32_t>()(g.packed()); }
};
