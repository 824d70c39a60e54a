#include "pomq/generator.hpp"

#include <mutex>
#include <vector>

#include "pomq/error.hpp"

namespace pomq {

namespace {
std::mutex g_custom_mutex;
std::vector<std::string>& custom_names() {
    static std::vector<std::string> names;
    return names;
}
}  // namespace

Generator gen::custom(const std::string& name) {
    std::lock_guard<std::mutex> lock(g_custom_mutex);
    auto& names = custom_names();
    for (size_t k = 0; k < names.size(); ++k)
        if (names[k] == name) return Generator(GenKind::Custom, uint16_t(k + 1));
    names.push_back(name);
    return Generator(GenKind::Custom, uint16_t(names.size()));
}

std::string Generator::name() const {
    auto idx = [&](const char* base) { return std::string(base) + "_" + std::to_string(index); };
    switch (kind) {
        case GenKind::X: return idx("x");
        case GenKind::V: return idx("v");
        case GenKind::Lambda: return "lam";
        case GenKind::U: return idx("u");
        case GenKind::PU: return idx("pu");
        case GenKind::PX: return idx("px");
        case GenKind::PV: return idx("pv");
        case GenKind::PLambda: return "plam";
        case GenKind::Xi: return idx("xi");
        case GenKind::Pi: return idx("pi");
        case GenKind::Custom: {
            std::lock_guard<std::mutex> lock(g_custom_mutex);
            auto& names = custom_names();
            if (index >= 1 && index <= names.size()) return names[index - 1];
            return "c" + std::to_string(index);
        }
    }
    return "?";
}

std::optional<Generator> generator_from_name(const std::string& name) {
    if (name == "lam") return gen::lam();
    if (name == "plam") return gen::plam();
    auto us = name.find('_');
    if (us == std::string::npos || us + 1 >= name.size()) return std::nullopt;
    std::string base = name.substr(0, us);
    std::string digits = name.substr(us + 1);
    for (char c : digits)
        if (c < '0' || c > '9') return std::nullopt;
    int i = std::stoi(digits);
    if (i < 1 || i > 9) return std::nullopt;
    if (base == "x") return gen::x(i);
    if (base == "px") return gen::px(i);
    if (base == "v") return gen::v(i);
    if (base == "pv") return gen::pv(i);
    if (base == "u") return gen::u(i);
    if (base == "pu") return gen::pu(i);
    if (base == "xi") return gen::xi(i);
    if (base == "pi") return gen::pi(i);
    return std::nullopt;
}

}  // namespace pomq
