#include "cli.hpp"

#include <sstream>

namespace pomq::cli {

namespace {

Json words(const OperatorExpr& o) {
    Json out = Json::array();
    for (const auto& [w, c] : o.terms()) {
        Json word = Json::array();
        for (auto g : w) word.push_back(g.name());
        out.push_back({{"word", word}, {"coeff", c.str()}});
    }
    return out;
}

// One entry per (word, hbar power), coefficient without the hbar factor.
Json graded(const OperatorExpr& o) {
    Json out = Json::array();
    for (const auto& [w, c] : o.terms()) {
        Json word = Json::array();
        for (auto g : w) word.push_back(g.name());
        for (int k = std::max(0, c.min_hbar()); k <= c.max_hbar(); ++k) {
            ScalarExpr part = c.hbar_part(k);
            if (!part.is_zero()) out.push_back({{"word", word}, {"hbar", k}, {"coeff", part.str()}});
        }
    }
    return out;
}

Json graded(const ScalarExpr& s) {
    Json out = Json::array();
    for (int k = std::max(0, s.min_hbar()); k <= s.max_hbar(); ++k) {
        ScalarExpr part = s.hbar_part(k);
        if (!part.is_zero()) out.push_back({{"hbar", k}, {"symbol", part.str()}});
    }
    return out;
}

}  // namespace

Json stage_report(const QuantumSystem& sys, uint64_t dropped) {
    Json r;
    r["stage"] = stage_name(sys.stage);
    Json gens = Json::array();
    for (auto g : sys.generators) gens.push_back(g.name());
    r["generators"] = gens;
    Json alg = Json::array();
    for (const auto& [pair, v] : sys.algebra->entries()) {
        if (v.is_zero()) continue;
        alg.push_back({{"pair", {pair.first.name(), pair.second.name()}}, {"over_i_hbar", words(v)}});
    }
    r["algebra"] = alg;
    if (sys.hamiltonian_symbol) {
        r["hamiltonian_form"] = "weyl symbol";
        r["hamiltonian"] = graded(*sys.hamiltonian_symbol);
    } else {
        r["hamiltonian_form"] = "operator";
        r["hamiltonian"] = graded(sys.hamiltonian);
    }
    Json res = Json::array(), checks = Json::array(), notes = Json::array();
    for (const auto& t : sys.tables) {
        for (const auto& e : t.entries)
            if (!e.ok()) res.push_back({{"check", t.label}, {"entry", e.a + ", " + e.b}, {"difference", words(e.derived - e.expected)}});
        checks.push_back({{"name", t.label}, {"pass", t.ok()}});
    }
    for (const auto& c : sys.identities) {
        if (!c.ok()) res.push_back({{"check", c.label}, {"entry", ""}, {"difference", (c.derived - c.expected).str()}});
        checks.push_back({{"name", c.label}, {"pass", c.ok()}});
    }
    for (const auto& c : sys.notes) notes.push_back({{"name", c.label}, {"printed_form_holds", c.ok()}});
    r["residuals"] = res;
    r["dropped_terms"] = dropped;
    r["checks"] = checks;
    r["notes"] = notes;
    return r;
}

bool run_passes(const PipelineRun& run, const std::vector<CheckOutcome>& checks) {
    for (const auto& s : run.systems)
        if (!s.all_checks_pass()) return false;
    return all_pass(checks);
}

Json full_report(const PipelineRun& run, const std::vector<CheckOutcome>& checks) {
    Json r;
    const ModelSpec& s = run.spec;
    r["model"] = {{"N", s.N},
                  {"surface", s.G ? render_poly(*s.G) : "formal"},
                  {"theta", s.theta.get_str()},
                  {"eta", s.eta.get_str()},
                  {"order", s.truncation}};
    Json stages = Json::array();
    for (size_t k = 0; k < run.systems.size(); ++k) stages.push_back(stage_report(run.systems[k], run.drops[k]));
    r["stages"] = stages;
    Json cs = Json::array();
    for (const auto& c : checks)
        cs.push_back({{"suite", c.suite}, {"name", c.name}, {"pass", c.pass}, {"informational", c.informational}, {"detail", c.detail}});
    r["checks"] = cs;
    r["status"] = run_passes(run, checks) ? "pass" : "fail";
    return r;
}

std::string text_report(const PipelineRun& run, const std::vector<CheckOutcome>& checks) {
    std::ostringstream os;
    const ModelSpec& s = run.spec;
    os << "model: N = " << s.N << ", surface " << (s.G ? render_poly(*s.G) : "formal") << ", theta = " << s.theta
       << ", eta = " << s.eta << ", order " << s.truncation << "\n";
    for (size_t k = 0; k < run.systems.size(); ++k) {
        const QuantumSystem& q = run.systems[k];
        os << "\n== " << stage_name(q.stage) << " ==\n";
        os << "generators:";
        for (auto g : q.generators) os << " " << g.name();
        os << "\nalgebra ([a, b] / i hbar):\n";
        for (const auto& [pair, v] : q.algebra->entries())
            if (!v.is_zero()) os << "  [" << pair.first.name() << ", " << pair.second.name() << "] = " << v << "\n";
        os << (q.hamiltonian_symbol ? "hamiltonian (Weyl symbol):\n  " : "hamiltonian:\n  ")
           << (q.hamiltonian_symbol ? q.hamiltonian_symbol->str() : q.hamiltonian.str()) << "\n";
        int pass = 0, total = 0;
        for (const auto& t : q.tables) {
            ++total;
            if (t.ok()) ++pass;
            else
                for (const auto& m : t.mismatches()) os << "  residual in " << t.label << ": " << m << "\n";
        }
        for (const auto& c : q.identities) {
            ++total;
            if (c.ok()) ++pass;
            else os << "  residual in " << c.label << ": " << (c.derived - c.expected) << "\n";
        }
        os << "checks: " << pass << "/" << total << " pass, " << run.drops[k] << " terms dropped by truncation\n";
        for (const auto& c : q.notes) os << "  note: " << c.label << (c.ok() ? " holds as printed\n" : " differs from the printed form\n");
    }
    if (!checks.empty()) os << "\n== check suites ==\n";
    for (const auto& c : checks) {
        os << (c.informational ? "[info] " : c.pass ? "[pass] " : "[FAIL] ") << c.suite << ": " << c.name;
        if (!c.detail.empty()) os << " (" << c.detail << ")";
        os << "\n";
    }
    os << "\nstatus: " << (run_passes(run, checks) ? "pass" : "fail") << "\n";
    return os.str();
}

}  // namespace pomq::cli
