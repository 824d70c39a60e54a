#include "pomq/checks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>

#include "pomq/appendix.hpp"
#include "pomq/dirac.hpp"
#include "pomq/oracles.hpp"

namespace pomq {

const QuantumSystem* PipelineRun::find(Stage s) const {
    for (const auto& q : systems)
        if (q.stage == s) return &q;
    return nullptr;
}

Stage parse_stage(const std::string& tag) {
    for (Stage s : {Stage::S, Stage::S1, Stage::S2, Stage::S3, Stage::StarI, Stage::StarII})
        if (tag == stage_name(s)) return s;
    if (tag == "I") return Stage::StarI;
    if (tag == "II") return Stage::StarII;
    throw Error(ErrorKind::ValidationError, "unknown stage '" + tag + "'");
}

PipelineRun run_pipeline(const ModelSpec& spec, std::optional<Stage> stop) {
    PipelineRun run;
    run.spec = spec;
    uint64_t mark = 0;
    // true when the run should stop here
    auto step = [&](const char* tag, const std::function<QuantumSystem()>& make) {
        QuantumSystem s;
        try {
            s = make();
        } catch (const Error& e) {
            throw Error(e.kind(), std::string("stage ") + tag + ": " + e.what());
        }
        uint64_t now = s.ctx->dropped();
        run.drops.push_back(now - mark);
        mark = now;
        run.systems.push_back(std::move(s));
        return stop && run.systems.back().stage == *stop;
    };
    if (step("S", [&] { return build_initial(spec); })) return run;
    run.classes = classify_constraints(run.systems.back());
    if (step("S1", [&] { return project_stage1(run.systems.back()); })) return run;
    if (step("S2", [&] { return project_stage2(run.systems.back()); })) return run;
    if (step("S3", [&] { return project_stage3(run.systems.back(), spec); })) return run;
    const QuantumSystem s3 = run.systems.back();
    if (step("StarI", [&] { return finalize(s3, FinalKind::I); })) return run;
    step("StarII", [&] { return finalize(s3, FinalKind::II); });
    return run;
}

const std::vector<std::string>& known_suites() {
    static const std::vector<std::string> s{"algebra", "projector", "star", "appendix", "oracle", "dirac"};
    return s;
}

bool all_pass(const std::vector<CheckOutcome>& outcomes) {
    return std::all_of(outcomes.begin(), outcomes.end(), [](const CheckOutcome& o) { return o.pass || o.informational; });
}

namespace {

// x_1 with its momentum and M abstract ACCS pairs commuting with it.
struct Abstract {
    CtxPtr ctx;
    std::shared_ptr<AlgebraTable> source, target;
    std::unique_ptr<Projector> proj;

    explicit Abstract(int M, int order = 4) {
        ctx = Context::formal(1, order);
        std::vector<std::pair<Generator, Generator>> pairs{{gen::x(1), gen::px(1)}};
        for (int a = 1; a <= M; ++a) pairs.push_back({gen::xi(a), gen::pi(a)});
        source = std::make_shared<AlgebraTable>(AlgebraTable::canonical(ctx, pairs));
        target = std::make_shared<AlgebraTable>(AlgebraTable::canonical(ctx, {{gen::x(1), gen::px(1)}}));
        AccsPair accs;
        std::map<Generator, OperatorExpr> images;
        for (int a = 1; a <= M; ++a) {
            accs.xi.push_back(source->op(gen::xi(a)));
            accs.pi.push_back(source->op(gen::pi(a)));
            images[gen::xi(a)] = OperatorExpr(ctx->zero());
            images[gen::pi(a)] = OperatorExpr(ctx->zero());
        }
        proj = std::make_unique<Projector>(source, target, accs, images);
    }

    OperatorExpr random(std::mt19937& rng, int max_len) const {
        std::vector<Generator> pool = source->generators();
        pool.push_back(gen::x(1));
        std::uniform_int_distribution<int> len(0, max_len), pick(0, int(pool.size()) - 1), coef(-2, 2), nt(1, 3);
        std::vector<std::pair<ScalarExpr, Word>> raw;
        int n = nt(rng);
        for (int t = 0; t < n; ++t) {
            ScalarExpr s = ctx->num(coef(rng));
            if (rng() % 3 == 0) s *= ctx->G({1});
            Word w;
            int l = len(rng);
            for (int k = 0; k < l; ++k) w.push_back(pool[pick(rng)]);
            raw.push_back({s, w});
        }
        return normal_order(raw, *source);
    }
};

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

struct Sink {
    std::string suite;
    std::vector<CheckOutcome>& out;
    void add(const std::string& name, bool pass, const std::string& detail = {}) {
        out.push_back({suite, name, pass, false, detail});
    }
    void info(const std::string& name, const std::string& detail) { out.push_back({suite, name, true, true, detail}); }
    void table(const std::string& prefix, const TableCheck& t) {
        auto mm = t.mismatches();
        add(prefix + t.label, mm.empty(), mm.empty() ? std::string() : mm.front());
    }
    void scalar(const std::string& prefix, const ScalarCheck& c) {
        add(prefix + c.label, c.ok(), c.ok() ? std::string() : "derived - expected = " + (c.derived - c.expected).str());
    }
};

void algebra_suite(Sink& s, const PipelineRun& run) {
    for (const auto& q : run.systems) {
        std::string p = std::string(stage_name(q.stage)) + ": ";
        for (const auto& t : q.tables) s.table(p, t);
        for (const auto& c : q.identities) s.scalar(p, c);
        for (const auto& c : q.notes)
            s.info(p + c.label, c.ok() ? "printed form holds" : "printed form differs by " + (c.derived - c.expected).str());
    }
}

void projector_suite(Sink& s, const PipelineRun& run) {
    Abstract A(2);
    std::mt19937 rng(8);
    int bad = 0;
    for (int t = 0; t < 50; ++t) {
        OperatorExpr p = A.proj->project(A.random(rng, 3));
        if (A.proj->project(p) != p) ++bad;
    }
    s.add("idempotence on 50 random operators", bad == 0, bad ? std::to_string(bad) + " failures" : "");
    bad = 0;
    for (int t = 0; t < 10; ++t)
        if (!A.proj->check_unity_decomposition(A.random(rng, 3), 3, true)) ++bad;
    s.add("unity decomposition on 10 random operators", bad == 0, bad ? std::to_string(bad) + " failures" : "");

    for (size_t k = 1; k < run.systems.size(); ++k) {
        const QuantumSystem& q = run.systems[k];
        if (!q.projector) continue;
        const Projector& P = *q.projector;
        std::string p = std::string(stage_name(q.stage)) + ": ";
        for (const auto& c : run.systems[k - 1].constraints) {
            bool kept = std::any_of(q.constraints.begin(), q.constraints.end(),
                                    [&](const NamedOp& d) { return d.label() == c.label(); });
            if (!kept) s.add(p + "P " + c.label() + " = 0", P.project(c.op).is_zero());
        }
        for (size_t a = 0; a < P.pairs(); ++a) {
            std::string k = std::to_string(a + 1);
            s.add(p + "P xi_" + k + " = 0", P.project(P.accs().xi[a]).is_zero());
            s.add(p + "P pi_" + k + " = 0", P.project(P.accs().pi[a]).is_zero());
        }
    }
    for (const auto& q : run.systems)
        for (const auto& c : q.identities)
            if (c.label.find("annihilated") != std::string::npos) s.scalar(std::string(stage_name(q.stage)) + ": ", c);
}

void star_suite(Sink& s) {
    Abstract A(2);
    std::mt19937 rng(33);
    const AlgebraTable& tg = A.proj->target();
    int bad_a = 0, bad_b = 0;
    for (int t = 0; t < 25; ++t) {
        OperatorExpr X = A.random(rng, 2), Y = A.random(rng, 2);
        OperatorExpr PX = A.proj->project(X), PY = A.proj->project(Y);
        OperatorExpr xy = A.proj->star(X, Y, 4), yx = A.proj->star(Y, X, 4);
        if (commutator(PX, PY, tg) != A.proj->project(xy - yx) ||
            symmetrized(PX, PY, tg) != A.proj->project(xy + yx).scaled(Coeff::frac(1, 2)))
            ++bad_a;
        OperatorExpr pxy = A.proj->pstar(X, Y, 4), pyx = A.proj->pstar(Y, X, 4);
        if (A.proj->project(commutator(X, Y, *A.source)) != pxy - pyx ||
            A.proj->project(symmetrized(X, Y, *A.source)) != (pxy + pyx).scaled(Coeff::frac(1, 2)))
            ++bad_b;
    }
    s.add("star product of projections on 25 random pairs", bad_a == 0, bad_a ? std::to_string(bad_a) + " failures" : "");
    s.add("projected star product on 25 random pairs", bad_b == 0, bad_b ? std::to_string(bad_b) + " failures" : "");
}

void appendix_suite(Sink& s, const PipelineRun& run) {
    const QuantumSystem *s0 = run.find(Stage::S), *s1 = run.find(Stage::S1), *s2 = run.find(Stage::S2);
    if (!s0 || !s1 || !s2) {
        s.info("appendix comparison", "skipped: needs stages S1 and S2");
        return;
    }
    TableCheck t = appendix_compare(*s0, *s1, *s2);
    for (const auto& e : t.entries)
        s.add(e.a + " against " + e.b, e.ok(), e.ok() ? std::string() : "difference " + (e.derived - e.expected).str());
    TableCheck printed = appendix_compare(*s0, *s1, *s2, AppendixSeries::Reading::Printed);
    const auto& q1 = printed.entries.front();
    s.info("Q1 H against the printed hbar^2/4 prefactor",
           q1.ok() ? "agrees for this surface" : "differs by " + (q1.derived - q1.expected).str());
    Stage2Structure st = stage2_structure(*s2);
    for (const auto& e : st.table.entries)
        s.add(e.a + " against " + e.b, e.ok(), e.ok() ? std::string() : "difference " + (e.derived - e.expected).str());
    s.info("U2_I derived against the printed reading",
           st.u2_i.ok() ? "equal" : "differs by " + (st.u2_i.derived - st.u2_i.expected).str());
}

void oracle_suite(Sink& s) {
    Abstract A(2);
    std::mt19937 rng(77);
    int bad = 0;
    for (int t = 0; t < 100; ++t) {
        OperatorExpr o = A.random(rng, 3);
        if (naive_project(o, *A.proj) != A.proj->project(o)) ++bad;
    }
    s.add("naive projection equals project on 100 random operators", bad == 0, bad ? std::to_string(bad) + " differ" : "");

    double worst = 0;
    for (int a = 0; a <= 8; ++a)
        for (int b = 0; a + b <= 8; ++b)
            worst = std::max(worst, std::abs(coherent_moment(a, b, 1.0) - std::complex<double>(coherent_moment_table(a, b).get_d())));
    s.add("quadrature moments match the table up to total degree 8", worst < 1e-10, "max deviation " + sci(worst));
    UncertaintyReport u = uncertainty_check(1.0);
    s.add("minimal uncertainty hbar/2", std::abs(u.product - 0.5) < 1e-10 && u.minimal, "product " + sci(u.product));
    Abstract B(1);
    OperatorExpr xi = B.source->op(gen::xi(1));
    s.add("Q(xi^2) = hbar/2", B.proj->q_correction(multiply(xi, xi, *B.source)) ==
                                   OperatorExpr(B.ctx->hbar().scaled(Coeff::frac(1, 2))));
}

void dirac_suite(Sink& s, const PipelineRun& run) {
    if (!run.spec.G) {
        s.info("Dirac comparison", "skipped: needs a bound surface");
        return;
    }
    bool any = false;
    for (Stage st : {Stage::StarI, Stage::StarII}) {
        const QuantumSystem* q = run.find(st);
        if (!q) continue;
        any = true;
        DiracReport r = dirac_compare(*q, run.spec);
        std::string p = std::string(stage_name(st)) + ": ";
        auto mm = r.mismatches();
        s.add(p + "leading order equals the Dirac brackets", mm.empty(), mm.empty() ? std::string() : mm.front());
        int hb = -1, hh = -1;
        for (const auto& e : r.extras) {
            int& m = e.where == "H" ? hh : hb;
            if (m < 0 || e.hbar < m) m = e.hbar;
        }
        s.add(p + "bracket corrections start at hbar^2", hb < 0 || hb >= 2, "lowest order " + std::to_string(hb));
        s.info(p + "Hamiltonian corrections", "lowest order " + std::to_string(hh) + ", " + std::to_string(r.extras.size()) +
                                                  " correction terms in total");
    }
    if (!any) s.info("Dirac comparison", "skipped: the run stopped before the final systems");
}

}  // namespace

std::vector<CheckOutcome> run_checks(const std::vector<std::string>& suites, const PipelineRun& run) {
    for (const auto& n : suites)
        if (std::find(known_suites().begin(), known_suites().end(), n) == known_suites().end())
            throw Error(ErrorKind::UnknownSuite, "unknown check suite '" + n + "'");
    std::vector<CheckOutcome> out;
    for (const auto& n : suites) {
        Sink s{n, out};
        if (n == "algebra") algebra_suite(s, run);
        else if (n == "projector") projector_suite(s, run);
        else if (n == "star") star_suite(s);
        else if (n == "appendix") appendix_suite(s, run);
        else if (n == "oracle") oracle_suite(s);
        else dirac_suite(s, run);
    }
    return out;
}

}  // namespace pomq
