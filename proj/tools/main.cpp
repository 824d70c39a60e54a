#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "cli.hpp"

using namespace pomq;

int main(int argc, char** argv) {
    CLI::App app{"Sequential constraint projections of a noncommutative particle on a hypersurface"};
    std::string model, emit = "text", checks, stage;
    int order = -1;
    app.add_option("--model", model, "model file")->required();
    app.add_option("--order", order, "truncation order in hbar (overrides the model file)");
    app.add_option("--emit", emit, "text or structured")->check(CLI::IsMember({"text", "structured"}));
    app.add_option("--check", checks, "comma-separated suites: algebra, projector, star, appendix, oracle, dirac");
    app.add_option("--stage", stage, "stop after this stage: S, S1, S2, S3, StarI, StarII");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    cli::ModelFile mf;
    std::optional<Stage> stop;
    try {
        std::ifstream in(model);
        if (!in) throw Error(ErrorKind::ParseError, "cannot read " + model);
        std::stringstream buf;
        buf << in.rdbuf();
        mf = cli::parse_model(buf.str());
        if (order >= 0) {
            mf.spec.truncation = order;
            mf.spec.validate();
        }
        if (!checks.empty()) {
            mf.checks.clear();
            std::stringstream cs(checks);
            std::string item;
            while (std::getline(cs, item, ',')) mf.checks.push_back(item);
        }
        for (const auto& n : mf.checks)
            if (std::find(known_suites().begin(), known_suites().end(), n) == known_suites().end())
                throw Error(ErrorKind::UnknownSuite, "unknown check suite '" + n + "'");
        if (!stage.empty()) stop = parse_stage(stage);
    } catch (const Error& e) {
        std::cerr << model << ": " << e.what() << "\n";
        return 2;
    }

    try {
        PipelineRun run = run_pipeline(mf.spec, stop);
        auto outcomes = run_checks(mf.checks, run);
        if (emit == "structured") std::cout << cli::full_report(run, outcomes).dump(2) << "\n";
        else std::cout << cli::text_report(run, outcomes);
        return cli::run_passes(run, outcomes) ? 0 : 1;
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
}
