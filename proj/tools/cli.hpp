#pragma once

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

#include "pomq/checks.hpp"

namespace pomq::cli {

struct ModelFile {
    ModelSpec spec;
    std::vector<std::string> checks;
};

// key = value lines; '#' starts a comment.
ModelFile parse_model(const std::string& text);

// Expressions as rendered by the engine: rationals, I, hbar, x_i, px_i, ...,
// G, G_ij.., Ginv, with + - * ^ and parentheses.
ScalarExpr parse_scalar(const std::string& text, const CtxPtr& ctx);
Poly parse_surface(const std::string& text, int N);

using Json = nlohmann::ordered_json;

Json stage_report(const QuantumSystem& sys, uint64_t dropped);
Json full_report(const PipelineRun& run, const std::vector<CheckOutcome>& checks);
std::string text_report(const PipelineRun& run, const std::vector<CheckOutcome>& checks);
// Stage checks and suite outcomes together.
bool run_passes(const PipelineRun& run, const std::vector<CheckOutcome>& checks);

}  // namespace pomq::cli
