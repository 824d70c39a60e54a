#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pomq/model.hpp"

namespace pomq {

// The systems produced by one run, in pipeline order.
struct PipelineRun {
    ModelSpec spec;
    std::vector<QuantumSystem> systems;
    std::optional<Classification> classes;
    // terms dropped by truncation while building each system
    std::vector<uint64_t> drops;
    const QuantumSystem* find(Stage s) const;
};

// S, S1, S2, S3, StarI, StarII (also I, II).
Stage parse_stage(const std::string& tag);
PipelineRun run_pipeline(const ModelSpec& spec, std::optional<Stage> stop = std::nullopt);

struct CheckOutcome {
    std::string suite;
    std::string name;
    bool pass = false;
    // reported only; does not decide the exit status
    bool informational = false;
    std::string detail;
};

const std::vector<std::string>& known_suites();
// Throws UnknownSuite before running anything when a name is not known.
std::vector<CheckOutcome> run_checks(const std::vector<std::string>& suites, const PipelineRun& run);
bool all_pass(const std::vector<CheckOutcome>& outcomes);

}  // namespace pomq
