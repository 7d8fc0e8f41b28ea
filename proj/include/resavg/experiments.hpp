#pragma once

#include "resavg/errors.hpp"
#include "resavg/scenario.hpp"

#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace resavg {

struct Verdict {
    std::string name;
    bool pass = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string relation;  // "<=", ">=", "<" ...
};

struct ExperimentResult {
    ExperimentKind kind = ExperimentKind::E1;
    std::uint64_t scenario_hash = 0;
    std::uint64_t seed = 0;
    std::vector<Verdict> verdicts;
    std::vector<std::string> files;  // relative to the output directory
    std::vector<std::string> notes;
    std::string failed_stage;  // set when a stage threw

    [[nodiscard]] bool passed() const;
};

struct RunOptions {
    std::filesystem::path out_dir;
    Execution execution = Execution::parallel;
    std::optional<std::uint64_t> seed_override;
};

/// Raised by run_experiment when a stage throws; `cause` is the original error.
struct StageError : Error {
    StageError(std::string stage_name, std::exception_ptr original, const std::string& message);
    std::string stage;
    std::exception_ptr cause;
};

/// Runs the scenario's experiment and writes CSV tables, distances.json (where
/// distances are computed), summary.json, summary.txt and metadata.json into
/// out_dir. Everything except metadata.json is a deterministic function of the
/// scenario and seed. On a stage failure the partial summary is written and the
/// original error is rethrown wrapped in a StageError.
ExperimentResult run_experiment(const ScenarioConfig& cfg, const RunOptions& opt);

}  // namespace resavg
