#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "wisq/relaxed.hpp"
#include "wisq/simulator.hpp"

namespace wisq {

/// A whole experiment: the system, which policies to run, the N sweep,
/// horizon, seeds and the hitting-time radius. Presets fill in the stock
/// parameter sets; explicit fields override them one by one.
struct ExperimentConfig {
    SystemConfig system;  // users holds the first sweep entry
    std::vector<int> sweep;
    long horizon = 10000;
    std::vector<uint64_t> seeds{1};
    double epsilon = 0.05;
    std::vector<PolicyKind> policies{PolicyKind::WhittleIndex};
    enum class Start { Empty, Full, Both } start = Start::Empty;
    std::string output_dir;
    std::string preset = "none";
};

/// The stock parameter sets behind the figure presets; throws model_error
/// for an unknown id.
ExperimentConfig preset_experiment(const std::string& id);

/// Strict parse: unknown fields are rejected, every value is validated.
/// Throws nlohmann::json::exception on malformed JSON and model_error on
/// invalid values.
ExperimentConfig parse_experiment(const nlohmann::json& j);
ExperimentConfig load_experiment_file(const std::string& path);

nlohmann::json experiment_to_json(const ExperimentConfig& config);
nlohmann::json solution_to_json(const RelaxedSolution& solution);
nlohmann::json trace_to_json(const SimTrace& trace, long hitting = -2);

/// Smallest user count that makes every class population integral and the
/// budget feasible; used when a config omits "users".
int minimal_users(const std::vector<ClassSpec>& classes, double alpha);

}  // namespace wisq
