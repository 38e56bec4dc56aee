#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "twi/experiments.hpp"
#include "twi/path_model.hpp"

namespace twi::cfg {

// Raised for schema violations; carries the offending key path.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Input for the optimize command: a global budget plus either fully modeled
// paths or raw (mu, sigma, drop) summaries.
struct OptimizeConfig {
    double epsilon = 0.1;
    double tol_ms = 1e-3;
    FrameTime frame{10.0};
    std::vector<PathSpec> paths;
    std::vector<PathSummary> summaries;  // used when paths is empty

    void validate() const;
};

// Experiment command input: the library-level config plus the output target.
struct ExperimentFileConfig {
    exp::ExperimentConfig core;
    std::string output_csv;
};

OptimizeConfig parse_optimize_config(const nlohmann::json& doc);
OptimizeConfig load_optimize_config(const std::string& file);

ExperimentFileConfig parse_experiment_config(const nlohmann::json& doc);
ExperimentFileConfig load_experiment_config(const std::string& file);

// Canonical re-emission with every default materialised; parsing it again
// yields an identical execution plan.
nlohmann::json effective_config(const ExperimentFileConfig& config);

// Default master seed, overridable through the TWI_SEED environment variable.
std::uint64_t default_seed();

}  // namespace twi::cfg
