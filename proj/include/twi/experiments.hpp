#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "twi/monte_carlo.hpp"
#include "twi/optimizer.hpp"

namespace twi::exp {

enum class Mode { ScenarioA, ScenarioB, ScenarioC, Sweep };

enum class SweepParameter {
    PathCount,       // K
    MaxSensors,      // H_max
    FrameMs,         // T_f
    CellRadius,      // D
    HopFailProb,     // rho, pinned for every hop
    AccessFailProb,  // zeta and eps_link swept jointly equal
    GlobalEpsilon,   // reliability budget
};

std::string to_string(Mode mode);
std::string to_string(SweepParameter parameter);

struct ExperimentConfig {
    Mode mode = Mode::ScenarioA;
    int trials = 1000;
    std::uint64_t seed = 0;
    double epsilon = 0.1;
    double tol_ms = 1e-3;
    FrameTime frame{10.0};
    mc::ParameterRanges ranges;

    // Sweep-mode settings; ignored for scenarios.
    SweepParameter sweep_parameter = SweepParameter::PathCount;
    std::vector<double> grid;
    int path_count = 3;
    int h_max = 2;

    void validate() const;
};

struct ResultRow {
    std::string parameter;  // swept parameter name, or "scenario"
    std::string value;      // grid value, or the scenario label
    opt::Policy policy = opt::Policy::Optimal;
    double mean_twi_ms = 0.0;
    double std_twi_ms = 0.0;
    double min_twi_ms = 0.0;
    double max_twi_ms = 0.0;
    std::vector<double> mean_eps_per_path;
    int infeasible_count = 0;
};

struct ExperimentResult {
    std::vector<ResultRow> rows;
};

// One scenario, config.trials random draws: per trial the budget is lifted to
// max(epsilon, sum p_k + 1e-4) before solving both policies.
ExperimentResult run_scenario(const ExperimentConfig& config);

// Sweep over config.grid; every grid point aggregates config.trials random
// topologies per policy.
ExperimentResult run_sweep(const ExperimentConfig& config);

ExperimentResult run_experiment(const ExperimentConfig& config);

// CSV contract: header
// parameter,value,policy,mean_twi_ms,std_twi_ms,min_twi_ms,max_twi_ms,
// mean_eps_per_path,infeasible_count with one row per (grid point, policy).
void write_csv(const ExperimentResult& result, std::ostream& out);

}  // namespace twi::exp
