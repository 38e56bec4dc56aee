#include "twi/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace twi::exp {

namespace {

constexpr double kBudgetSlack = 1e-4;

struct TrialOutcome {
    opt::TwiSolution optimal;
    opt::TwiSolution uniform;
};

PathSpec make_direct_path(std::string id, const mc::ModalityParams& modality,
                          const mc::ParameterRanges& ranges, const FrameTime& frame) {
    PathSpec path;
    path.path_id = std::move(id);
    path.hop_count = 0;
    path.frame = frame;
    path.propagation = {ranges.cell_radius_m, modality.speed_m_per_ms,
                        PropagationKind::EventToBs};
    return path;
}

PathSpec make_one_hop_path(std::string id, const mc::ModalityParams& modality,
                           const mc::ParameterRanges& ranges, const FrameTime& frame,
                           mc::SubstreamRng& rng) {
    PathSpec path;
    path.path_id = std::move(id);
    path.hop_count = 1;
    path.frame = frame;
    path.propagation = {ranges.cell_radius_m, modality.speed_m_per_ms,
                        PropagationKind::EventToSensor};
    path.first_computation = {modality.c_min_ms, modality.c_max_ms};
    path.sr = {rng.uniform(ranges.zeta_min, ranges.zeta_max),
               rng.uniform_int(ranges.mmax_min, ranges.mmax_max)};
    path.pt = {rng.uniform(ranges.epslink_min, ranges.epslink_max),
               rng.uniform_int(ranges.nmax_min, ranges.nmax_max)};
    return path;
}

std::vector<PathSpec> scenario_paths(Mode mode, const mc::ParameterRanges& ranges,
                                     const FrameTime& frame, mc::SubstreamRng& rng) {
    std::vector<PathSpec> paths;
    switch (mode) {
        case Mode::ScenarioA:
            paths.push_back(make_direct_path("direct_light", ranges.light, ranges, frame));
            paths.push_back(make_one_hop_path("relay_light", ranges.light, ranges, frame, rng));
            break;
        case Mode::ScenarioB:
            paths.push_back(make_direct_path("direct_sound", ranges.sound, ranges, frame));
            paths.push_back(make_one_hop_path("relay_sound", ranges.sound, ranges, frame, rng));
            break;
        case Mode::ScenarioC:
            paths.push_back(make_one_hop_path("relay_light", ranges.light, ranges, frame, rng));
            paths.push_back(make_one_hop_path("relay_sound", ranges.sound, ranges, frame, rng));
            break;
        case Mode::Sweep:
            throw std::logic_error("scenario_paths: sweep mode has no fixed composition");
    }
    return paths;
}

TrialOutcome solve_trial(const std::vector<PathSpec>& paths, double epsilon, double tol_ms) {
    std::vector<PathSummary> summaries;
    summaries.reserve(paths.size());
    double drop_sum = 0.0;
    for (const PathSpec& p : paths) {
        summaries.push_back(summarize_path(p));
        drop_sum += summaries.back().drop_prob;
    }
    // Keep the instance feasible at the union-bound edge.
    const double adjusted =
        std::min(std::max(epsilon, drop_sum + kBudgetSlack), 1.0 - 1e-12);
    const opt::ReliabilityBudget budget{adjusted};
    return {opt::solve_min_twi(summaries, budget, tol_ms),
            opt::solve_uniform_baseline(summaries, budget)};
}

// Deterministic parallel map over trials: outcomes land in trial order no
// matter how the threads are scheduled.
std::vector<TrialOutcome> run_trials(int trials,
                                     const std::function<TrialOutcome(int)>& trial_fn) {
    std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(trials));
    const unsigned workers =
        std::max(1u, std::min(std::thread::hardware_concurrency(), 8u));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (int t = static_cast<int>(w); t < trials; t += static_cast<int>(workers)) {
                outcomes[static_cast<std::size_t>(t)] = trial_fn(t);
            }
        });
    }
    for (std::thread& th : pool) th.join();
    return outcomes;
}

ResultRow aggregate(const std::vector<TrialOutcome>& outcomes, opt::Policy policy,
                    std::string parameter, std::string value) {
    ResultRow row;
    row.parameter = std::move(parameter);
    row.value = std::move(value);
    row.policy = policy;

    std::vector<double> twi;
    std::vector<double> eps_sums;
    std::size_t path_count = 0;
    int feasible = 0;
    for (const TrialOutcome& outcome : outcomes) {
        const opt::TwiSolution& sol =
            (policy == opt::Policy::Optimal) ? outcome.optimal : outcome.uniform;
        if (!sol.feasible) {
            ++row.infeasible_count;
            continue;
        }
        ++feasible;
        twi.push_back(sol.twi_ms);
        path_count = std::max(path_count, sol.per_path.size());
        eps_sums.resize(std::max(eps_sums.size(), sol.per_path.size()), 0.0);
        for (std::size_t i = 0; i < sol.per_path.size(); ++i) {
            eps_sums[i] += sol.per_path[i].epsilon;
        }
    }
    if (feasible == 0) return row;

    double sum = 0.0;
    row.min_twi_ms = twi.front();
    row.max_twi_ms = twi.front();
    for (double x : twi) {
        sum += x;
        row.min_twi_ms = std::min(row.min_twi_ms, x);
        row.max_twi_ms = std::max(row.max_twi_ms, x);
    }
    row.mean_twi_ms = sum / feasible;
    double sq = 0.0;
    for (double x : twi) {
        sq += (x - row.mean_twi_ms) * (x - row.mean_twi_ms);
    }
    row.std_twi_ms = (feasible > 1) ? std::sqrt(sq / (feasible - 1)) : 0.0;
    row.mean_eps_per_path.resize(path_count);
    for (std::size_t i = 0; i < path_count; ++i) {
        row.mean_eps_per_path[i] = eps_sums[i] / feasible;
    }
    return row;
}

std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", x);
    return buf;
}

}  // namespace

std::string to_string(Mode mode) {
    switch (mode) {
        case Mode::ScenarioA: return "scenario_A";
        case Mode::ScenarioB: return "scenario_B";
        case Mode::ScenarioC: return "scenario_C";
        case Mode::Sweep: return "sweep";
    }
    return "unknown";
}

std::string to_string(SweepParameter parameter) {
    switch (parameter) {
        case SweepParameter::PathCount: return "K";
        case SweepParameter::MaxSensors: return "h_max";
        case SweepParameter::FrameMs: return "tf_ms";
        case SweepParameter::CellRadius: return "d_m";
        case SweepParameter::HopFailProb: return "rho";
        case SweepParameter::AccessFailProb: return "zeta_eps";
        case SweepParameter::GlobalEpsilon: return "epsilon";
    }
    return "unknown";
}

void ExperimentConfig::validate() const {
    if (trials < 1) {
        throw std::invalid_argument("ExperimentConfig: trials must be >= 1");
    }
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
        throw std::invalid_argument("ExperimentConfig: epsilon must lie in (0, 1)");
    }
    if (!(tol_ms > 0.0)) {
        throw std::invalid_argument("ExperimentConfig: tol_ms must be > 0");
    }
    frame.validate();
    ranges.validate();
    if (mode == Mode::Sweep) {
        if (grid.empty()) {
            throw std::invalid_argument("ExperimentConfig: sweep requires grid values");
        }
        if (path_count < 1) {
            throw std::invalid_argument("ExperimentConfig: path_count must be >= 1");
        }
        if (h_max < 0) {
            throw std::invalid_argument("ExperimentConfig: h_max must be >= 0");
        }
        for (double g : grid) {
            switch (sweep_parameter) {
                case SweepParameter::PathCount:
                case SweepParameter::MaxSensors:
                    if (g < (sweep_parameter == SweepParameter::PathCount ? 1.0 : 0.0) ||
                        g != std::floor(g)) {
                        throw std::invalid_argument("ExperimentConfig: bad integer grid value");
                    }
                    break;
                case SweepParameter::FrameMs:
                case SweepParameter::CellRadius:
                    if (!(g > 0.0)) {
                        throw std::invalid_argument("ExperimentConfig: grid value must be > 0");
                    }
                    break;
                case SweepParameter::HopFailProb:
                case SweepParameter::AccessFailProb:
                    if (!(g >= 0.0 && g < 1.0)) {
                        throw std::invalid_argument(
                            "ExperimentConfig: probability grid value outside [0, 1)");
                    }
                    break;
                case SweepParameter::GlobalEpsilon:
                    if (!(g > 0.0 && g < 1.0)) {
                        throw std::invalid_argument(
                            "ExperimentConfig: epsilon grid value outside (0, 1)");
                    }
                    break;
            }
        }
    }
}

ExperimentResult run_scenario(const ExperimentConfig& config) {
    config.validate();
    if (config.mode == Mode::Sweep) {
        throw std::invalid_argument("run_scenario: config is in sweep mode");
    }

    const auto outcomes = run_trials(config.trials, [&](int trial) {
        mc::SubstreamRng rng(config.seed, static_cast<std::uint64_t>(trial));
        const auto paths = scenario_paths(config.mode, config.ranges, config.frame, rng);
        return solve_trial(paths, config.epsilon, config.tol_ms);
    });

    const std::string label = to_string(config.mode).substr(std::string("scenario_").size());
    ExperimentResult result;
    result.rows.push_back(aggregate(outcomes, opt::Policy::Optimal, "scenario", label));
    result.rows.push_back(aggregate(outcomes, opt::Policy::Uniform, "scenario", label));
    return result;
}

ExperimentResult run_sweep(const ExperimentConfig& config) {
    config.validate();
    if (config.mode != Mode::Sweep) {
        throw std::invalid_argument("run_sweep: config is not in sweep mode");
    }

    ExperimentResult result;
    for (std::size_t g = 0; g < config.grid.size(); ++g) {
        const double value = config.grid[g];

        mc::TopologySpec topo;
        topo.path_count = config.path_count;
        topo.h_max = config.h_max;
        mc::ParameterRanges ranges = config.ranges;
        FrameTime frame = config.frame;
        double epsilon = config.epsilon;
        switch (config.sweep_parameter) {
            case SweepParameter::PathCount: topo.path_count = static_cast<int>(value); break;
            case SweepParameter::MaxSensors: topo.h_max = static_cast<int>(value); break;
            case SweepParameter::FrameMs: frame.tf_ms = value; break;
            case SweepParameter::CellRadius: ranges.cell_radius_m = value; break;
            case SweepParameter::HopFailProb: ranges.fixed_rho = value; break;
            case SweepParameter::AccessFailProb:
                ranges.fixed_zeta = value;
                ranges.fixed_epslink = value;
                break;
            case SweepParameter::GlobalEpsilon: epsilon = value; break;
        }

        const std::uint64_t stream_base =
            static_cast<std::uint64_t>(g) * static_cast<std::uint64_t>(config.trials);
        const auto outcomes = run_trials(config.trials, [&](int trial) {
            mc::SubstreamRng rng(config.seed, stream_base + static_cast<std::uint64_t>(trial));
            const auto paths = mc::random_topology(topo, ranges, frame, rng);
            return solve_trial(paths, epsilon, config.tol_ms);
        });

        const std::string name = to_string(config.sweep_parameter);
        const std::string value_str = format_double(value);
        result.rows.push_back(aggregate(outcomes, opt::Policy::Optimal, name, value_str));
        result.rows.push_back(aggregate(outcomes, opt::Policy::Uniform, name, value_str));
    }
    return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    return (config.mode == Mode::Sweep) ? run_sweep(config) : run_scenario(config);
}

void write_csv(const ExperimentResult& result, std::ostream& out) {
    out << "parameter,value,policy,mean_twi_ms,std_twi_ms,min_twi_ms,max_twi_ms,"
           "mean_eps_per_path,infeasible_count\n";
    for (const ResultRow& row : result.rows) {
        out << row.parameter << ',' << row.value << ','
            << (row.policy == opt::Policy::Optimal ? "optimal" : "uniform") << ','
            << format_double(row.mean_twi_ms) << ',' << format_double(row.std_twi_ms) << ','
            << format_double(row.min_twi_ms) << ',' << format_double(row.max_twi_ms) << ',';
        for (std::size_t i = 0; i < row.mean_eps_per_path.size(); ++i) {
            if (i) out << ';';
            out << format_double(row.mean_eps_per_path[i]);
        }
        out << ',' << row.infeasible_count << '\n';
    }
}

}  // namespace twi::exp
