#include "twi/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "twi/config.hpp"
#include "twi/delay_components.hpp"
#include "twi/experiments.hpp"
#include "twi/monte_carlo.hpp"
#include "twi/optimizer.hpp"

namespace twi::cli {

namespace {

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", x);
    return buf;
}

struct StageArgs {
    std::string stage;
    double d_m = 100.0;
    double v_m_per_ms = 3.0e5;
    double c_min_ms = 0.0;
    double c_max_ms = 0.0;
    double tf_ms = 10.0;
    double rho = 0.1;
    int a_max = 5;
    double fail = 0.0;
    int limit = 5;
};

void add_stage_options(CLI::App* cmd, StageArgs& args) {
    cmd->add_option("--stage", args.stage, "stage kind: geom, n1, or n2")
        ->required()
        ->check(CLI::IsMember({"geom", "n1", "n2"}));
    cmd->add_option("--D", args.d_m, "cell radius in meters (n1)");
    cmd->add_option("--v", args.v_m_per_ms, "propagation speed in m/ms (n1)");
    cmd->add_option("--cmin", args.c_min_ms, "computation lower bound in ms (n1, n2)");
    cmd->add_option("--cmax", args.c_max_ms, "computation upper bound in ms (n1, n2)");
    cmd->add_option("--tf", args.tf_ms, "frame duration in ms");
    cmd->add_option("--rho", args.rho, "hop failure probability (n2)");
    cmd->add_option("--amax", args.a_max, "hop retry limit (n2)");
    cmd->add_option("--fail", args.fail, "per-frame failure probability (geom)");
    cmd->add_option("--limit", args.limit, "retry limit (geom)");
}

StageDistribution analytic_stage_pmf(const StageArgs& args) {
    const FrameTime frame{args.tf_ms};
    if (args.stage == "geom") {
        return delay::truncated_geometric_pmf({args.fail, args.limit}, frame);
    }
    if (args.stage == "n1") {
        return delay::n1_pmf({args.d_m, args.v_m_per_ms, PropagationKind::EventToSensor},
                             {args.c_min_ms, args.c_max_ms}, frame);
    }
    return delay::n2_pmf({args.rho, args.a_max}, {args.c_min_ms, args.c_max_ms}, frame);
}

mc::StageSpec stage_spec(const StageArgs& args) {
    const FrameTime frame{args.tf_ms};
    if (args.stage == "geom") {
        return mc::TruncGeomStage{{args.fail, args.limit}, frame};
    }
    if (args.stage == "n1") {
        return mc::FirstStage{{args.d_m, args.v_m_per_ms, PropagationKind::EventToSensor},
                              {args.c_min_ms, args.c_max_ms},
                              frame};
    }
    return mc::RelayHopStage{{args.rho, args.a_max}, {args.c_min_ms, args.c_max_ms}, frame};
}

void print_pmf(const StageDistribution& dist, std::ostream& out) {
    out << "n,delay_ms,mass\n";
    for (int n = dist.n_min; n <= dist.n_max(); ++n) {
        out << n << ',' << fmt(n * dist.frame_ms) << ',' << fmt(dist.mass_at(n)) << '\n';
    }
    out << "# mean_ms=" << fmt(dist.mean_ms) << " variance_ms2=" << fmt(dist.variance_ms2)
        << '\n';
}

int cmd_pmf(const StageArgs& args, const std::string& csv_path, std::ostream& out,
            std::ostream& err) {
    const StageDistribution dist = analytic_stage_pmf(args);
    if (csv_path.empty()) {
        print_pmf(dist, out);
        return kExitOk;
    }
    std::ofstream file(csv_path);
    if (!file) {
        err << "error: cannot write " << csv_path << '\n';
        return kExitUsage;
    }
    print_pmf(dist, file);
    out << "wrote " << csv_path << '\n';
    return kExitOk;
}

nlohmann::json solution_json(const opt::TwiSolution& sol,
                             const std::vector<PathSummary>& summaries) {
    nlohmann::json doc;
    doc["feasible"] = sol.feasible;
    if (sol.feasible) {
        doc["twi_ms"] = sol.twi_ms;
        nlohmann::json paths = nlohmann::json::array();
        for (std::size_t i = 0; i < sol.per_path.size(); ++i) {
            paths.push_back({{"alpha", sol.per_path[i].alpha},
                             {"epsilon", sol.per_path[i].epsilon},
                             {"drop_prob", summaries[i].drop_prob}});
        }
        doc["paths"] = std::move(paths);
    }
    return doc;
}

void print_solution(const char* name, const opt::TwiSolution& sol,
                    const std::vector<PathSummary>& summaries, std::ostream& out) {
    out << name << ": TWI = " << fmt(sol.twi_ms) << " ms\n";
    for (std::size_t i = 0; i < sol.per_path.size(); ++i) {
        out << "  path " << (i + 1) << ": alpha=" << fmt(sol.per_path[i].alpha)
            << " eps=" << fmt(sol.per_path[i].epsilon) << " p=" << fmt(summaries[i].drop_prob)
            << " mu=" << fmt(summaries[i].mu_ms) << " sigma=" << fmt(summaries[i].sigma_ms())
            << '\n';
    }
}

int cmd_optimize(const std::string& config_path, bool as_json, std::ostream& out,
                 std::ostream& err) {
    const cfg::OptimizeConfig config = cfg::load_optimize_config(config_path);
    std::vector<PathSummary> summaries = config.summaries;
    for (const PathSpec& path : config.paths) {
        summaries.push_back(summarize_path(path));
    }
    const opt::ReliabilityBudget budget{config.epsilon};
    const opt::TwiSolution optimal = opt::solve_min_twi(summaries, budget, config.tol_ms);
    const opt::TwiSolution uniform = opt::solve_uniform_baseline(summaries, budget);

    if (!optimal.feasible) {
        double drop_sum = 0.0;
        for (const PathSummary& s : summaries) drop_sum += s.drop_prob;
        if (as_json) {
            out << nlohmann::json{{"feasible", false},
                                  {"drop_sum", drop_sum},
                                  {"epsilon", config.epsilon}}
                       .dump(2)
                << '\n';
        } else {
            err << "infeasible: total drop probability " << fmt(drop_sum)
                << " exceeds budget " << fmt(config.epsilon) << '\n';
        }
        return kExitInfeasible;
    }

    if (as_json) {
        nlohmann::json doc;
        doc["epsilon"] = config.epsilon;
        doc["optimal"] = solution_json(optimal, summaries);
        doc["uniform"] = solution_json(uniform, summaries);
        out << doc.dump(2) << '\n';
    } else {
        print_solution("optimal", optimal, summaries, out);
        print_solution("uniform", uniform, summaries, out);
    }
    return kExitOk;
}

int cmd_experiment(const std::string& config_path, const std::string& csv_override,
                   std::ostream& out, std::ostream& err) {
    cfg::ExperimentFileConfig config = cfg::load_experiment_config(config_path);
    if (!csv_override.empty()) {
        config.output_csv = csv_override;
    }
    const exp::ExperimentResult result = exp::run_experiment(config.core);

    std::ofstream csv(config.output_csv);
    if (!csv) {
        err << "error: cannot write " << config.output_csv << '\n';
        return kExitUsage;
    }
    exp::write_csv(result, csv);
    const std::string effective_path = config.output_csv + ".effective.json";
    std::ofstream effective(effective_path);
    if (!effective) {
        err << "error: cannot write " << effective_path << '\n';
        return kExitUsage;
    }
    effective << cfg::effective_config(config).dump(2) << '\n';

    out << "wrote " << config.output_csv << " and " << effective_path << '\n';
    for (const exp::ResultRow& row : result.rows) {
        out << "  " << row.parameter << '=' << row.value << ' '
            << (row.policy == opt::Policy::Optimal ? "optimal" : "uniform")
            << " mean=" << fmt(row.mean_twi_ms) << " ms std=" << fmt(row.std_twi_ms)
            << " infeasible=" << row.infeasible_count << '\n';
    }
    return kExitOk;
}

int cmd_validate(const StageArgs& args, std::size_t samples, std::uint64_t seed, double tv_tol,
                 double sigmas, std::ostream& out, std::ostream& err) {
    const StageDistribution analytic = analytic_stage_pmf(args);
    const StageDistribution empirical = mc::empirical_stage_pmf(stage_spec(args), samples, seed);

    const double tv = total_variation(analytic, empirical);
    const double n = static_cast<double>(samples);

    // Standard errors from the empirical draw: se(mean) = s/sqrt(n),
    // se(s^2) = sqrt((m4 - s^4)/n).
    const double se_mean = std::sqrt(empirical.variance_ms2 / n);
    double m4 = 0.0;
    for (int k = empirical.n_min; k <= empirical.n_max(); ++k) {
        const double d = k * empirical.frame_ms - empirical.mean_ms;
        m4 += empirical.mass_at(k) * d * d * d * d;
    }
    const double se_var =
        std::sqrt(std::max(m4 - empirical.variance_ms2 * empirical.variance_ms2, 0.0) / n);

    const double mean_gap = std::abs(analytic.mean_ms - empirical.mean_ms);
    const double var_gap = std::abs(analytic.variance_ms2 - empirical.variance_ms2);
    const bool mean_ok = mean_gap <= sigmas * se_mean || mean_gap == 0.0;
    const bool var_ok = var_gap <= sigmas * se_var || var_gap == 0.0;
    const bool tv_ok = tv <= tv_tol;

    out << "stage " << args.stage << ", " << samples << " samples, seed " << seed << '\n';
    out << "  mean_ms:       analytical=" << fmt(analytic.mean_ms)
        << " empirical=" << fmt(empirical.mean_ms) << " (se=" << fmt(se_mean) << ") "
        << (mean_ok ? "ok" : "BREACH") << '\n';
    out << "  variance_ms2:  analytical=" << fmt(analytic.variance_ms2)
        << " empirical=" << fmt(empirical.variance_ms2) << " (se=" << fmt(se_var) << ") "
        << (var_ok ? "ok" : "BREACH") << '\n';
    out << "  tv_distance:   " << fmt(tv) << " (tol=" << fmt(tv_tol) << ") "
        << (tv_ok ? "ok" : "BREACH") << '\n';

    if (!(mean_ok && var_ok && tv_ok)) {
        err << "validation tolerance breach\n";
        return kExitToleranceBreach;
    }
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"causal-path delay distributions and minimal integration windows"};
    app.require_subcommand(1);

    StageArgs pmf_args;
    std::string pmf_csv;
    CLI::App* pmf = app.add_subcommand("pmf", "print a stage delay PMF with moments");
    add_stage_options(pmf, pmf_args);
    pmf->add_option("--csv", pmf_csv, "write the PMF to a file instead of stdout");

    std::string optimize_config;
    bool optimize_json = false;
    CLI::App* optimize =
        app.add_subcommand("optimize", "solve the minimal window for explicit paths");
    optimize->add_option("--config", optimize_config, "JSON config file")->required();
    optimize->add_flag("--json", optimize_json, "machine-readable output");

    std::string experiment_config;
    std::string experiment_csv;
    CLI::App* experiment =
        app.add_subcommand("experiment", "run a scenario or sweep and emit CSV");
    experiment->add_option("--config", experiment_config, "JSON config file")->required();
    experiment->add_option("--out", experiment_csv, "override the output CSV path");

    StageArgs validate_args;
    std::size_t validate_samples = 1'000'000;
    std::uint64_t validate_seed = cfg::default_seed();
    double validate_tv_tol = 0.01;
    double validate_sigmas = 4.0;
    CLI::App* validate =
        app.add_subcommand("validate", "check a stage PMF against seeded sampling");
    add_stage_options(validate, validate_args);
    validate->add_option("--samples", validate_samples, "sample count (default 1e6)");
    validate->add_option("--seed", validate_seed, "RNG master seed");
    validate->add_option("--tv-tol", validate_tv_tol, "total-variation tolerance");
    validate->add_option("--sigmas", validate_sigmas, "moment tolerance in standard errors");

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("twi");
    for (const std::string& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (app.got_subcommand(pmf)) {
            return cmd_pmf(pmf_args, pmf_csv, out, err);
        }
        if (app.got_subcommand(optimize)) {
            return cmd_optimize(optimize_config, optimize_json, out, err);
        }
        if (app.got_subcommand(experiment)) {
            return cmd_experiment(experiment_config, experiment_csv, out, err);
        }
        return cmd_validate(validate_args, validate_samples, validate_seed, validate_tv_tol,
                            validate_sigmas, out, err);
    } catch (const cfg::ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        err << "invalid argument: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::domain_error& e) {
        err << "domain error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace twi::cli
