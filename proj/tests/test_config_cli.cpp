#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "twi/cli.hpp"
#include "twi/config.hpp"

using namespace twi;
using nlohmann::json;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
    return path;
}

int run_cli(const std::vector<std::string>& args, std::string* stdout_text = nullptr,
            std::string* stderr_text = nullptr) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(args, out, err);
    if (stdout_text) *stdout_text = out.str();
    if (stderr_text) *stderr_text = err.str();
    return code;
}

}  // namespace

TEST_CASE("optimize config parses summaries and rejects unknown keys") {
    const json doc = {
        {"epsilon", 0.1},
        {"summaries",
         {{{"mu_ms", 100.0}, {"sigma_ms", 10.0}},
          {{"mu_ms", 300.0}, {"sigma_ms", 50.0}, {"drop_prob", 0.01}}}},
    };
    const auto config = cfg::parse_optimize_config(doc);
    CHECK(config.summaries.size() == 2);
    CHECK(config.summaries[1].sigma2_ms2 == doctest::Approx(2500.0));
    CHECK(config.summaries[1].drop_prob == 0.01);

    json bad = doc;
    bad["sumaries"] = json::array();
    CHECK_THROWS_WITH_AS(cfg::parse_optimize_config(bad),
                         doctest::Contains("$.sumaries"), cfg::ConfigError);

    json bad_nested = doc;
    bad_nested["summaries"][0]["mu"] = 1.0;
    CHECK_THROWS_WITH_AS(cfg::parse_optimize_config(bad_nested),
                         doctest::Contains("$.summaries[0].mu"), cfg::ConfigError);
}

TEST_CASE("optimize config parses modeled paths with snr-derived sr failure") {
    const json doc = {
        {"epsilon", 0.1},
        {"tf_ms", 10.0},
        {"paths",
         {{{"id", "direct"},
           {"hop_count", 0},
           {"propagation", {{"d_m", 100.0}, {"v_m_per_ms", 3.0e5}}}},
          {{"id", "relay"},
           {"hop_count", 2},
           {"propagation", {{"d_m", 100.0}, {"v_m_per_ms", 0.3}}},
           {"first_computation", {{"c_min_ms", 0.0}, {"c_max_ms", 10.0}}},
           {"relay_hops",
            {{{"fail_prob", 0.1}, {"max_attempts", 4}, {"c_min_ms", 0.0}, {"c_max_ms", 10.0}}}},
           {"sr", {{"snr", 1.0}, {"max_attempts", 3}}},
           {"pt", {{"fail_prob", 0.05}, {"max_attempts", 5}}}}}},
    };
    const auto config = cfg::parse_optimize_config(doc);
    REQUIRE(config.paths.size() == 2);
    CHECK(config.paths[0].hop_count == 0);
    CHECK(config.paths[1].sr.fail_prob == doctest::Approx(0.5));  // zeta(snr=1)
    CHECK(config.paths[1].hops.size() == 1);

    json conflict = doc;
    conflict["paths"][1]["sr"]["fail_prob"] = 0.1;
    CHECK_THROWS_AS(cfg::parse_optimize_config(conflict), cfg::ConfigError);
}

TEST_CASE("experiment config round-trips through its effective form") {
    const json doc = {
        {"mode", "sweep"},
        {"trials", 50},
        {"seed", 123},
        {"epsilon", 0.08},
        {"sweep",
         {{"parameter", "rho"},
          {"values", {0.1, 0.2}},
          {"k", 2},
          {"h_max", 4},
          {"pins", {{"a_max", 10}}}}},
    };
    const auto config = cfg::parse_experiment_config(doc);
    CHECK(config.core.mode == exp::Mode::Sweep);
    CHECK(config.core.sweep_parameter == exp::SweepParameter::HopFailProb);
    CHECK(config.core.ranges.fixed_amax == 10);
    CHECK(config.output_csv == "sweep.csv");

    const json effective = cfg::effective_config(config);
    const auto reparsed = cfg::parse_experiment_config(effective);
    CHECK(cfg::effective_config(reparsed) == effective);
}

TEST_CASE("experiment config rejects schema violations with key paths") {
    CHECK_THROWS_WITH_AS(cfg::parse_experiment_config(json{{"mode", "scenario_A"}, {"trals", 5}}),
                         doctest::Contains("$.trals"), cfg::ConfigError);
    CHECK_THROWS_WITH_AS(cfg::parse_experiment_config(json{{"mode", "scenario_Z"}}),
                         doctest::Contains("mode"), cfg::ConfigError);
    CHECK_THROWS_AS(cfg::parse_experiment_config(json{{"mode", "sweep"}}), cfg::ConfigError);
    // Scenario configs cannot carry sweep settings.
    CHECK_THROWS_AS(cfg::parse_experiment_config(
                        json{{"mode", "scenario_A"}, {"sweep", {{"parameter", "K"}}}}),
                    cfg::ConfigError);
}

TEST_CASE("cli pmf prints rows and the moment footer") {
    std::string out;
    CHECK(run_cli({"pmf", "--stage", "geom", "--fail", "0", "--limit", "5", "--tf", "10"}, &out) ==
          cli::kExitOk);
    CHECK(out.find("n,delay_ms,mass\n1,10,1\n") != std::string::npos);
    CHECK(out.find("# mean_ms=10 variance_ms2=0") != std::string::npos);

    CHECK(run_cli({"pmf", "--stage", "n2", "--rho", "0.7", "--amax", "25", "--cmin", "0",
                   "--cmax", "10", "--tf", "10"},
                  &out) == cli::kExitOk);
    CHECK(out.find("mean_ms=43.29980212") != std::string::npos);
}

TEST_CASE("cli rejects bad arguments with the usage exit code") {
    std::string err;
    CHECK(run_cli({"pmf", "--stage", "bogus"}, nullptr, &err) == cli::kExitUsage);
    CHECK(run_cli({"pmf", "--stage", "geom", "--fail", "1.0"}, nullptr, &err) == cli::kExitUsage);
    CHECK(run_cli({"unknown-command"}, nullptr, &err) == cli::kExitUsage);
}

TEST_CASE("cli optimize reports both policies and flags infeasibility") {
    const auto feasible = write_temp("twi_opt_feasible.json", R"({
        "epsilon": 0.1,
        "summaries": [
            {"mu_ms": 100.0, "sigma_ms": 10.0},
            {"mu_ms": 300.0, "sigma_ms": 50.0}
        ]
    })");
    std::string out;
    CHECK(run_cli({"optimize", "--config", feasible.string()}, &out) == cli::kExitOk);
    CHECK(out.find("optimal: TWI = 450.6") != std::string::npos);
    CHECK(out.find("uniform: TWI =") != std::string::npos);

    CHECK(run_cli({"optimize", "--config", feasible.string(), "--json"}, &out) == cli::kExitOk);
    const json doc = json::parse(out);
    CHECK(doc.at("optimal").at("feasible").get<bool>());
    CHECK(doc.at("optimal").at("twi_ms").get<double>() < doc.at("uniform").at("twi_ms").get<double>());

    const auto infeasible = write_temp("twi_opt_infeasible.json", R"({
        "epsilon": 0.05,
        "summaries": [
            {"mu_ms": 100.0, "sigma_ms": 10.0, "drop_prob": 0.04},
            {"mu_ms": 300.0, "sigma_ms": 50.0, "drop_prob": 0.03}
        ]
    })");
    std::string err;
    CHECK(run_cli({"optimize", "--config", infeasible.string()}, &out, &err) ==
          cli::kExitInfeasible);
    CHECK(err.find("infeasible") != std::string::npos);

    CHECK(run_cli({"optimize", "--config", "/nonexistent.json"}, &out, &err) == cli::kExitUsage);
}

TEST_CASE("cli experiment writes the csv and effective config") {
    const auto dir = std::filesystem::temp_directory_path();
    const auto csv_path = dir / "twi_test_scenario.csv";
    const auto config = write_temp("twi_exp_config.json", R"({
        "mode": "scenario_A",
        "trials": 10,
        "seed": 5,
        "output_csv": ")" + csv_path.string() + R"("
    })");

    std::string out;
    CHECK(run_cli({"experiment", "--config", config.string()}, &out) == cli::kExitOk);
    REQUIRE(std::filesystem::exists(csv_path));

    std::ifstream csv(csv_path);
    std::stringstream first_run;
    first_run << csv.rdbuf();
    CHECK(first_run.str().find("scenario,A,optimal") != std::string::npos);

    const auto effective_path = csv_path.string() + ".effective.json";
    REQUIRE(std::filesystem::exists(effective_path));
    std::ifstream eff(effective_path);
    const json effective = json::parse(eff);
    CHECK(effective.at("seed").get<std::uint64_t>() == 5);

    // Same seed, byte-identical CSV.
    CHECK(run_cli({"experiment", "--config", config.string()}, &out) == cli::kExitOk);
    std::ifstream csv2(csv_path);
    std::stringstream second_run;
    second_run << csv2.rdbuf();
    CHECK(first_run.str() == second_run.str());
}

TEST_CASE("cli validate passes healthy stages and flags breaches") {
    std::string out;
    CHECK(run_cli({"validate", "--stage", "geom", "--fail", "0.3", "--limit", "4", "--tf", "10",
                   "--samples", "50000", "--seed", "3"},
                  &out) == cli::kExitOk);
    CHECK(out.find("tv_distance") != std::string::npos);

    // Point-mass stage: exact agreement.
    CHECK(run_cli({"validate", "--stage", "geom", "--fail", "0", "--limit", "3", "--samples",
                   "1000"},
                  &out) == cli::kExitOk);
    CHECK(out.find("tv_distance:   0 ") != std::string::npos);

    // An impossible tolerance must trip the breach exit code.
    std::string err;
    CHECK(run_cli({"validate", "--stage", "n2", "--rho", "0.4", "--amax", "6", "--cmin", "0",
                   "--cmax", "10", "--samples", "20000", "--tv-tol", "1e-9"},
                  &out, &err) == cli::kExitToleranceBreach);
    CHECK(err.find("breach") != std::string::npos);
}

TEST_CASE("default seed honours the environment override") {
    const char* saved = std::getenv("TWI_SEED");
    setenv("TWI_SEED", "987654", 1);
    CHECK(cfg::default_seed() == 987654ULL);
    setenv("TWI_SEED", "not-a-number", 1);
    CHECK_THROWS_AS(cfg::default_seed(), cfg::ConfigError);
    if (saved) {
        setenv("TWI_SEED", saved, 1);
    } else {
        unsetenv("TWI_SEED");
    }
    CHECK(cfg::default_seed() != 0);
}
