#include "ringform/runner.hpp"
#include "ringform/scenario.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace {

int fail(const std::exception& e)
{
    std::cerr << ringform::error_line(e) << '\n';
    return ringform::exit_status(e);
}

// Prints the report; exit status comes from the run error, then from the
// embedded expectations (1 when any of them failed).
int finish(const ringform::RunReport& report)
{
    if (report.error) {
        try {
            std::rethrow_exception(report.error);
        } catch (const std::exception& e) {
            return fail(e);
        }
    }
    if (!report.expectations_passed()) {
        std::cerr << "error=expectation message=scenario expectations failed\n";
        return 1;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Consensus analysis and simulation over weighted ring digraphs"};
    app.require_subcommand(1);

    int m = 0;
    double k = 0.0;
    int ell = 1;
    double k_min = 0.0;
    double k_max = 0.0;
    int steps = 0;
    std::string config_path;
    std::string out_path;
    std::string metrics_path;
    std::string csv_path;

    auto* analyze = app.add_subcommand("analyze", "Spectral report for (m, k)");
    analyze->add_option("--m", m, "Macro-vertex count")->required();
    analyze->add_option("--k", k, "Ring gain")->required();
    analyze->add_option("--csv", csv_path, "Eigenvalue CSV (ell,re,im)");

    auto* locus = app.add_subcommand("root-locus", "Block eigenvalues over a k sweep");
    locus->add_option("--m", m)->required();
    locus->add_option("--ell", ell, "Block index, 1..m")->required();
    locus->add_option("--k-min", k_min)->required();
    locus->add_option("--k-max", k_max)->required();
    locus->add_option("--steps", steps)->required();
    locus->add_option("--out", out_path)->required();

    auto* sim_di = app.add_subcommand("simulate-di", "Double-integrator swarm");
    sim_di->add_option("--config", config_path)->required();
    sim_di->add_option("--out", out_path);

    auto* sim_quad = app.add_subcommand("simulate-quad", "Quadrotor formation");
    sim_quad->add_option("--config", config_path)->required();
    sim_quad->add_option("--out", out_path);
    sim_quad->add_option("--metrics", metrics_path);

    auto* plan = app.add_subcommand("plan-velocity", "Gain and velocity plan for a target");
    plan->add_option("--config", config_path)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(ringform::ExitCode::validation);
    }

    try {
        if (analyze->parsed()) {
            std::optional<std::string> csv;
            if (!csv_path.empty())
                csv = csv_path;
            ringform::run_analyze(m, k, std::cout, csv);
            return 0;
        }
        if (locus->parsed()) {
            ringform::run_root_locus(m, ell, k_min, k_max, steps, out_path);
            return 0;
        }

        ringform::Subcommand command = ringform::Subcommand::plan_velocity;
        ringform::RunOutputs outputs;
        if (sim_di->parsed())
            command = ringform::Subcommand::simulate_di;
        if (sim_quad->parsed())
            command = ringform::Subcommand::simulate_quad;
        if (!out_path.empty())
            outputs.csv = out_path;
        if (!metrics_path.empty())
            outputs.metrics = metrics_path;

        const std::uint64_t seed = ringform::seed_from_environment();
        const ringform::ScenarioConfig config = ringform::load_config(config_path);
        return finish(ringform::run_scenario(config, command, outputs, seed, std::cout));
    } catch (const std::exception& e) {
        return fail(e);
    }
}
