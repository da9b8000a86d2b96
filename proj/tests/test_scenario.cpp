#include "ringform/errors.hpp"
#include "ringform/runner.hpp"
#include "ringform/scenario.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ringform;

namespace {

const std::string scenario_dir = RINGFORM_SCENARIO_DIR;

std::vector<ConfigIssue> issues_of(const std::string& text)
{
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.issues();
    }
    return {};
}

bool mentions(const std::vector<ConfigIssue>& issues, int line, const std::string& fragment)
{
    for (const auto& i : issues)
        if (i.line == line && i.message.find(fragment) != std::string::npos)
            return true;
    return false;
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

} // namespace

TEST_CASE("minimal config takes the defaults")
{
    const ScenarioConfig c = parse_config("m = 2\nk = 0\n");
    CHECK(c.m == 2);
    CHECK(*c.k == 0.0);
    CHECK(c.dim == 3);
    CHECK(c.alpha == 1.0);
    CHECK(c.beta == 1.0);
    CHECK(c.kpz == 1.0);
    CHECK(c.kvz == 4.0);
    CHECK_FALSE(c.dt);
    CHECK(c.t_end == 10.0);
    CHECK(c.record_every == 1);
    CHECK(c.delta_candidates == std::vector<double>{-0.5, 0.5, 1.0, 1.5, 2.0});
    CHECK_FALSE(c.has_initial_conditions());
    CHECK_THROWS_AS(initial_conditions(c, 0), ValidationError);
}

TEST_CASE("agent count mismatch")
{
    std::string text = "m = 3\nk = 0\ndim = 1\n";
    for (int i = 1; i <= 5; ++i)
        text += "agent." + std::to_string(i) + ".p0 = 0\nagent." + std::to_string(i) + ".v0 = 0\n";
    const auto issues = issues_of(text);
    REQUIRE(issues.size() == 1);
    CHECK(issues[0].message == "agent count 5 ≠ 2m = 6");
}

TEST_CASE("every problem is reported with its line")
{
    const std::string text = "m = 2\n"           // 1
                             "k = nan\n"         // 2
                             "bogus = 3\n"       // 3
                             "alpha = 1\n"       // 4
                             "alpha = 2\n"       // 5
                             "beta = inf\n"      // 6
                             "no equals here\n"  // 7
                             "dim = 2\n"         // 8
                             "agent.1.p0 = 1\n"; // 9
    const auto issues = issues_of(text);
    CHECK(mentions(issues, 2, "non-finite"));
    CHECK(mentions(issues, 3, "unknown key 'bogus'"));
    CHECK(mentions(issues, 5, "duplicate key 'alpha'"));
    CHECK(mentions(issues, 6, "non-finite"));
    CHECK(mentions(issues, 7, "key = value"));
    CHECK(mentions(issues, 0, "agent count 1"));
    CHECK(issues.size() >= 6);

    CHECK(mentions(issues_of("k = 1\n"), 0, "missing required key 'm'"));
    CHECK(mentions(issues_of("m = 3\n"), 0, "missing required key 'k'"));
    CHECK(mentions(issues_of("m = 2\nk = 0\nsim.dt = 0\n"), 0, "sim.dt"));
    CHECK(mentions(issues_of("m = 2\nk = 0\nsim.dt = -1\n"), 0, "sim.dt"));
}

TEST_CASE("component counts and indices")
{
    std::string text = "m = 2\nk = 0\ndim = 2\n";
    for (int i = 1; i <= 4; ++i)
        text += "agent." + std::to_string(i) + ".p0 = 0, 0\nagent." + std::to_string(i) + ".v0 = 1, 2\n";
    const ScenarioConfig ok = parse_config(text);
    CHECK(ok.velocities.row(3) == Eigen::RowVector2d(1, 2));

    const auto short_row = issues_of(text + "agent.9.v0 = 1\n");
    CHECK(mentions(short_row, 0, "agent count 5"));
    CHECK(mentions(short_row, 12, "outside 1..4"));

    std::string three = "m = 2\nk = 0\ndim = 2\n";
    for (int i = 1; i <= 4; ++i)
        three += "agent." + std::to_string(i) + ".p0 = 0, 0, 0\nagent." + std::to_string(i) + ".v0 = 1, 2\n";
    CHECK(mentions(issues_of(three), 4, "expected 2 components, got 3"));
}

TEST_CASE("hexagon formation file")
{
    const ScenarioConfig c = load_config(scenario_dir + "/hexagon_formation.cfg");
    CHECK(c.m == 3);
    CHECK(*c.k == 5.0);
    CHECK(c.alpha == 1.0);
    CHECK(c.beta == 5.0);
    CHECK(*c.formation_radius == 20.0);
    CHECK(c.z_com == 50.0);
    CHECK(c.kpz == 1.0);
    CHECK(c.kvz == 4.0);
    CHECK(c.positions.row(1) == Eigen::RowVector3d(50, -20, 0));
    CHECK(c.velocities.row(5) == Eigen::RowVector3d(14, 18, -6));
    const FormationSpec spec = formation_spec(c);
    CHECK(spec.offsets[3].isApprox(Eigen::Vector2d(-20, 0)));
}

TEST_CASE("expectation syntax")
{
    const ScenarioConfig c = parse_config("m = 2\nk = 0\nexpect.a = 1, 2 +- 0.5\nexpect.b = < 3\nexpect.c = true\n");
    REQUIRE(c.expectations.size() == 3);
    CHECK(c.expectations[0].values == std::vector<double>{1, 2});
    CHECK(c.expectations[0].tolerance == 0.5);
    CHECK(c.expectations[0].line == 3);
    CHECK(c.expectations[1].kind == Expectation::Kind::below);
    CHECK(c.expectations[2].values == std::vector<double>{1.0});
}

TEST_CASE("seeded initial conditions")
{
    const ScenarioConfig c = parse_config("m = 3\nk = 0\ndim = 2\ninit.random = true\ninit.position_scale = 4\n");
    const auto a = initial_conditions(c, 17);
    const auto b = initial_conditions(c, 17);
    const auto other = initial_conditions(c, 18);
    CHECK(a.positions == b.positions);
    CHECK(a.velocities == b.velocities);
    CHECK(a.positions != other.positions);
    CHECK(a.positions.cwiseAbs().maxCoeff() <= 4.0);
    CHECK(a.velocities.cwiseAbs().maxCoeff() <= 5.0);
}

TEST_CASE("analyze report")
{
    std::ostringstream out;
    const RunReport r = run_analyze(4, -0.5, out, std::nullopt);
    const std::string text = out.str();
    CHECK(text.find("k_threshold=-1.000000000\n") != std::string::npos);
    CHECK(text.find("coupling_bound=5.389") != std::string::npos);
    CHECK(text.find("stable=true\n") != std::string::npos);
    CHECK(text.find("eigenvalue.2=2,0.178154053,0.87436136\n") != std::string::npos);
    CHECK(r.observed.at("coupling_bound")[0] == doctest::Approx(5.39).epsilon(0.002));

    std::ostringstream unstable;
    run_analyze(4, -1.5, unstable, std::nullopt);
    CHECK(unstable.str().find("coupling_bound=inf\n") != std::string::npos);
    CHECK(unstable.str().find("stable=false\n") != std::string::npos);
}

TEST_CASE("number formatting")
{
    CHECK(format_real("%.9e", -0.0) == "0.000000000e+00");
    CHECK(format_real("%.9e", 1.5) == "1.500000000e+00");
    CHECK(format_real("%.9g", -0.5) == "-0.5");
}

TEST_CASE("plan-velocity on the hexagon planner scenario")
{
    std::ostringstream out;
    const RunReport r =
        run_scenario(load_config(scenario_dir + "/hexagon_plan.cfg"), Subcommand::plan_velocity, {}, 0, out);
    CHECK_FALSE(r.error);
    CHECK(out.str().find("feasible=true\n") != std::string::npos);
    CHECK(out.str().find("k=-0.5\n") != std::string::npos);
    CHECK(out.str().find("modified_velocity=59,130.5\n") != std::string::npos);
    CHECK(r.expectations_passed());
}

TEST_CASE("infeasible plan")
{
    std::ostringstream out;
    ScenarioConfig c = load_config(scenario_dir + "/hexagon_plan.cfg");
    c.delta_candidates = {-0.5};
    c.expectations.clear();
    const RunReport r = run_scenario(c, Subcommand::plan_velocity, {}, 0, out);
    REQUIRE(r.error);
    CHECK(out.str().find("feasible=false\n") != std::string::npos);
    CHECK(r.observed.at("exit_code")[0] == 3.0);
}

TEST_CASE("unstable gains stop with a divergence error")
{
    std::ostringstream out;
    const RunReport r =
        run_scenario(load_config(scenario_dir + "/ring4_unstable.cfg"), Subcommand::simulate_di, {}, 0, out);
    REQUIRE(r.error);
    try {
        std::rethrow_exception(r.error);
    } catch (const DivergenceError& e) {
        CHECK(e.time() > 0.0);
        const std::string line = error_line(e);
        CHECK(line.rfind("error=divergence time=", 0) == 0);
        CHECK(line.find('\n') == std::string::npos);
        CHECK(exit_status(e) == 4);
    }
    CHECK(r.expectations_passed());
}

TEST_CASE("simulate-di writes a padded trajectory")
{
    const auto dir = std::filesystem::temp_directory_path() / "ringform_test_scenario";
    std::filesystem::create_directories(dir);
    const std::string csv = (dir / "traj.csv").string();
    ScenarioConfig c = load_config(scenario_dir + "/plan3_agent1.cfg");
    c.t_end = 1.0;
    c.record_every = 50;
    c.expectations.clear();
    std::ostringstream out;
    const RunReport r = run_scenario(c, Subcommand::simulate_di, {csv, std::nullopt}, 0, out);
    CHECK_FALSE(r.error);
    const std::string text = read_file(csv);
    CHECK(text.rfind("t,agent,px,py,pz,vx,vy,vz\n", 0) == 0);
    CHECK(text.find("0.000000000e+00,1,0.000000000e+00,0.000000000e+00,0.000000000e+00,3.450000000e+01,"
                    "-5.200000000e+01,0.000000000e+00\n") != std::string::npos);
    std::size_t rows = 0;
    for (char ch : text)
        rows += (ch == '\n');
    CHECK(rows == 1 + 3 * 6);

    // Same run twice: byte-identical.
    const std::string again = (dir / "traj2.csv").string();
    std::ostringstream out2;
    run_scenario(c, Subcommand::simulate_di, {again, std::nullopt}, 0, out2);
    CHECK(read_file(again) == text);
    CHECK(out2.str() == out.str());
}

TEST_CASE("subcommand names")
{
    for (auto s : {Subcommand::analyze, Subcommand::simulate_di, Subcommand::simulate_quad, Subcommand::plan_velocity})
        CHECK(parse_subcommand(subcommand_name(s)) == s);
    CHECK_FALSE(parse_subcommand("root"));
}
