#include "ringform/runner.hpp"

#include "ringform/consensus_sim.hpp"
#include "ringform/quadrotor_sim.hpp"
#include "ringform/ring_graph.hpp"
#include "ringform/spectral.hpp"
#include "ringform/velocity_planner.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

namespace ringform {

namespace {

constexpr const char* csv_format = "%.9e";
constexpr const char* report_format = "%.9g";

class CsvWriter {
public:
    CsvWriter(const std::string& path, const char* header) : path_(path), out_(path, std::ios::binary)
    {
        if (!out_)
            throw ValidationError("cannot write '" + path + "'");
        out_ << header << '\n';
    }

    CsvWriter& operator<<(double value)
    {
        if (!first_)
            out_ << ',';
        out_ << format_real(csv_format, value);
        first_ = false;
        return *this;
    }

    CsvWriter& field(int value)
    {
        if (!first_)
            out_ << ',';
        out_ << value;
        first_ = false;
        return *this;
    }

    void end_row()
    {
        out_ << '\n';
        first_ = true;
    }

    ~CsvWriter() = default;

    void close()
    {
        out_.close();
        if (!out_)
            throw ValidationError("failed writing '" + path_ + "'");
    }

private:
    std::string path_;
    std::ofstream out_;
    bool first_ = true;
};

std::string join(const std::vector<double>& values, const char* format = report_format)
{
    std::string s;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i)
            s += ',';
        s += format_real(format, values[i]);
    }
    return s;
}

std::vector<double> to_vector(const Eigen::VectorXd& v)
{
    return {v.data(), v.data() + v.size()};
}

void emit(std::ostream& out, RunReport& report, const std::string& key, std::vector<double> values)
{
    out << key << '=' << join(values) << '\n';
    report.observed[key] = std::move(values);
}

void emit(std::ostream& out, RunReport& report, const std::string& key, double value)
{
    emit(out, report, key, std::vector<double>{value});
}

void emit_bool(std::ostream& out, RunReport& report, const std::string& key, bool value)
{
    out << key << '=' << (value ? "true" : "false") << '\n';
    report.observed[key] = {value ? 1.0 : 0.0};
}

bool check(const Expectation& e, const std::vector<double>& observed)
{
    if (observed.empty())
        return false;
    if (e.kind == Expectation::Kind::below) {
        for (double o : observed)
            if (!(o < e.values.front()))
                return false;
        return true;
    }
    if (observed.size() != e.values.size())
        return false;
    for (std::size_t i = 0; i < observed.size(); ++i)
        if (!(std::abs(observed[i] - e.values[i]) <= e.tolerance))
            return false;
    return true;
}

void evaluate_expectations(const ScenarioConfig& config, RunReport& report, std::ostream& out)
{
    for (const Expectation& e : config.expectations) {
        ExpectationResult r{e, {}, false};
        if (auto it = report.observed.find(e.name); it != report.observed.end())
            r.observed = it->second;
        r.passed = check(e, r.observed);
        out << "expect." << e.name << '=' << (r.passed ? "pass" : "fail");
        if (!r.passed)
            out << " observed=" << (r.observed.empty() ? std::string("none") : join(r.observed));
        out << '\n';
        report.expectations.push_back(std::move(r));
    }
}

// Gain and initial velocities after optionally applying a velocity plan.
struct ResolvedRun {
    double k = 0.0;
    InitialConditions initial;
};

PlannerOptions planner_options(const ScenarioConfig& config)
{
    PlannerOptions options;
    options.delta_candidates = config.delta_candidates;
    options.modified_agent = config.modified_agent;
    options.default_k = config.default_k;
    return options;
}

void print_plan(std::ostream& out, RunReport& report, const VelocityPlan& plan)
{
    emit_bool(out, report, "feasible", plan.feasible);
    if (!plan.feasible)
        return;
    emit(out, report, "k", plan.k);
    emit(out, report, "delta", plan.delta);
    if (plan.modified_agent) {
        out << "modified_agent=" << *plan.modified_agent << '\n';
        report.observed["modified_agent"] = {static_cast<double>(*plan.modified_agent)};
        emit(out, report, "modified_velocity", to_vector(*plan.modified_velocity));
    } else {
        out << "modified_agent=none\nmodified_velocity=none\n";
    }
}

VelocityPlan make_plan(const ScenarioConfig& config, const InitialConditions& initial)
{
    if (!config.target_vf)
        throw ValidationError("planner.target_vf is required for planning");
    return plan_velocity(initial.velocities, *config.target_vf, config.m, planner_options(config));
}

ResolvedRun resolve(const ScenarioConfig& config, std::uint64_t seed, std::ostream& out, RunReport& report)
{
    ResolvedRun run{config.k.value_or(0.0), initial_conditions(config, seed)};
    if (!config.apply_plan) {
        if (!config.k)
            throw ValidationError("k is required unless planner.apply = true");
        return run;
    }
    const VelocityPlan plan = make_plan(config, run.initial);
    print_plan(out, report, plan);
    if (!plan.feasible)
        throw InfeasibleError("target velocity is not reachable with the given candidates");
    run.k = plan.k;
    run.initial.velocities = apply_plan(run.initial.velocities, plan);
    return run;
}

void simulate_double_integrator(const ScenarioConfig& config, const RunOutputs& outputs, std::uint64_t seed,
                                std::ostream& out, RunReport& report)
{
    const ResolvedRun run = resolve(config, seed, out, report);
    const WeightedLaplacian laplacian = build_laplacian(config.m, run.k);
    const CouplingGains gains{config.alpha, config.beta, run.k};
    gains.validate();

    SwarmState initial;
    initial.positions = run.initial.positions;
    initial.velocities = run.initial.velocities;
    SimulationOptions options;
    options.dt = config.dt.value_or(0.01);
    options.t_end = config.t_end;
    options.record_every = config.record_every;

    const Eigen::VectorXd predicted = predict_final_velocity(initial.velocities, config.m, run.k);
    emit(out, report, "predicted_velocity", to_vector(predicted));
    if (!gains_certified(config.m, run.k, config.alpha, config.beta))
        out << "warning=gains not certified\n";

    const Trajectory trajectory = simulate(initial, laplacian, gains, options);

    if (outputs.csv) {
        CsvWriter csv(*outputs.csv, "t,agent,px,py,pz,vx,vy,vz");
        for (const SwarmState& s : trajectory.samples) {
            for (int i = 0; i < s.agents(); ++i) {
                csv << s.t;
                csv.field(i + 1);
                for (const Eigen::MatrixXd* block : {&s.positions, &s.velocities})
                    for (int c = 0; c < 3; ++c)
                        csv << (c < s.dimension() ? (*block)(i, c) : 0.0);
                csv.end_row();
            }
        }
        csv.close();
    }

    const Eigen::VectorXd w0 = weighted_momentum(trajectory.samples.front(), run.k);
    const double w_scale = w0.norm() > 0.0 ? w0.norm() : 1.0;
    double drift = 0.0;
    for (const SwarmState& s : trajectory.samples)
        drift = std::max(drift, (weighted_momentum(s, run.k) - w0).norm() / w_scale);

    const SwarmState& last = trajectory.samples.back();
    const Eigen::VectorXd final_velocity = mean_velocity(last.velocities);
    emit(out, report, "t_end", last.t);
    emit(out, report, "final_velocity", to_vector(final_velocity));
    emit(out, report, "velocity_spread", velocity_spread(last));
    emit(out, report, "momentum_drift", drift);
    const double denom = std::max(predicted.norm(), 1e-12);
    emit(out, report, "velocity_error", (final_velocity - predicted).norm() / denom);
    emit(out, report, "convergence_time", convergence_time(trajectory));
}

void simulate_quadrotors(const ScenarioConfig& config, const RunOutputs& outputs, std::uint64_t seed,
                         std::ostream& out, RunReport& report)
{
    const ResolvedRun run = resolve(config, seed, out, report);
    const WeightedLaplacian laplacian = build_laplacian(config.m, run.k);
    CascadeGains gains;
    gains.coupling = {config.alpha, config.beta, run.k};
    gains.kpz = config.kpz;
    gains.kvz = config.kvz;
    gains.attitude = config.attitude;
    gains.limits = config.limits;

    const int n = config.agents();
    std::vector<QuadrotorState> initial(n);
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < std::min(3, config.dim); ++c) {
            initial[i].p(c) = run.initial.positions(i, c);
            initial[i].v(c) = run.initial.velocities(i, c);
        }

    const FormationSpec spec = formation_spec(config);
    QuadSimOptions options;
    options.dt = config.dt.value_or(0.001);
    options.t_end = config.t_end;
    options.record_every = config.record_every;

    Eigen::MatrixXd horizontal(n, 2);
    for (int i = 0; i < n; ++i)
        horizontal.row(i) = initial[i].v.head<2>().transpose();
    const Eigen::VectorXd predicted = predict_final_velocity(horizontal, config.m, run.k);
    emit(out, report, "predicted_velocity", to_vector(predicted));

    const QuadTrajectory trajectory = simulate_swarm(initial, laplacian, spec, gains, config.params, options);
    for (const std::string& w : trajectory.warnings)
        out << "warning=" << w << '\n';
    const std::vector<FormationMetrics> metrics = formation_metrics(trajectory, spec);

    if (outputs.csv) {
        CsvWriter csv(*outputs.csv, "t,agent,px,py,pz,vx,vy,vz,phi,theta,psi,T");
        for (const QuadSample& s : trajectory.samples) {
            for (int i = 0; i < n; ++i) {
                const QuadrotorState& q = s.states[i];
                csv << s.t;
                csv.field(i + 1);
                for (int c = 0; c < 3; ++c)
                    csv << q.p(c);
                for (int c = 0; c < 3; ++c)
                    csv << q.v(c);
                for (int c = 0; c < 3; ++c)
                    csv << q.attitude(c);
                csv << s.references[i].thrust;
                csv.end_row();
            }
        }
        csv.close();
    }
    if (outputs.metrics) {
        CsvWriter csv(*outputs.metrics, "t,formation_error,altitude_error,velocity_spread,vz_max");
        for (const FormationMetrics& f : metrics) {
            csv << f.t << f.formation_error << f.altitude_error << f.velocity_spread << f.vz_max;
            csv.end_row();
        }
        csv.close();
    }

    const FormationMetrics& last = metrics.back();
    const Eigen::Vector2d common = mean_horizontal_velocity(trajectory.samples.back());
    emit(out, report, "t_end", last.t);
    emit(out, report, "formation_error", last.formation_error);
    emit(out, report, "altitude_error", last.altitude_error);
    emit(out, report, "velocity_spread", last.velocity_spread);
    emit(out, report, "vz_max", last.vz_max);
    emit(out, report, "attitude_error", last.attitude_error);
    emit(out, report, "common_velocity", to_vector(common));
    emit(out, report, "velocity_error", (common - predicted).norm());
}

void analyze_lines(int m, double k, std::ostream& out, RunReport& report,
                   const std::optional<std::string>& csv_path)
{
    const SpectralReport spectral = analyze(m, k);
    out << "m=" << m << '\n';
    emit(out, report, "k", k);
    out << "k_threshold=" << format_real("%.9f", spectral.k_threshold) << '\n';
    report.observed["k_threshold"] = {spectral.k_threshold};
    if (spectral.stable) {
        const CouplingBound bound = coupling_bound_detail(m, k);
        out << "coupling_bound=" << format_real("%.9f", bound.value) << '\n';
        out << "coupling_bound_block=" << bound.ell << '\n';
    } else {
        out << "coupling_bound=inf\n";
    }
    report.observed["coupling_bound"] = {spectral.coupling_bound};
    emit_bool(out, report, "stable", spectral.stable);
    out << "eigenvalue.count=" << spectral.nonzero_eigenvalues.size() << '\n';
    for (std::size_t j = 0; j < spectral.nonzero_eigenvalues.size(); ++j) {
        const BlockEigenvalue& e = spectral.nonzero_eigenvalues[j];
        out << "eigenvalue." << j + 1 << '=' << e.ell << ',' << format_real(report_format, e.value.real()) << ','
            << format_real(report_format, e.value.imag()) << '\n';
    }
    if (csv_path) {
        CsvWriter csv(*csv_path, "ell,re,im");
        for (const BlockEigenvalue& e : spectral.nonzero_eigenvalues) {
            csv.field(e.ell);
            csv << e.value.real() << e.value.imag();
            csv.end_row();
        }
        csv.close();
    }
}

} // namespace

std::optional<Subcommand> parse_subcommand(std::string_view name)
{
    if (name == "analyze")
        return Subcommand::analyze;
    if (name == "simulate-di")
        return Subcommand::simulate_di;
    if (name == "simulate-quad")
        return Subcommand::simulate_quad;
    if (name == "plan-velocity")
        return Subcommand::plan_velocity;
    return std::nullopt;
}

std::string_view subcommand_name(Subcommand command)
{
    switch (command) {
    case Subcommand::analyze:
        return "analyze";
    case Subcommand::simulate_di:
        return "simulate-di";
    case Subcommand::simulate_quad:
        return "simulate-quad";
    case Subcommand::plan_velocity:
        return "plan-velocity";
    }
    return "";
}

std::string format_real(const char* format, double value)
{
    if (value == 0.0)
        value = 0.0; // folds -0
    if (std::isinf(value))
        return value > 0 ? "inf" : "-inf";
    if (std::isnan(value))
        return "nan";
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, format, value);
    return buffer;
}

bool RunReport::expectations_passed() const
{
    for (const ExpectationResult& r : expectations)
        if (!r.passed)
            return false;
    return true;
}

RunReport run_analyze(int m, double k, std::ostream& out, const std::optional<std::string>& csv_path)
{
    RunReport report;
    analyze_lines(m, k, out, report, csv_path);
    return report;
}

void run_root_locus(int m, int ell, double k_min, double k_max, int steps, const std::string& path)
{
    if (steps < 2)
        throw ValidationError("root-locus needs steps >= 2");
    if (!std::isfinite(k_min) || !std::isfinite(k_max) || !(k_min < k_max))
        throw ValidationError("root-locus needs finite k-min < k-max");
    std::vector<double> grid(steps);
    for (int i = 0; i < steps; ++i)
        grid[i] = k_min + (k_max - k_min) * static_cast<double>(i) / (steps - 1);
    const std::vector<LocusPoint> locus = root_locus_sweep(m, ell, grid);
    CsvWriter csv(path, "k,re1,im1,re2,im2");
    for (const LocusPoint& p : locus) {
        csv << p.k << p.roots[0].real() << p.roots[0].imag() << p.roots[1].real() << p.roots[1].imag();
        csv.end_row();
    }
    csv.close();
}

RunReport run_scenario(const ScenarioConfig& config, Subcommand command, const RunOutputs& outputs,
                       std::uint64_t seed, std::ostream& out)
{
    RunReport report;
    if (!config.name.empty())
        out << "scenario=" << config.name << '\n';
    out << "command=" << subcommand_name(command) << '\n';

    std::exception_ptr failure;
    try {
        switch (command) {
        case Subcommand::analyze:
            if (!config.k)
                throw ValidationError("analyze needs k");
            analyze_lines(config.m, *config.k, out, report, outputs.csv);
            break;
        case Subcommand::simulate_di:
            simulate_double_integrator(config, outputs, seed, out, report);
            break;
        case Subcommand::simulate_quad:
            simulate_quadrotors(config, outputs, seed, out, report);
            break;
        case Subcommand::plan_velocity: {
            const VelocityPlan plan = make_plan(config, initial_conditions(config, seed));
            print_plan(out, report, plan);
            if (!plan.feasible)
                throw InfeasibleError("target velocity is not reachable with the given candidates");
            break;
        }
        }
        report.observed["exit_code"] = {0.0};
    } catch (const Error& e) {
        failure = std::current_exception();
        report.observed["exit_code"] = {static_cast<double>(static_cast<int>(e.code()))};
        if (const auto* d = dynamic_cast<const DivergenceError*>(&e))
            report.observed["divergence_time"] = {d->time()};
    }

    report.error = failure;
    evaluate_expectations(config, report, out);
    return report;
}

std::uint64_t seed_from_environment()
{
    const char* raw = std::getenv("RINGFORM_SEED");
    if (raw == nullptr || *raw == '\0')
        return 0;
    const std::string_view s(raw);
    std::uint64_t seed = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), seed);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ValidationError("RINGFORM_SEED must be an unsigned integer, got '" + std::string(s) + "'");
    return seed;
}

std::string error_line(const std::exception& error)
{
    std::string message = error.what();
    for (char& c : message)
        if (c == '\n' || c == '\r')
            c = ' ';
    std::string line = "error=";
    if (const auto* e = dynamic_cast<const Error*>(&error)) {
        line += e->kind();
        if (const auto* d = dynamic_cast<const DivergenceError*>(e))
            line += " time=" + format_real(report_format, d->time());
    } else {
        line += "internal";
    }
    return line + " message=" + message;
}

int exit_status(const std::exception& error)
{
    if (const auto* e = dynamic_cast<const Error*>(&error))
        return static_cast<int>(e->code());
    return static_cast<int>(ExitCode::validation);
}

} // namespace ringform
