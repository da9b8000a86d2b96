#include "ringform/scenario.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace ringform {

namespace {

std::string join_issues(const std::vector<ConfigIssue>& issues)
{
    std::ostringstream out;
    for (std::size_t i = 0; i < issues.size(); ++i) {
        if (i)
            out << "; ";
        if (issues[i].line > 0)
            out << "line " << issues[i].line << ": ";
        out << issues[i].message;
    }
    return out.str();
}

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        parts.push_back(trim(s.substr(start, pos - start)));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return parts;
}

// Each parse helper throws std::string on failure; the caller attaches the
// line number.
double parse_real(std::string_view s)
{
    double value = 0.0;
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, value);
    if (ec != std::errc() || ptr != end)
        throw std::string("not a number: '") + std::string(s) + "'";
    if (!std::isfinite(value))
        throw std::string("non-finite value: '") + std::string(s) + "'";
    return value;
}

int parse_int(std::string_view s)
{
    int value = 0;
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, value);
    if (ec != std::errc() || ptr != end)
        throw std::string("not an integer: '") + std::string(s) + "'";
    return value;
}

bool parse_bool(std::string_view s)
{
    if (s == "true")
        return true;
    if (s == "false")
        return false;
    throw std::string("expected true or false, got '") + std::string(s) + "'";
}

std::vector<double> parse_reals(std::string_view s)
{
    std::vector<double> out;
    for (std::string_view part : split(s, ','))
        out.push_back(parse_real(part));
    return out;
}

Eigen::Vector3d parse_axes(std::string_view s)
{
    const auto v = parse_reals(s);
    if (v.size() == 1)
        return Eigen::Vector3d::Constant(v[0]);
    if (v.size() == 3)
        return {v[0], v[1], v[2]};
    throw std::string("expected 1 or 3 values");
}

Expectation parse_expectation(std::string_view name, std::string_view value)
{
    Expectation e;
    e.name = std::string(name);
    if (!value.empty() && value.front() == '<') {
        e.kind = Expectation::Kind::below;
        e.values = {parse_real(trim(value.substr(1)))};
        return e;
    }
    std::string_view body = value;
    if (const auto pm = value.find("+-"); pm != std::string_view::npos) {
        body = trim(value.substr(0, pm));
        e.tolerance = parse_real(trim(value.substr(pm + 2)));
        if (e.tolerance < 0.0)
            throw std::string("tolerance must be >= 0");
    }
    if (body == "true" || body == "false")
        e.values = {body == "true" ? 1.0 : 0.0};
    else
        e.values = parse_reals(body);
    return e;
}

struct AgentRows {
    std::map<int, std::pair<std::vector<double>, int>> p0; // index -> (values, line)
    std::map<int, std::pair<std::vector<double>, int>> v0;
};

} // namespace

ConfigError::ConfigError(std::vector<ConfigIssue> issues)
    : ValidationError(join_issues(issues)), issues_(std::move(issues))
{
}

ScenarioConfig parse_config(std::string_view text)
{
    ScenarioConfig cfg;
    std::vector<ConfigIssue> issues;
    std::set<std::string> seen;
    AgentRows agents;
    std::map<int, std::pair<std::vector<double>, int>> offsets;
    std::optional<std::pair<std::vector<double>, int>> target;
    bool have_m = false;

    using Setter = std::function<void(std::string_view)>;
    const std::map<std::string, Setter, std::less<>> setters{
        {"name", [&](std::string_view v) { cfg.name = std::string(v); }},
        {"command", [&](std::string_view v) { cfg.command = std::string(v); }},
        {"m", [&](std::string_view v) { cfg.m = parse_int(v); have_m = true; }},
        {"k", [&](std::string_view v) { cfg.k = parse_real(v); }},
        {"dim", [&](std::string_view v) { cfg.dim = parse_int(v); }},
        {"alpha", [&](std::string_view v) { cfg.alpha = parse_real(v); }},
        {"beta", [&](std::string_view v) { cfg.beta = parse_real(v); }},
        {"kpz", [&](std::string_view v) { cfg.kpz = parse_real(v); }},
        {"kvz", [&](std::string_view v) { cfg.kvz = parse_real(v); }},
        {"attitude.kp", [&](std::string_view v) { cfg.attitude.kp = parse_axes(v); }},
        {"attitude.kd", [&](std::string_view v) { cfg.attitude.kd = parse_axes(v); }},
        {"attitude.ki", [&](std::string_view v) { cfg.attitude.ki = parse_axes(v); }},
        {"attitude.integral_limit", [&](std::string_view v) { cfg.attitude.integral_limit = parse_real(v); }},
        {"limits.max_tilt", [&](std::string_view v) { cfg.limits.max_tilt = parse_real(v); }},
        {"limits.min_lift_fraction", [&](std::string_view v) { cfg.limits.min_lift_fraction = parse_real(v); }},
        {"mass", [&](std::string_view v) { cfg.params.mass = parse_real(v); }},
        {"gravity", [&](std::string_view v) { cfg.params.gravity = parse_real(v); }},
        {"inertia",
         [&](std::string_view v) {
             const auto vals = parse_reals(v);
             if (vals.size() == 3)
                 cfg.params.inertia = Eigen::Vector3d(vals[0], vals[1], vals[2]).asDiagonal();
             else if (vals.size() == 9)
                 cfg.params.inertia = Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(vals.data());
             else
                 throw std::string("inertia takes 3 diagonal or 9 row-major values");
         }},
        {"init.random", [&](std::string_view v) { cfg.random_init = parse_bool(v); }},
        {"init.position_scale", [&](std::string_view v) { cfg.random_position_scale = parse_real(v); }},
        {"init.velocity_scale", [&](std::string_view v) { cfg.random_velocity_scale = parse_real(v); }},
        {"formation.radius", [&](std::string_view v) { cfg.formation_radius = parse_real(v); }},
        {"formation.assignment",
         [&](std::string_view v) {
             cfg.formation_assignment.clear();
             for (std::string_view part : split(v, ','))
                 cfg.formation_assignment.push_back(parse_int(part));
         }},
        {"formation.z_com", [&](std::string_view v) { cfg.z_com = parse_real(v); }},
        {"sim.dt", [&](std::string_view v) { cfg.dt = parse_real(v); }},
        {"sim.t_end", [&](std::string_view v) { cfg.t_end = parse_real(v); }},
        {"sim.record_every", [&](std::string_view v) { cfg.record_every = parse_int(v); }},
        {"planner.modified_agent", [&](std::string_view v) { cfg.modified_agent = parse_int(v); }},
        {"planner.delta_candidates", [&](std::string_view v) { cfg.delta_candidates = parse_reals(v); }},
        {"planner.default_k", [&](std::string_view v) { cfg.default_k = parse_real(v); }},
        {"planner.apply", [&](std::string_view v) { cfg.apply_plan = parse_bool(v); }},
    };

    int line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto nl = text.find('\n', start);
        std::string_view raw = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
        start = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
        ++line_no;

        if (const auto hash = raw.find('#'); hash != std::string_view::npos)
            raw = raw.substr(0, hash);
        const std::string_view line = trim(raw);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            issues.push_back({line_no, "expected 'key = value'"});
            continue;
        }
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));
        if (!seen.insert(key).second) {
            issues.push_back({line_no, "duplicate key '" + key + "'"});
            continue;
        }

        try {
            if (auto it = setters.find(key); it != setters.end()) {
                it->second(value);
            } else if (key.starts_with("expect.")) {
                Expectation e = parse_expectation(std::string_view(key).substr(7), value);
                e.line = line_no;
                cfg.expectations.push_back(std::move(e));
            } else if (key == "planner.target_vf") {
                target = std::make_pair(parse_reals(value), line_no);
            } else if (key.starts_with("agent.") &&
                       (key.ends_with(".p0") || key.ends_with(".v0"))) {
                const std::string_view index = std::string_view(key).substr(6, key.size() - 9);
                const int i = parse_int(index);
                auto& table = key.ends_with(".p0") ? agents.p0 : agents.v0;
                table[i] = {parse_reals(value), line_no};
            } else if (key.starts_with("formation.offset.")) {
                const int i = parse_int(std::string_view(key).substr(17));
                offsets[i] = {parse_reals(value), line_no};
            } else {
                issues.push_back({line_no, "unknown key '" + key + "'"});
            }
        } catch (const std::string& msg) {
            issues.push_back({line_no, key + ": " + msg});
        }
    }

    if (!have_m)
        issues.push_back({0, "missing required key 'm'"});
    else if (cfg.m < 2)
        issues.push_back({0, "m must be >= 2, got " + std::to_string(cfg.m)});
    if (!cfg.k && !target)
        issues.push_back({0, "missing required key 'k'"});
    if (cfg.dim < 1 || cfg.dim > 3)
        issues.push_back({0, "dim must be 1, 2 or 3"});
    if (cfg.dt && !(*cfg.dt > 0.0))
        issues.push_back({0, "sim.dt must be > 0"});
    if (!(cfg.t_end >= 0.0))
        issues.push_back({0, "sim.t_end must be >= 0"});
    if (cfg.record_every < 1)
        issues.push_back({0, "sim.record_every must be >= 1"});
    if (cfg.apply_plan && !target)
        issues.push_back({0, "planner.apply needs planner.target_vf"});

    const int n = 2 * cfg.m;
    const bool dims_ok = cfg.dim >= 1 && cfg.dim <= 3;

    // Agent rows.
    std::set<int> indices;
    for (const auto& [i, _] : agents.p0)
        indices.insert(i);
    for (const auto& [i, _] : agents.v0)
        indices.insert(i);
    if (!indices.empty() && have_m && cfg.m >= 2) {
        bool rows_ok = true;
        for (int i : indices)
            if (i < 1 || i > n) {
                const int line = agents.p0.count(i) ? agents.p0[i].second : agents.v0[i].second;
                issues.push_back({line, "agent index " + std::to_string(i) + " outside 1.." + std::to_string(n)});
                rows_ok = false;
            }
        if (static_cast<int>(indices.size()) != n) {
            issues.push_back({0, "agent count " + std::to_string(indices.size()) + " ≠ 2m = " + std::to_string(n)});
            rows_ok = false;
        }
        if (rows_ok && dims_ok) {
            cfg.positions = Eigen::MatrixXd::Zero(n, cfg.dim);
            cfg.velocities = Eigen::MatrixXd::Zero(n, cfg.dim);
            for (auto* table : {&agents.p0, &agents.v0}) {
                Eigen::MatrixXd& dest = (table == &agents.p0) ? cfg.positions : cfg.velocities;
                for (const auto& [i, entry] : *table) {
                    if (static_cast<int>(entry.first.size()) != cfg.dim) {
                        issues.push_back({entry.second, "expected " + std::to_string(cfg.dim) + " components, got " +
                                                            std::to_string(entry.first.size())});
                        continue;
                    }
                    for (int c = 0; c < cfg.dim; ++c)
                        dest(i - 1, c) = entry.first[c];
                }
            }
        }
    }

    if (!offsets.empty() && have_m && cfg.m >= 2) {
        if (static_cast<int>(offsets.size()) != n)
            issues.push_back({0, "formation offset count " + std::to_string(offsets.size()) + " ≠ 2m = " +
                                     std::to_string(n)});
        for (const auto& [i, entry] : offsets) {
            if (i < 1 || i > n)
                issues.push_back({entry.second, "offset index " + std::to_string(i) + " outside 1.." + std::to_string(n)});
            if (entry.first.size() != 2)
                issues.push_back({entry.second, "formation offsets take 2 components"});
        }
        if (static_cast<int>(offsets.size()) == n) {
            cfg.formation_offsets.resize(n, Eigen::Vector2d::Zero());
            for (const auto& [i, entry] : offsets)
                if (i >= 1 && i <= n && entry.first.size() == 2)
                    cfg.formation_offsets[i - 1] = {entry.first[0], entry.first[1]};
        }
    }
    if (!offsets.empty() && cfg.formation_radius)
        issues.push_back({0, "give either formation.radius or formation.offset.<i>, not both"});
    if (!cfg.formation_assignment.empty() && have_m && static_cast<int>(cfg.formation_assignment.size()) != n)
        issues.push_back({0, "formation.assignment needs " + std::to_string(n) + " entries"});

    if (target) {
        if (target->first.empty() || (dims_ok && static_cast<int>(target->first.size()) > cfg.dim))
            issues.push_back({target->second, "planner.target_vf needs 1.." + std::to_string(cfg.dim) + " components"});
        else
            cfg.target_vf = Eigen::Map<const Eigen::VectorXd>(target->first.data(),
                                                              static_cast<Eigen::Index>(target->first.size()));
    }
    if (cfg.modified_agent && (*cfg.modified_agent < 1 || *cfg.modified_agent % 2 == 0))
        issues.push_back({0, "planner.modified_agent must be a positive odd index"});

    if (!issues.empty())
        throw ConfigError(std::move(issues));
    return cfg;
}

ScenarioConfig load_config(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ValidationError("cannot open config '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

InitialConditions initial_conditions(const ScenarioConfig& config, std::uint64_t seed)
{
    const int n = config.agents();
    if (!config.random_init) {
        if (config.positions.rows() != n)
            throw ValidationError("scenario defines no initial conditions (agent.<i>.p0/v0 or init.random)");
        return {config.positions, config.velocities};
    }
    std::mt19937_64 gen(seed);
    // Portable uniform draw in [-scale, scale] from the top 53 bits.
    auto draw = [&](double scale) {
        const double unit = static_cast<double>(gen() >> 11) * 0x1.0p-53;
        return scale * (2.0 * unit - 1.0);
    };
    InitialConditions ic{Eigen::MatrixXd(n, config.dim), Eigen::MatrixXd(n, config.dim)};
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < config.dim; ++c)
            ic.positions(i, c) = draw(config.random_position_scale);
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < config.dim; ++c)
            ic.velocities(i, c) = draw(config.random_velocity_scale);
    return ic;
}

FormationSpec formation_spec(const ScenarioConfig& config)
{
    const int n = config.agents();
    if (!config.formation_offsets.empty()) {
        FormationSpec spec;
        spec.offsets = config.formation_offsets;
        spec.z_com = config.z_com;
        return spec;
    }
    if (config.formation_radius)
        return FormationSpec::regular_polygon(n, *config.formation_radius, config.z_com, config.formation_assignment);
    FormationSpec spec; // consensus only: every agent at the same point
    spec.offsets.assign(n, Eigen::Vector2d::Zero());
    spec.z_com = config.z_com;
    return spec;
}

} // namespace ringform
