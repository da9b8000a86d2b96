#pragma once

#include "ringform/errors.hpp"
#include "ringform/quadrotor_sim.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ringform {

struct ConfigIssue {
    int line; // 0 when the problem is not tied to a line (missing key)
    std::string message;
};

/// All problems found in a configuration, not just the first.
class ConfigError : public ValidationError {
public:
    explicit ConfigError(std::vector<ConfigIssue> issues);
    const std::vector<ConfigIssue>& issues() const noexcept { return issues_; }

private:
    std::vector<ConfigIssue> issues_;
};

/// `expect.<name> = <values> [+- <tol>]` or `expect.<name> = < <bound>`.
struct Expectation {
    enum class Kind { equals, below };
    std::string name;
    Kind kind = Kind::equals;
    std::vector<double> values;
    double tolerance = 0.0;
    int line = 0;
};

struct ScenarioConfig {
    std::string name;
    std::string command; // primary subcommand of a shipped scenario

    int m = 0;
    std::optional<double> k; // optional when planner.target_vf is given
    int dim = 3;

    double alpha = 1.0;
    double beta = 1.0;
    double kpz = 1.0;
    double kvz = 4.0;
    AttitudeGains attitude;
    ReferenceLimits limits;
    QuadrotorParams params;

    // Explicit initial conditions, N x dim (empty when not given).
    Eigen::MatrixXd positions;
    Eigen::MatrixXd velocities;
    bool random_init = false;
    double random_position_scale = 10.0;
    double random_velocity_scale = 5.0;

    std::optional<double> formation_radius;
    std::vector<int> formation_assignment;
    std::vector<Eigen::Vector2d> formation_offsets;
    double z_com = 0.0;

    std::optional<double> dt; // default depends on the simulator
    double t_end = 10.0;
    int record_every = 1;

    std::optional<Eigen::VectorXd> target_vf;
    std::optional<int> modified_agent;
    std::vector<double> delta_candidates{-0.5, 0.5, 1.0, 1.5, 2.0};
    double default_k = 0.0;
    bool apply_plan = false; // simulate with the planned k and velocities

    std::vector<Expectation> expectations;

    int agents() const { return 2 * m; }
    bool has_initial_conditions() const { return random_init || positions.rows() > 0; }
};

/// Parses the line-oriented `key = value` format (# starts a comment).
/// Throws ConfigError listing every problem with its line number.
ScenarioConfig parse_config(std::string_view text);

/// Reads and parses a file; I/O failures raise ValidationError.
ScenarioConfig load_config(const std::string& path);

/// Initial positions and velocities: explicit rows, or uniform draws in
/// [-scale, scale] from a 64-bit Mersenne Twister seeded with `seed`
/// (positions agent by agent, then velocities).
struct InitialConditions {
    Eigen::MatrixXd positions;
    Eigen::MatrixXd velocities;
};
InitialConditions initial_conditions(const ScenarioConfig& config, std::uint64_t seed);

/// Desired formation from the radius/assignment or explicit offsets.
FormationSpec formation_spec(const ScenarioConfig& config);

} // namespace ringform
