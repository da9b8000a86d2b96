#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace ringform {

/// Sums that decide whether a target consensus velocity is reachable.
///
///   g = sum_i (v_f - v_{2i}(0))      over even agents
///   h = sum_i (v_{2i-1}(0) - v_f)    over odd agents
///
/// The target is reachable with gain k exactly when (1 + k) g = h.
struct ReachabilityVectors {
    Eigen::VectorXd g;
    Eigen::VectorXd h;
};

/// Rows of initial_velocities are agents (2m of them); only the first
/// target.size() coordinates are used.
ReachabilityVectors reachability_vectors(const Eigen::MatrixXd& initial_velocities,
                                         const Eigen::VectorXd& target, int m);

/// h with odd agent `agent`'s term (v_agent - v_f) replaced by -v_f.
Eigen::VectorXd h_hat(const ReachabilityVectors& vectors, const Eigen::MatrixXd& initial_velocities,
                      int agent);

enum class GainStatus {
    feasible,      // unique delta, k above threshold
    unconstrained, // g = h = 0: every k works, caller default returned
    not_collinear, // no scalar delta with delta g = h
    zero_g,        // g = 0 but h != 0
    below_threshold,
};

struct GainSolution {
    GainStatus status = GainStatus::not_collinear;
    std::optional<double> delta;
    std::optional<double> k; // set for feasible and unconstrained
};

/// Relative collinearity tolerance: |g x h| <= tol |g| |h|.
inline constexpr double collinearity_tolerance = 1e-9;

/// delta = (g.h)/(g.g), accepted when g and h are collinear and k = delta - 1
/// exceeds the stability threshold of an m-macro-vertex ring.
GainSolution solve_gain(const ReachabilityVectors& vectors, int m, double default_k = 0.0);

struct VelocityPlan {
    Eigen::VectorXd target_vf;
    double delta = 1.0;
    double k = 0.0;
    std::optional<int> modified_agent; // odd, 1-based
    std::optional<Eigen::VectorXd> modified_velocity;
    bool feasible = false;
};

/// Replacement initial velocity for odd agent `agent` so that delta g = h_hat
/// + v_agent holds. Throws ValidationError for an even or out-of-range agent
/// or delta = 0, InfeasibleError when delta - 1 is at or below the threshold.
VelocityPlan plan_with_modified_agent(const Eigen::MatrixXd& initial_velocities,
                                      const Eigen::VectorXd& target, int m, int agent, double delta);

/// Velocities with the plan's modification applied (unchanged if none).
Eigen::MatrixXd apply_plan(const Eigen::MatrixXd& initial_velocities, const VelocityPlan& plan);

struct PlannerOptions {
    std::vector<double> delta_candidates{-0.5, 0.5, 1.0, 1.5, 2.0};
    std::optional<int> modified_agent; // restrict to one odd agent
    double default_k = 0.0;            // used when every k is admissible
};

/// Tries the unmodified velocities first. Otherwise walks the delta
/// candidates in order and, for the first one that gives an admissible k,
/// returns the plan over the allowed odd agents with the smallest modified
/// speed. Returns an infeasible plan (feasible = false) if nothing works.
VelocityPlan plan_velocity(const Eigen::MatrixXd& initial_velocities, const Eigen::VectorXd& target,
                           int m, const PlannerOptions& options = {});

} // namespace ringform
