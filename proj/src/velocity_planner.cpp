#include "ringform/velocity_planner.hpp"

#include "ringform/errors.hpp"
#include "ringform/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ringform {

namespace {

void check_inputs(const Eigen::MatrixXd& velocities, const Eigen::VectorXd& target, int m)
{
    if (m < 2)
        throw ValidationError("planner needs m >= 2");
    if (velocities.rows() != 2 * m)
        throw ValidationError("expected " + std::to_string(2 * m) + " initial velocities, got " +
                              std::to_string(velocities.rows()));
    if (target.size() < 1 || target.size() > velocities.cols())
        throw ValidationError("target has " + std::to_string(target.size()) +
                              " coordinates, velocities have " + std::to_string(velocities.cols()));
    if (!velocities.allFinite() || !target.allFinite())
        throw ValidationError("planner inputs must be finite");
}

void check_odd_agent(int agent, int m)
{
    if (agent < 1 || agent > 2 * m)
        throw ValidationError("agent " + std::to_string(agent) + " outside 1.." + std::to_string(2 * m));
    if (agent % 2 == 0)
        throw ValidationError("only odd-indexed agents can be modified, got " + std::to_string(agent));
}

bool admissible_gain(int m, double k)
{
    return analyze(m, k).stable;
}

} // namespace

ReachabilityVectors reachability_vectors(const Eigen::MatrixXd& initial_velocities,
                                         const Eigen::VectorXd& target, int m)
{
    check_inputs(initial_velocities, target, m);
    const auto d = target.size();
    ReachabilityVectors out{Eigen::VectorXd::Zero(d), Eigen::VectorXd::Zero(d)};
    for (int i = 0; i < m; ++i) {
        const Eigen::VectorXd odd = initial_velocities.row(2 * i).head(d).transpose();
        const Eigen::VectorXd even = initial_velocities.row(2 * i + 1).head(d).transpose();
        out.g += target - even;
        out.h += odd - target;
    }
    return out;
}

Eigen::VectorXd h_hat(const ReachabilityVectors& vectors, const Eigen::MatrixXd& initial_velocities,
                      int agent)
{
    const auto d = vectors.h.size();
    check_odd_agent(agent, static_cast<int>(initial_velocities.rows() / 2));
    // Dropping (v_a - v_f) and adding -v_f leaves h - v_a.
    return vectors.h - initial_velocities.row(agent - 1).head(d).transpose();
}

GainSolution solve_gain(const ReachabilityVectors& vectors, int m, double default_k)
{
    const double g_norm = vectors.g.norm();
    const double h_norm = vectors.h.norm();
    const double scale = std::max(1.0, std::max(g_norm, h_norm));
    const bool g_zero = g_norm <= 1e-12 * scale;
    const bool h_zero = h_norm <= 1e-12 * scale;

    GainSolution out;
    if (g_zero && h_zero) {
        out.status = GainStatus::unconstrained;
        out.k = default_k;
        out.delta = default_k + 1.0;
        return out;
    }
    if (g_zero) {
        out.status = GainStatus::zero_g;
        return out;
    }

    const double delta = vectors.g.dot(vectors.h) / vectors.g.squaredNorm();
    // |h - delta g| = |g x h| / |g|, so this is the cross-product test.
    const double residual = (vectors.h - delta * vectors.g).norm();
    if (residual > collinearity_tolerance * h_norm) {
        out.status = GainStatus::not_collinear;
        return out;
    }

    out.delta = delta;
    const double k = delta - 1.0;
    if (!admissible_gain(m, k)) {
        out.status = GainStatus::below_threshold;
        return out;
    }
    out.status = GainStatus::feasible;
    out.k = k;
    return out;
}

VelocityPlan plan_with_modified_agent(const Eigen::MatrixXd& initial_velocities,
                                      const Eigen::VectorXd& target, int m, int agent, double delta)
{
    check_inputs(initial_velocities, target, m);
    check_odd_agent(agent, m);
    if (delta == 0.0 || !std::isfinite(delta))
        throw ValidationError("delta must be finite and nonzero");
    const double k = delta - 1.0;
    if (!admissible_gain(m, k))
        throw InfeasibleError("k = " + std::to_string(k) + " is not above the threshold " +
                              std::to_string(k_threshold(m)));

    const ReachabilityVectors vectors = reachability_vectors(initial_velocities, target, m);
    VelocityPlan plan;
    plan.target_vf = target;
    plan.delta = delta;
    plan.k = k;
    plan.modified_agent = agent;
    plan.modified_velocity = Eigen::VectorXd(delta * vectors.g - h_hat(vectors, initial_velocities, agent));
    plan.feasible = true;
    return plan;
}

Eigen::MatrixXd apply_plan(const Eigen::MatrixXd& initial_velocities, const VelocityPlan& plan)
{
    Eigen::MatrixXd out = initial_velocities;
    if (plan.modified_agent && plan.modified_velocity) {
        const auto d = plan.modified_velocity->size();
        out.row(*plan.modified_agent - 1).head(d) = plan.modified_velocity->transpose();
    }
    return out;
}

VelocityPlan plan_velocity(const Eigen::MatrixXd& initial_velocities, const Eigen::VectorXd& target,
                           int m, const PlannerOptions& options)
{
    const ReachabilityVectors vectors = reachability_vectors(initial_velocities, target, m);
    const GainSolution direct = solve_gain(vectors, m, options.default_k);

    VelocityPlan plan;
    plan.target_vf = target;
    if (direct.status == GainStatus::feasible || direct.status == GainStatus::unconstrained) {
        plan.k = *direct.k;
        plan.delta = *direct.k + 1.0;
        plan.feasible = true;
        return plan;
    }

    std::vector<int> agents;
    if (options.modified_agent) {
        check_odd_agent(*options.modified_agent, m);
        agents.push_back(*options.modified_agent);
    } else {
        for (int a = 1; a <= 2 * m; a += 2)
            agents.push_back(a);
    }

    for (double delta : options.delta_candidates) {
        if (delta == 0.0 || !std::isfinite(delta) || !admissible_gain(m, delta - 1.0))
            continue;
        std::optional<VelocityPlan> best;
        for (int agent : agents) {
            VelocityPlan candidate = plan_with_modified_agent(initial_velocities, target, m, agent, delta);
            if (!best || candidate.modified_velocity->norm() < best->modified_velocity->norm())
                best = std::move(candidate);
        }
        if (best)
            return *best;
    }
    return plan;
}

} // namespace ringform
