#include "ringform/consensus_sim.hpp"

#include "ringform/errors.hpp"
#include "ringform/rk4.hpp"

#include <cmath>
#include <sstream>

namespace ringform {

void CouplingGains::validate() const
{
    if (!std::isfinite(alpha) || !std::isfinite(beta) || !std::isfinite(k))
        throw ValidationError("coupling gains must be finite");
    if (!(alpha > 0.0))
        throw ValidationError("alpha must be > 0");
    if (!(beta > 0.0))
        throw ValidationError("beta must be > 0");
}

namespace {

void check_shapes(const SwarmState& state, const WeightedLaplacian& laplacian)
{
    const int n = laplacian.size();
    if (state.positions.rows() != n || state.velocities.rows() != n)
        throw ValidationError("swarm has " + std::to_string(state.positions.rows()) +
                              " agents, Laplacian expects " + std::to_string(n));
    if (state.positions.cols() != state.velocities.cols())
        throw ValidationError("position and velocity dimensions differ");
    if (state.positions.cols() < 1 || state.positions.cols() > 3)
        throw ValidationError("spatial dimension must be 1, 2 or 3");
}

} // namespace

Eigen::MatrixXd control_input(const SwarmState& state, const WeightedLaplacian& laplacian,
                              const CouplingGains& gains)
{
    check_shapes(state, laplacian);
    return -gains.alpha * (laplacian.entries * state.positions) -
           gains.beta * (laplacian.entries * state.velocities);
}

Trajectory simulate(const SwarmState& initial, const WeightedLaplacian& laplacian,
                    const CouplingGains& gains, const SimulationOptions& options)
{
    check_shapes(initial, laplacian);
    gains.validate();
    if (!(options.dt > 0.0) || !std::isfinite(options.dt))
        throw ValidationError("dt must be > 0");
    if (!(options.t_end >= 0.0) || !std::isfinite(options.t_end))
        throw ValidationError("t_end must be >= 0");
    if (options.record_every < 1)
        throw ValidationError("record_every must be >= 1");

    const int n = initial.agents();
    const int d = initial.dimension();
    const Eigen::MatrixXd lap = laplacian.entries;

    // Stacked [p v] so one RK4 call advances both blocks.
    Eigen::MatrixXd x(n, 2 * d);
    x << initial.positions, initial.velocities;

    auto derivative = [&](const Eigen::MatrixXd& s) -> Eigen::MatrixXd {
        Eigen::MatrixXd out(n, 2 * d);
        out.leftCols(d) = s.rightCols(d);
        out.rightCols(d) = -gains.alpha * (lap * s.leftCols(d)) - gains.beta * (lap * s.rightCols(d));
        return out;
    };

    auto sample = [&](double t) {
        return SwarmState{t, x.leftCols(d), x.rightCols(d)};
    };

    const long long steps = static_cast<long long>(std::ceil(options.t_end / options.dt - 1e-9));
    Trajectory trajectory;
    trajectory.samples.push_back(sample(0.0));
    for (long long i = 1; i <= steps; ++i) {
        const double t_prev = static_cast<double>(i - 1) * options.dt;
        const double t = (i == steps) ? options.t_end : static_cast<double>(i) * options.dt;
        x = rk4_step(x, t - t_prev, derivative);

        if (!x.allFinite() || x.cwiseAbs().maxCoeff() > options.divergence_limit) {
            std::ostringstream msg;
            msg << "state exceeded " << options.divergence_limit << " at t=" << t;
            throw DivergenceError(t, msg.str());
        }
        if (i % options.record_every == 0 || i == steps)
            trajectory.samples.push_back(sample(t));
    }
    return trajectory;
}

Eigen::VectorXd predict_final_velocity(const Eigen::MatrixXd& initial_velocities, int m, double k)
{
    if (k == -2.0)
        throw ValidationError("consensus velocity undefined at k = -2 (weights sum to zero)");
    if (initial_velocities.rows() != 2 * m)
        throw ValidationError("expected " + std::to_string(2 * m) + " velocity rows, got " +
                              std::to_string(initial_velocities.rows()));
    const Eigen::VectorXd w = left_null_vector(m, k);
    return (initial_velocities.transpose() * w) / (m * (2.0 + k));
}

Eigen::VectorXd mean_velocity(const Eigen::MatrixXd& velocities)
{
    return velocities.colwise().mean().transpose();
}

double velocity_spread(const Eigen::MatrixXd& velocities)
{
    if (velocities.rows() == 0)
        return 0.0;
    const Eigen::RowVectorXd mean = velocities.colwise().mean();
    return (velocities.rowwise() - mean).rowwise().norm().maxCoeff();
}

double velocity_spread(const SwarmState& state)
{
    return velocity_spread(state.velocities);
}

Eigen::VectorXd weighted_momentum(const SwarmState& state, double k)
{
    const int m = state.agents() / 2;
    return state.velocities.transpose() * left_null_vector(m, k);
}

double convergence_time(const Trajectory& trajectory, const ConvergenceCriteria& criteria)
{
    const auto& s = trajectory.samples;
    double candidate = -1.0;
    for (std::size_t i = 1; i < s.size(); ++i) {
        const double dt = s[i].t - s[i - 1].t;
        const double rate = dt > 0.0 ? std::abs(velocity_spread(s[i].positions) -
                                                velocity_spread(s[i - 1].positions)) / dt
                                     : 0.0;
        const bool ok = velocity_spread(s[i]) < criteria.velocity_spread &&
                        rate < criteria.disagreement_rate;
        if (ok && candidate < 0.0)
            candidate = s[i].t;
        else if (!ok)
            candidate = -1.0;
    }
    return candidate;
}

} // namespace ringform
