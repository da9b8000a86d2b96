#pragma once

#include "ringform/ring_graph.hpp"

#include <Eigen/Dense>

#include <vector>

namespace ringform {

/// Coupling strengths of the consensus law together with the ring gain.
struct CouplingGains {
    double alpha = 1.0; // position coupling, > 0
    double beta = 1.0;  // velocity coupling, > 0
    double k = 0.0;     // ring edge gain

    /// Throws ValidationError unless alpha, beta > 0 and all are finite.
    void validate() const;
};

/// Stacked double-integrator swarm. Row i is agent i+1; columns are the
/// d in {1, 2, 3} spatial coordinates.
struct SwarmState {
    double t = 0.0;
    Eigen::MatrixXd positions;  // N x d, meters
    Eigen::MatrixXd velocities; // N x d, m/s

    int agents() const { return static_cast<int>(positions.rows()); }
    int dimension() const { return static_cast<int>(positions.cols()); }
};

/// u = -alpha L p - beta L v, coordinate by coordinate.
Eigen::MatrixXd control_input(const SwarmState& state, const WeightedLaplacian& laplacian,
                              const CouplingGains& gains);

struct SimulationOptions {
    double dt = 0.01;
    double t_end = 0.0;
    int record_every = 1;
    double divergence_limit = 1e12; // any |component| above this aborts
};

/// Recorded samples, first one is the initial state, last one is t_end.
struct Trajectory {
    std::vector<SwarmState> samples;
};

/// RK4 integration of the closed loop p' = v, v' = u. Throws DivergenceError
/// (with the blow-up time) when a component becomes non-finite or exceeds the
/// divergence limit.
Trajectory simulate(const SwarmState& initial, const WeightedLaplacian& laplacian,
                    const CouplingGains& gains, const SimulationOptions& options);

/// Consensus velocity w^T v(0) / (m (2 + k)) per coordinate. Throws
/// ValidationError at k = -2 and on a row count that is not 2m.
Eigen::VectorXd predict_final_velocity(const Eigen::MatrixXd& initial_velocities, int m, double k);

/// max_i |v_i - mean(v)|.
double velocity_spread(const SwarmState& state);
double velocity_spread(const Eigen::MatrixXd& velocities);

/// Column means of the velocity block.
Eigen::VectorXd mean_velocity(const Eigen::MatrixXd& velocities);

/// Weighted momentum w^T v per coordinate; constant along exact trajectories.
Eigen::VectorXd weighted_momentum(const SwarmState& state, double k);

struct ConvergenceCriteria {
    double velocity_spread = 1e-6;
    double disagreement_rate = 1e-6;
};

/// First recorded time at which the velocity spread and the rate of change of
/// the position spread (max_i |p_i - mean p|, finite-differenced between
/// samples) both fall below their thresholds and stay there. Negative if
/// never.
double convergence_time(const Trajectory& trajectory, const ConvergenceCriteria& criteria = {});

} // namespace ringform
