#pragma once

#include "ringform/consensus_sim.hpp"
#include "ringform/ring_graph.hpp"

#include <Eigen/Dense>

#include <numbers>
#include <string>
#include <vector>

namespace ringform {

struct QuadrotorParams {
    double mass = 1.0;                                                  // kg
    Eigen::Matrix3d inertia = Eigen::Vector3d(0.02, 0.02, 0.04).asDiagonal(); // kg m^2
    double gravity = 9.81;                                              // m/s^2

    /// mass > 0, gravity > 0, inertia symmetric positive definite.
    void validate() const;
};

/// Rigid-body state of one vehicle. Attitude is (roll, pitch, yaw) in
/// radians, omega the body rates. attitude_integral is the PID integrator
/// state of the attitude loop.
struct QuadrotorState {
    Eigen::Vector3d p = Eigen::Vector3d::Zero();
    Eigen::Vector3d v = Eigen::Vector3d::Zero();
    Eigen::Vector3d attitude = Eigen::Vector3d::Zero();
    Eigen::Vector3d omega = Eigen::Vector3d::Zero();
    Eigen::Vector3d attitude_integral = Eigen::Vector3d::Zero();
};

/// Desired horizontal offsets p*_i and the common altitude. Pairwise targets
/// d*_ij = p*_i - p*_j are always derived from the offsets.
struct FormationSpec {
    std::vector<Eigen::Vector2d> offsets;
    double z_com = 0.0;

    /// Vertex l (1-based) at angle 2 pi (l-1) / n on a circle of `radius`
    /// about the origin. assignment[i] is the vertex of agent i+1; empty
    /// means agent i+1 takes vertex i+1.
    static FormationSpec regular_polygon(int n, double radius, double z_com,
                                         const std::vector<int>& assignment = {});

    Eigen::Vector2d desired_offset(int i, int j) const; // d*_ij, 1-based
};

struct AttitudeGains {
    Eigen::Vector3d kp = Eigen::Vector3d::Constant(2500.0);
    Eigen::Vector3d kd = Eigen::Vector3d::Constant(100.0);
    Eigen::Vector3d ki = Eigen::Vector3d::Zero();
    double integral_limit = 1.0; // rad s, anti-windup clamp
};

/// Protection applied while turning an acceleration command into attitude
/// references.
struct ReferenceLimits {
    double max_tilt = std::numbers::pi / 3.0; // |phi_d|, |theta_d| bound
    // Lower bound on u_z + g as a fraction of g. Below it the upright thrust
    // direction can no longer realize the command and the arctan flips sign.
    double min_lift_fraction = 0.1;
};

struct CascadeGains {
    CouplingGains coupling;
    double kpz = 1.0;
    double kvz = 4.0;
    AttitudeGains attitude;
    ReferenceLimits limits;

    void validate() const;
};

/// Horizontal channels: consensus law with formation offsets summed edge by
/// edge. Vertical channel: u_z = -kpz (z - z_com) - kvz v_z.
std::vector<Eigen::Vector3d> formation_control(const std::vector<QuadrotorState>& states,
                                               const WeightedLaplacian& laplacian,
                                               const FormationSpec& spec, const CascadeGains& gains);

struct AttitudeReference {
    double thrust = 0.0;
    Eigen::Vector3d attitude = Eigen::Vector3d::Zero(); // phi_d, theta_d, psi_d
    bool degenerate = false;                            // thrust was zero
};

/// T = m |(u_x, u_y, u_z + g)|, roll and pitch references inverting the
/// thrust direction for yaw psi_d; both clamped to the tilt limit.
AttitudeReference thrust_attitude_refs(const Eigen::Vector3d& u, const QuadrotorParams& params,
                                       double psi_d = 0.0, const ReferenceLimits& limits = {});

/// tau = J (kp e + ki clamp(integral) - kd omega), e = reference - attitude
/// (yaw error wrapped to [-pi, pi]).
Eigen::Vector3d attitude_controller(const QuadrotorState& state, const Eigen::Vector3d& reference,
                                    const AttitudeGains& gains, const QuadrotorParams& params);

/// Body-to-inertial rotation R = Rz(psi) Ry(theta) Rx(phi).
Eigen::Matrix3d rotation_matrix(const Eigen::Vector3d& attitude);

/// Map W from body rates to Euler-angle rates.
Eigen::Matrix3d euler_rate_map(const Eigen::Vector3d& attitude);

/// Largest |pitch| accepted by the dynamics.
inline constexpr double pitch_limit = std::numbers::pi / 2.0 - 1e-3;

/// Time derivative of p, v, attitude and omega (attitude_integral rate is
/// left at zero; the simulator owns it). Throws DivergenceError when the
/// pitch leaves (-pitch_limit, pitch_limit).
QuadrotorState dynamics_derivative(const QuadrotorState& state, double thrust,
                                   const Eigen::Vector3d& torque, const QuadrotorParams& params);

struct QuadSimOptions {
    double dt = 0.001;
    double t_end = 0.0;
    int record_every = 1;
    double divergence_limit = 1e12;
    double psi_d = 0.0;
};

struct QuadSample {
    double t = 0.0;
    std::vector<QuadrotorState> states;
    std::vector<AttitudeReference> references; // evaluated at this state
};

struct QuadTrajectory {
    std::vector<QuadSample> samples;
    std::vector<std::string> warnings;
};

/// Closed-loop swarm: formation_control -> thrust_attitude_refs ->
/// attitude_controller -> dynamics_derivative, all re-evaluated at every RK4
/// stage. Warns (does not fail) when the gains are not certified.
QuadTrajectory simulate_swarm(const std::vector<QuadrotorState>& initial,
                              const WeightedLaplacian& laplacian, const FormationSpec& spec,
                              const CascadeGains& gains, const QuadrotorParams& params,
                              const QuadSimOptions& options);

struct FormationMetrics {
    double t = 0.0;
    double formation_error = 0.0; // centroid-relative, horizontal
    double altitude_error = 0.0;
    double velocity_spread = 0.0;
    double vz_max = 0.0;
    double attitude_error = 0.0; // max_i |attitude - reference|_inf
};

FormationMetrics formation_metrics(const QuadSample& sample, const FormationSpec& spec);
std::vector<FormationMetrics> formation_metrics(const QuadTrajectory& trajectory,
                                                const FormationSpec& spec);

/// Mean horizontal velocity of a sample.
Eigen::Vector2d mean_horizontal_velocity(const QuadSample& sample);

/// Decay rates (1/s) of the slowest inner attitude mode and of the slowest and
/// fastest outer modes (consensus loop over L plus the altitude loop).
struct TimescaleReport {
    double inner_rate = 0.0;
    double outer_slowest_rate = 0.0;
    double outer_fastest_rate = 0.0;

    bool separated(double factor = 10.0) const { return inner_rate >= factor * outer_slowest_rate; }
};

TimescaleReport timescale_separation(const CascadeGains& gains, int m);

} // namespace ringform
