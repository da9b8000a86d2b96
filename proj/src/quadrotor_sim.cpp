#include "ringform/quadrotor_sim.hpp"

#include "ringform/errors.hpp"
#include "ringform/rk4.hpp"
#include "ringform/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ringform {

void QuadrotorParams::validate() const
{
    if (!(mass > 0.0) || !std::isfinite(mass))
        throw ValidationError("mass must be > 0");
    if (!(gravity > 0.0) || !std::isfinite(gravity))
        throw ValidationError("gravity must be > 0");
    if (!inertia.allFinite() || !inertia.isApprox(inertia.transpose(), 1e-12))
        throw ValidationError("inertia must be symmetric");
    Eigen::LLT<Eigen::Matrix3d> llt(inertia);
    if (llt.info() != Eigen::Success)
        throw ValidationError("inertia must be positive definite");
}

FormationSpec FormationSpec::regular_polygon(int n, double radius, double z_com,
                                             const std::vector<int>& assignment)
{
    if (n < 1)
        throw ValidationError("formation needs at least one vertex");
    if (!assignment.empty() && static_cast<int>(assignment.size()) != n)
        throw ValidationError("formation assignment must list one vertex per agent");
    FormationSpec spec;
    spec.z_com = z_com;
    spec.offsets.reserve(n);
    for (int i = 0; i < n; ++i) {
        const int vertex = assignment.empty() ? i + 1 : assignment[i];
        if (vertex < 1 || vertex > n)
            throw ValidationError("formation vertex " + std::to_string(vertex) + " out of range");
        const double angle = 2.0 * std::numbers::pi * (vertex - 1) / n;
        spec.offsets.emplace_back(radius * std::cos(angle), radius * std::sin(angle));
    }
    return spec;
}

Eigen::Vector2d FormationSpec::desired_offset(int i, int j) const
{
    return offsets.at(i - 1) - offsets.at(j - 1);
}

void CascadeGains::validate() const
{
    coupling.validate();
    const bool finite = std::isfinite(kpz) && std::isfinite(kvz) && attitude.kp.allFinite() &&
                        attitude.kd.allFinite() && attitude.ki.allFinite() &&
                        std::isfinite(attitude.integral_limit) && std::isfinite(limits.max_tilt) &&
                        std::isfinite(limits.min_lift_fraction);
    if (!finite)
        throw ValidationError("cascade gains must be finite");
    if (!(kpz > 0.0) || !(kvz > 0.0))
        throw ValidationError("altitude gains kpz, kvz must be > 0");
    if (!(limits.max_tilt > 0.0) || limits.max_tilt >= pitch_limit)
        throw ValidationError("tilt limit must lie in (0, pi/2)");
}

std::vector<Eigen::Vector3d> formation_control(const std::vector<QuadrotorState>& states,
                                               const WeightedLaplacian& laplacian,
                                               const FormationSpec& spec, const CascadeGains& gains)
{
    const int n = laplacian.size();
    if (static_cast<int>(states.size()) != n || static_cast<int>(spec.offsets.size()) != n)
        throw ValidationError("formation control: " + std::to_string(states.size()) + " states, " +
                              std::to_string(spec.offsets.size()) + " offsets, " + std::to_string(n) +
                              " agents in the ring");

    std::vector<Eigen::Vector3d> u(n, Eigen::Vector3d::Zero());
    for (const Edge& e : edges(laplacian.topology)) {
        const QuadrotorState& self = states[e.from - 1];
        const QuadrotorState& other = states[e.to - 1];
        const Eigen::Vector2d dp = self.p.head<2>() - other.p.head<2>() - spec.desired_offset(e.from, e.to);
        const Eigen::Vector2d dv = self.v.head<2>() - other.v.head<2>();
        u[e.from - 1].head<2>() -= e.weight * (gains.coupling.alpha * dp + gains.coupling.beta * dv);
    }
    for (int i = 0; i < n; ++i)
        u[i].z() = -gains.kpz * (states[i].p.z() - spec.z_com) - gains.kvz * states[i].v.z();
    return u;
}

AttitudeReference thrust_attitude_refs(const Eigen::Vector3d& u, const QuadrotorParams& params,
                                       double psi_d, const ReferenceLimits& limits)
{
    double lift = u.z() + params.gravity;
    if (limits.min_lift_fraction > 0.0)
        lift = std::max(lift, limits.min_lift_fraction * params.gravity);

    AttitudeReference ref;
    ref.thrust = params.mass * std::sqrt(u.x() * u.x() + u.y() * u.y() + lift * lift);
    ref.attitude.z() = psi_d;
    if (ref.thrust == 0.0) {
        ref.degenerate = true;
        return ref;
    }

    const double s = std::sin(psi_d);
    const double c = std::cos(psi_d);
    const double roll_arg = std::clamp(params.mass / ref.thrust * (u.x() * s - u.y() * c), -1.0, 1.0);
    const double forward = u.x() * c + u.y() * s;
    const double pitch = (lift == 0.0) ? (forward == 0.0 ? 0.0 : std::copysign(std::numbers::pi / 2.0, forward))
                                       : std::atan(forward / lift);
    ref.attitude.x() = std::clamp(std::asin(roll_arg), -limits.max_tilt, limits.max_tilt);
    ref.attitude.y() = std::clamp(pitch, -limits.max_tilt, limits.max_tilt);
    return ref;
}

namespace {

Eigen::Vector3d attitude_error(const Eigen::Vector3d& attitude, const Eigen::Vector3d& reference)
{
    Eigen::Vector3d e = reference - attitude;
    e.z() = std::remainder(e.z(), 2.0 * std::numbers::pi);
    return e;
}

} // namespace

Eigen::Vector3d attitude_controller(const QuadrotorState& state, const Eigen::Vector3d& reference,
                                    const AttitudeGains& gains, const QuadrotorParams& params)
{
    const Eigen::Vector3d e = attitude_error(state.attitude, reference);
    const Eigen::Vector3d integral =
        state.attitude_integral.cwiseMax(-gains.integral_limit).cwiseMin(gains.integral_limit);
    const Eigen::Vector3d command =
        gains.kp.cwiseProduct(e) + gains.ki.cwiseProduct(integral) - gains.kd.cwiseProduct(state.omega);
    return params.inertia * command;
}

Eigen::Matrix3d rotation_matrix(const Eigen::Vector3d& attitude)
{
    const Eigen::Matrix3d r = (Eigen::AngleAxisd(attitude.z(), Eigen::Vector3d::UnitZ()) *
                               Eigen::AngleAxisd(attitude.y(), Eigen::Vector3d::UnitY()) *
                               Eigen::AngleAxisd(attitude.x(), Eigen::Vector3d::UnitX()))
                                  .toRotationMatrix();
    return r;
}

Eigen::Matrix3d euler_rate_map(const Eigen::Vector3d& attitude)
{
    const double sphi = std::sin(attitude.x());
    const double cphi = std::cos(attitude.x());
    const double ttheta = std::tan(attitude.y());
    const double ctheta = std::cos(attitude.y());
    Eigen::Matrix3d w;
    w << 1.0, ttheta * sphi, ttheta * cphi,
         0.0, cphi, -sphi,
         0.0, sphi / ctheta, cphi / ctheta;
    return w;
}

QuadrotorState dynamics_derivative(const QuadrotorState& state, double thrust,
                                   const Eigen::Vector3d& torque, const QuadrotorParams& params)
{
    if (!(std::abs(state.attitude.y()) < pitch_limit)) {
        std::ostringstream msg;
        msg << "pitch " << state.attitude.y() << " rad outside the Euler-rate domain";
        throw DivergenceError(std::numeric_limits<double>::quiet_NaN(), msg.str());
    }
    QuadrotorState rate;
    rate.p = state.v;
    rate.v = (thrust / params.mass) * rotation_matrix(state.attitude).col(2) -
             params.gravity * Eigen::Vector3d::UnitZ();
    rate.attitude = euler_rate_map(state.attitude) * state.omega;
    rate.omega = params.inertia.llt().solve(torque);
    rate.attitude_integral.setZero();
    return rate;
}

namespace {

constexpr int state_width = 15;

QuadrotorState unpack(const Eigen::MatrixXd& x, int i)
{
    QuadrotorState s;
    s.p = x.row(i).segment<3>(0).transpose();
    s.v = x.row(i).segment<3>(3).transpose();
    s.attitude = x.row(i).segment<3>(6).transpose();
    s.omega = x.row(i).segment<3>(9).transpose();
    s.attitude_integral = x.row(i).segment<3>(12).transpose();
    return s;
}

void pack(Eigen::MatrixXd& x, int i, const QuadrotorState& s)
{
    x.row(i).segment<3>(0) = s.p.transpose();
    x.row(i).segment<3>(3) = s.v.transpose();
    x.row(i).segment<3>(6) = s.attitude.transpose();
    x.row(i).segment<3>(9) = s.omega.transpose();
    x.row(i).segment<3>(12) = s.attitude_integral.transpose();
}

std::vector<QuadrotorState> unpack_all(const Eigen::MatrixXd& x)
{
    std::vector<QuadrotorState> out;
    out.reserve(x.rows());
    for (int i = 0; i < x.rows(); ++i)
        out.push_back(unpack(x, i));
    return out;
}

std::vector<AttitudeReference> references_for(const std::vector<QuadrotorState>& states,
                                              const WeightedLaplacian& laplacian,
                                              const FormationSpec& spec, const CascadeGains& gains,
                                              const QuadrotorParams& params, double psi_d)
{
    const auto u = formation_control(states, laplacian, spec, gains);
    std::vector<AttitudeReference> refs;
    refs.reserve(u.size());
    for (const auto& ui : u)
        refs.push_back(thrust_attitude_refs(ui, params, psi_d, gains.limits));
    return refs;
}

} // namespace

QuadTrajectory simulate_swarm(const std::vector<QuadrotorState>& initial,
                              const WeightedLaplacian& laplacian, const FormationSpec& spec,
                              const CascadeGains& gains, const QuadrotorParams& params,
                              const QuadSimOptions& options)
{
    gains.validate();
    params.validate();
    if (!(options.dt > 0.0) || !std::isfinite(options.dt))
        throw ValidationError("dt must be > 0");
    if (!(options.t_end >= 0.0) || !std::isfinite(options.t_end))
        throw ValidationError("t_end must be >= 0");
    if (options.record_every < 1)
        throw ValidationError("record_every must be >= 1");
    const int n = laplacian.size();
    if (static_cast<int>(initial.size()) != n)
        throw ValidationError("expected " + std::to_string(n) + " quadrotors, got " +
                              std::to_string(initial.size()));

    QuadTrajectory trajectory;
    const int m = laplacian.topology.macro_vertices();
    const double k = laplacian.topology.gain();
    if (!gains_certified(m, k, gains.coupling.alpha, gains.coupling.beta)) {
        std::ostringstream msg;
        msg << "gains not certified: k=" << k << " threshold=" << k_threshold(m)
            << " beta^2/alpha=" << gains.coupling.beta * gains.coupling.beta / gains.coupling.alpha;
        trajectory.warnings.push_back(msg.str());
    }
    if (!timescale_separation(gains, m).separated())
        trajectory.warnings.push_back("attitude loop is less than 10x faster than the slowest outer mode");

    Eigen::MatrixXd x(n, state_width);
    for (int i = 0; i < n; ++i)
        pack(x, i, initial[i]);

    auto derivative = [&](const Eigen::MatrixXd& s) -> Eigen::MatrixXd {
        const auto states = unpack_all(s);
        const auto refs = references_for(states, laplacian, spec, gains, params, options.psi_d);
        Eigen::MatrixXd out(n, state_width);
        for (int i = 0; i < n; ++i) {
            const Eigen::Vector3d tau = attitude_controller(states[i], refs[i].attitude, gains.attitude, params);
            QuadrotorState rate = dynamics_derivative(states[i], refs[i].thrust, tau, params);
            // Integrate the attitude error except where it would push the
            // clamped integrator further out.
            const Eigen::Vector3d e = attitude_error(states[i].attitude, refs[i].attitude);
            for (int a = 0; a < 3; ++a) {
                const double acc = states[i].attitude_integral(a);
                const bool saturated = std::abs(acc) >= gains.attitude.integral_limit && acc * e(a) > 0.0;
                rate.attitude_integral(a) = saturated ? 0.0 : e(a);
            }
            pack(out, i, rate);
        }
        return out;
    };

    auto record = [&](double t) {
        QuadSample sample;
        sample.t = t;
        sample.states = unpack_all(x);
        sample.references = references_for(sample.states, laplacian, spec, gains, params, options.psi_d);
        trajectory.samples.push_back(std::move(sample));
    };

    const long long steps = static_cast<long long>(std::ceil(options.t_end / options.dt - 1e-9));
    record(0.0);
    for (long long i = 1; i <= steps; ++i) {
        const double t_prev = static_cast<double>(i - 1) * options.dt;
        const double t = (i == steps) ? options.t_end : static_cast<double>(i) * options.dt;
        try {
            x = rk4_step(x, t - t_prev, derivative);
        } catch (const DivergenceError& err) {
            throw DivergenceError(t_prev, err.what());
        }
        if (!x.allFinite() || x.cwiseAbs().maxCoeff() > options.divergence_limit) {
            std::ostringstream msg;
            msg << "state exceeded " << options.divergence_limit << " at t=" << t;
            throw DivergenceError(t, msg.str());
        }
        if (i % options.record_every == 0 || i == steps)
            record(t);
    }
    return trajectory;
}

FormationMetrics formation_metrics(const QuadSample& sample, const FormationSpec& spec)
{
    const auto n = sample.states.size();
    FormationMetrics out;
    out.t = sample.t;
    if (n == 0)
        return out;
    if (spec.offsets.size() != n)
        throw ValidationError("formation metrics: offset count does not match agent count");

    Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
    Eigen::Vector2d desired_centroid = Eigen::Vector2d::Zero();
    Eigen::MatrixXd velocities(n, 3);
    for (std::size_t i = 0; i < n; ++i) {
        centroid += sample.states[i].p.head<2>();
        desired_centroid += spec.offsets[i];
        velocities.row(i) = sample.states[i].v.transpose();
    }
    centroid /= static_cast<double>(n);
    desired_centroid /= static_cast<double>(n);

    for (std::size_t i = 0; i < n; ++i) {
        const QuadrotorState& s = sample.states[i];
        const Eigen::Vector2d rel = (s.p.head<2>() - centroid) - (spec.offsets[i] - desired_centroid);
        out.formation_error = std::max(out.formation_error, rel.norm());
        out.altitude_error = std::max(out.altitude_error, std::abs(s.p.z() - spec.z_com));
        out.vz_max = std::max(out.vz_max, std::abs(s.v.z()));
        if (i < sample.references.size())
            out.attitude_error = std::max(
                out.attitude_error, attitude_error(s.attitude, sample.references[i].attitude).cwiseAbs().maxCoeff());
    }
    out.velocity_spread = velocity_spread(velocities);
    return out;
}

std::vector<FormationMetrics> formation_metrics(const QuadTrajectory& trajectory, const FormationSpec& spec)
{
    std::vector<FormationMetrics> out;
    out.reserve(trajectory.samples.size());
    for (const QuadSample& s : trajectory.samples)
        out.push_back(formation_metrics(s, spec));
    return out;
}

Eigen::Vector2d mean_horizontal_velocity(const QuadSample& sample)
{
    Eigen::Vector2d sum = Eigen::Vector2d::Zero();
    for (const QuadrotorState& s : sample.states)
        sum += s.v.head<2>();
    return sample.states.empty() ? sum : Eigen::Vector2d(sum / static_cast<double>(sample.states.size()));
}

namespace {

// Slowest decay rate of s^3 + kd s^2 + kp s + ki (or s^2 + kd s + kp when
// ki = 0, the integrator then being decoupled).
double attitude_axis_rate(double kp, double kd, double ki)
{
    if (ki == 0.0) {
        const RootPair r = quadratic_roots(cplx(kd), cplx(kp));
        return -std::max(r[0].real(), r[1].real());
    }
    Eigen::Matrix3d companion;
    companion << -kd, -kp, -ki,
                 1.0, 0.0, 0.0,
                 0.0, 1.0, 0.0;
    const Eigen::Vector3cd roots = Eigen::EigenSolver<Eigen::Matrix3d>(companion, false).eigenvalues();
    return -roots.real().maxCoeff();
}

} // namespace

TimescaleReport timescale_separation(const CascadeGains& gains, int m)
{
    TimescaleReport report;
    report.inner_rate = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a)
        report.inner_rate = std::min(report.inner_rate, attitude_axis_rate(gains.attitude.kp(a), gains.attitude.kd(a),
                                                                           gains.attitude.ki(a)));

    std::vector<double> rates;
    for (const BlockEigenvalue& e : nonzero_laplacian_eigenvalues(m, gains.coupling.k)) {
        const RootPair r = quadratic_roots(gains.coupling.beta * e.value, gains.coupling.alpha * e.value);
        rates.push_back(-r[0].real());
        rates.push_back(-r[1].real());
    }
    const RootPair alt = quadratic_roots(cplx(gains.kvz), cplx(gains.kpz));
    rates.push_back(-alt[0].real());
    rates.push_back(-alt[1].real());
    report.outer_slowest_rate = *std::min_element(rates.begin(), rates.end());
    report.outer_fastest_rate = *std::max_element(rates.begin(), rates.end());
    return report;
}

} // namespace ringform
