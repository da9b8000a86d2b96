#pragma once

namespace ringform {

// Classical fixed-step fourth-order Runge-Kutta step for an autonomous
// system. State is any Eigen-like value type closed under + and scalar *.
template <typename State, typename Derivative>
State rk4_step(const State& x, double dt, Derivative&& f)
{
    const State k1 = f(x);
    const State k2 = f(State(x + (dt / 2.0) * k1));
    const State k3 = f(State(x + (dt / 2.0) * k2));
    const State k4 = f(State(x + dt * k3));
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

} // namespace ringform
