#pragma once

#include <stdexcept>
#include <utility>

namespace lpvguide {

/// One classical Runge-Kutta step of x' = f(x, u) with u held over the step.
/// State must support `State + State` and `double * State`.
template <class State, class Input, class Field>
State step_rk4(Field&& field, const State& x, const Input& u, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_rk4: dt must be positive");
  const State k1 = field(x, u);
  const State k2 = field(State(x + (0.5 * dt) * k1), u);
  const State k3 = field(State(x + (0.5 * dt) * k2), u);
  const State k4 = field(State(x + dt * k3), u);
  return State(x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

/// Autonomous variant, x' = f(x).
template <class State, class Field>
State step_rk4(Field&& field, const State& x, double dt) {
  struct NoInput {};
  return step_rk4([&field](const State& s, NoInput) { return field(s); }, x, NoInput{}, dt);
}

}  // namespace lpvguide
