#include "coolflex/whitebox/tower_model.hpp"

#include <string>

namespace coolflex::whitebox {

numcore::Dual<double> physics_rhs_with_derivative(double T_b, double P_f, const WeatherSample& w,
                                                  const TowerParams& p) {
  return physics_rhs(numcore::Dual<double>{T_b, 1.0}, P_f, w, p);
}

void check_guard_band(double T_b, const TowerParams& p) {
  constexpr double kGuard = 20.0;
  if (!std::isfinite(T_b) || T_b < p.T_b_min - kGuard || T_b > p.T_b_max + kGuard) {
    throw DivergenceError("basin temperature left the guard band: T_b = " + std::to_string(T_b) + " K");
  }
}

TowerState step_euler(TowerState state, const TowerInputs& in, double dt, const TowerParams& p) {
  if (!(dt > 0.0)) throw ContractError("step_euler: dt must be positive");
  check_guard_band(state.T_b, p);
  state.T_b += dt * physics_rhs(state.T_b, in.P_f, in.weather, p);
  check_guard_band(state.T_b, p);
  return state;
}

TowerState step_rk4(TowerState state, const TowerInputs& in, double dt, const TowerParams& p) {
  if (!(dt > 0.0)) throw ContractError("step_rk4: dt must be positive");
  check_guard_band(state.T_b, p);
  const auto f = [&](double T) { return physics_rhs(T, in.P_f, in.weather, p); };
  const double T = state.T_b;
  const double k1 = f(T);
  const double k2 = f(T + 0.5 * dt * k1);
  const double k3 = f(T + 0.5 * dt * k2);
  const double k4 = f(T + dt * k3);
  state.T_b = T + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  check_guard_band(state.T_b, p);
  return state;
}

}  // namespace coolflex::whitebox
