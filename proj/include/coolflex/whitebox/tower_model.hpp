#pragma once

#include <cmath>

#include "coolflex/errors.hpp"
#include "coolflex/whitebox/psychrometrics.hpp"
#include "coolflex/whitebox/tower_params.hpp"

namespace coolflex::whitebox {

/// Control and disturbance inputs held constant over one integration step.
struct TowerInputs {
  double P_f = 0.0;  ///< total fan power, both fans [W]
  WeatherSample weather;
};

struct TowerState {
  double T_b = 295.65;  ///< basin temperature [K]
};

/// Air mass flow induced by the fans [kg/s].
inline double air_mass_flow(double P_f, double rho_a, const TowerParams& p) {
  if (P_f < 0.0) throw ContractError("air mass flow: negative fan power");
  const double a_fr2 = p.A_fr * p.A_fr;
  const double num = 2.0 * P_f * rho_a * a_fr2 * p.eta_fan * p.eta_motor;
  const double den = 6.5 + p.K_el + 2.0 * a_fr2 / (p.A_fan * p.A_fan);
  return std::sqrt(num / den);
}

/// Heat delivered by the process water [W].
template <class S>
S process_heat(const S& T_b, const TowerParams& p) {
  if (p.qp_mode == ProcessHeatMode::Constant) return S{p.Q_p_const};
  return p.m_dot_w * p.c_w * (p.T_p - T_b);
}

/// Heat removed from the water by the air stream [W]. Leaving air is taken
/// as saturated at the basin temperature; positive when the basin is
/// warmer than the ambient air's equilibrium point.
template <class S>
S cooling_capacity(double m_dot_a, const WeatherSample& w, const S& T_b) {
  if (m_dot_a < 0.0) throw ContractError("cooling capacity: negative air mass flow");
  const double h_enter = moist_air_enthalpy(w.T_amb, humidity_ratio(w));
  const S h_leave = moist_air_enthalpy(T_b, saturation_humidity_ratio(T_b, w.p_amb));
  return m_dot_a * (h_leave - h_enter);
}

/// Right-hand side of the basin energy balance, dT_b/dt [K/s].
template <class S>
S physics_rhs(const S& T_b, double P_f, const WeatherSample& w, const TowerParams& p) {
  const double m_dot_a = air_mass_flow(P_f, air_density(w), p);
  const S q_p = process_heat(T_b, p);
  const S q_t = cooling_capacity(m_dot_a, w, T_b);
  return (q_p - q_t) / p.heat_capacity();
}

/// Value and dT_b-derivative of physics_rhs, via a dual number seeded on T_b.
numcore::Dual<double> physics_rhs_with_derivative(double T_b, double P_f, const WeatherSample& w,
                                                  const TowerParams& p);

/// Explicit Euler step. Throws DivergenceError when the new state leaves
/// the guard band [T_b_min - 20, T_b_max + 20] or is not finite.
TowerState step_euler(TowerState state, const TowerInputs& in, double dt, const TowerParams& p);

/// Classical fourth-order Runge-Kutta step with inputs held over the step.
TowerState step_rk4(TowerState state, const TowerInputs& in, double dt, const TowerParams& p);

/// Throws DivergenceError if T_b is outside the guard band.
void check_guard_band(double T_b, const TowerParams& p);

}  // namespace coolflex::whitebox
