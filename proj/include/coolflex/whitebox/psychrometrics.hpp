#pragma once

// Moist-air property correlations (Magnus saturation pressure, ideal-gas
// mixture). Temperature arguments are in kelvin. The functions are
// templated on the scalar type so the basin-temperature path can run on
// dual numbers.

#include <cmath>

#include "coolflex/errors.hpp"
#include "coolflex/numcore/dual.hpp"
#include "coolflex/whitebox/tower_params.hpp"

namespace coolflex::whitebox {

inline constexpr double kKelvinOffset = 273.15;
inline constexpr double kRatioMolarMass = 0.622;  // M_water / M_dry_air
inline constexpr double kGasConstantDryAir = 287.05;
inline constexpr double kGasConstantVapor = 461.5;
inline constexpr double kCpDryAir = 1006.0;        // J/(kg K)
inline constexpr double kCpVapor = 1860.0;         // J/(kg K)
inline constexpr double kLatentHeat0C = 2.501e6;   // J/kg

/// Saturation vapour pressure over water [Pa] (Magnus form).
template <class S>
S saturation_pressure(const S& t_kelvin) {
  using std::exp;
  using numcore::exp;
  const S tc = t_kelvin - kKelvinOffset;
  return 610.94 * exp(17.625 * tc / (tc + 243.04));
}

/// Humidity ratio from vapour partial pressure, kg vapour per kg dry air.
template <class S>
S humidity_ratio_from_vapor(const S& p_vapor, double p_total) {
  if (!(numcore::value_of(p_vapor) < p_total)) {
    throw ContractError("humidity ratio: vapour pressure reaches total pressure");
  }
  return kRatioMolarMass * p_vapor / (p_total - p_vapor);
}

/// Humidity ratio of the ambient air.
inline double humidity_ratio(const WeatherSample& w) {
  return humidity_ratio_from_vapor(w.rh * saturation_pressure(w.T_amb), w.p_amb);
}

/// Humidity ratio of saturated air at temperature t_kelvin and pressure p.
template <class S>
S saturation_humidity_ratio(const S& t_kelvin, double p_total) {
  return humidity_ratio_from_vapor(saturation_pressure(t_kelvin), p_total);
}

/// Specific enthalpy of moist air [J/kg dry air], zero at 0 degC dry air.
template <class S, class W>
auto moist_air_enthalpy(const S& t_kelvin, const W& omega) {
  if (numcore::value_of(omega) < 0.0) throw ContractError("enthalpy: negative humidity ratio");
  const S tc = t_kelvin - kKelvinOffset;
  return kCpDryAir * tc + omega * (kLatentHeat0C + kCpVapor * tc);
}

/// Density of the dry-air / vapour mixture [kg/m^3].
inline double air_density(const WeatherSample& w) {
  const double p_v = w.rh * saturation_pressure(w.T_amb);
  if (!(p_v < w.p_amb)) throw ContractError("air density: vapour pressure reaches total pressure");
  const double p_d = w.p_amb - p_v;
  return p_d / (kGasConstantDryAir * w.T_amb) + p_v / (kGasConstantVapor * w.T_amb);
}

}  // namespace coolflex::whitebox
