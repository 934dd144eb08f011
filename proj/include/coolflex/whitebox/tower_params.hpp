#pragma once

#include <filesystem>
#include <set>
#include <string>

#include "coolflex/kvconfig.hpp"

namespace coolflex::whitebox {

enum class ProcessHeatMode { Constant, Formula };

/// Physical constants of the tower and its operating limits. SI units.
///
/// Defaults are artifact choices except Q_p_const, the basin limits
/// (9 and 36 degC) and eta_inv, which follow the reference experiment.
struct TowerParams {
  double c_w = 4186.0;         ///< specific heat of water [J/(kg K)]
  double V_w = 1.0;            ///< basin water volume [m^3]
  double rho_w = 1000.0;       ///< water density [kg/m^3]
  double m_dot_w = 1.0;        ///< process-water mass flow [kg/s]
  double T_p = 313.15;         ///< process water temperature [K]
  double A_fr = 4.0;           ///< tower frontal area [m^2]
  double A_fan = 1.0;          ///< fan area [m^2]
  double eta_fan = 0.85;       ///< fan efficiency
  double eta_motor = 0.9;      ///< motor efficiency
  double K_el = 1.0;           ///< eliminator coefficient (1 when unknown)
  double Q_p_const = 33.0;     ///< constant process heat [W]
  double T_b_min = 282.15;     ///< lower basin limit [K]
  double T_b_max = 309.15;     ///< upper basin limit [K]
  double eta_inv = 0.6;        ///< flexibility efficiency 1/eta
  ProcessHeatMode qp_mode = ProcessHeatMode::Constant;

  /// Thermal capacity of the basin, c_w * V_w * rho_w [J/K].
  double heat_capacity() const { return c_w * V_w * rho_w; }
  double range() const { return T_b_max - T_b_min; }

  /// Throws ConfigError when an invariant is broken.
  void validate() const;

  /// Reads every key named after a field (plus `qp_mode` = constant|formula).
  /// Other keys are ignored; use keys() to reject them.
  static TowerParams from_config(const KeyValueConfig& cfg, TowerParams base);
  static TowerParams from_config(const KeyValueConfig& cfg) { return from_config(cfg, TowerParams{}); }
  static TowerParams load(const std::filesystem::path& path);
  static const std::set<std::string>& keys();
};

ProcessHeatMode parse_qp_mode(const std::string& s);
std::string to_string(ProcessHeatMode mode);

/// Ambient air state at one timeslot.
struct WeatherSample {
  double T_amb = 293.15;   ///< [K]
  double p_amb = 101325.0; ///< [Pa]
  double rh = 0.5;         ///< relative humidity, fraction

  /// Throws ContractError outside T in [233,333] K, p in [8e4,1.1e5] Pa, rh in [0,1].
  void validate() const;
};

}  // namespace coolflex::whitebox
