#include "coolflex/whitebox/tower_params.hpp"

#include <utility>
#include <vector>

#include "coolflex/errors.hpp"

namespace coolflex::whitebox {
namespace {

using Field = std::pair<const char*, double TowerParams::*>;

const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      {"c_w", &TowerParams::c_w},
      {"V_w", &TowerParams::V_w},
      {"rho_w", &TowerParams::rho_w},
      {"m_dot_w", &TowerParams::m_dot_w},
      {"T_p", &TowerParams::T_p},
      {"A_fr", &TowerParams::A_fr},
      {"A_fan", &TowerParams::A_fan},
      {"eta_fan", &TowerParams::eta_fan},
      {"eta_motor", &TowerParams::eta_motor},
      {"K_el", &TowerParams::K_el},
      {"Q_p_const", &TowerParams::Q_p_const},
      {"T_b_min", &TowerParams::T_b_min},
      {"T_b_max", &TowerParams::T_b_max},
      {"eta_inv", &TowerParams::eta_inv},
  };
  return f;
}

}  // namespace

void TowerParams::validate() const {
  for (const auto& [name, member] : fields()) {
    if (!(this->*member > 0.0)) {
      throw ConfigError(std::string("tower parameter ") + name + " must be strictly positive");
    }
  }
  if (eta_fan > 1.0) throw ConfigError("tower parameter eta_fan must be <= 1");
  if (eta_motor > 1.0) throw ConfigError("tower parameter eta_motor must be <= 1");
  if (!(T_b_min < T_b_max)) throw ConfigError("tower parameters require T_b_min < T_b_max");
}

TowerParams TowerParams::from_config(const KeyValueConfig& cfg, TowerParams base) {
  for (const auto& [name, member] : fields()) cfg.read(name, base.*member);
  if (cfg.contains("qp_mode")) base.qp_mode = parse_qp_mode(cfg.get("qp_mode"));
  base.validate();
  return base;
}

TowerParams TowerParams::load(const std::filesystem::path& path) {
  const KeyValueConfig cfg = KeyValueConfig::load(path);
  cfg.require_known(keys());
  return from_config(cfg);
}

const std::set<std::string>& TowerParams::keys() {
  static const std::set<std::string> k = [] {
    std::set<std::string> s{"qp_mode"};
    for (const auto& [name, member] : fields()) s.insert(name);
    return s;
  }();
  return k;
}

ProcessHeatMode parse_qp_mode(const std::string& s) {
  if (s == "constant") return ProcessHeatMode::Constant;
  if (s == "formula") return ProcessHeatMode::Formula;
  throw ConfigError("qp_mode must be 'constant' or 'formula', got '" + s + "'");
}

std::string to_string(ProcessHeatMode mode) {
  return mode == ProcessHeatMode::Constant ? "constant" : "formula";
}

void WeatherSample::validate() const {
  if (!(T_amb >= 233.0 && T_amb <= 333.0)) throw ContractError("weather: T_amb outside [233, 333] K");
  if (!(p_amb >= 8e4 && p_amb <= 1.1e5)) throw ContractError("weather: p_amb outside [8e4, 1.1e5] Pa");
  if (!(rh >= 0.0 && rh <= 1.0)) throw ContractError("weather: rh outside [0, 1]");
}

}  // namespace coolflex::whitebox
