#pragma once

#include <cstdint>
#include <vector>

#include "coolflex/whitebox/tower_params.hpp"

namespace coolflex::datagen {

inline constexpr int kMinutesPerDay = 1440;

/// Shape of the synthetic climate. Temperatures in degC, amplitudes in K.
struct ClimateSpec {
  double annual_mean_c = 22.0;
  double annual_amplitude = 6.0;     ///< coldest around mid-January
  double diurnal_amplitude = 4.5;    ///< warmest at 15:00, coldest at 03:00
  double synoptic_sigma = 2.0;       ///< multi-hour weather anomalies
  double jitter_sigma = 0.01;        ///< per-minute white noise on T_amb
  double rh_mean = 0.65;
  double rh_per_kelvin = -0.03;      ///< rh falls as the air warms
  double rh_sigma = 0.05;
  double pressure_sigma = 600.0;     ///< [Pa]
};

/// Per-minute synthetic weather for n_days, deterministic per seed.
/// Throws ContractError if n_days < 1.
std::vector<whitebox::WeatherSample> synth_weather(std::uint64_t seed, int n_days,
                                                   const ClimateSpec& climate = {});

}  // namespace coolflex::datagen
