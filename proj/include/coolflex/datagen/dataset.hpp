#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "coolflex/datagen/fan_schedule.hpp"
#include "coolflex/datagen/weather.hpp"
#include "coolflex/kvconfig.hpp"
#include "coolflex/whitebox/tower_params.hpp"

namespace coolflex::datagen {

/// One simulated minute. t_n is the start of the slot in decimal hours.
struct SimRecord {
  double t_n = 0.0;      ///< [h], 0 <= t_n < 24
  int day = 0;           ///< 0-based day index
  double P_F1 = 0.0;     ///< [W]
  double P_F2 = 0.0;     ///< [W]
  double Q_p = 0.0;      ///< [W]
  double T_b = 0.0;      ///< true basin temperature [K]
  double T_b_noisy = 0.0;  ///< measured basin temperature [K]
  double T_amb = 0.0;    ///< [K]
  double p_amb = 0.0;    ///< [Pa]
  double rh = 0.0;       ///< fraction

  double hours() const { return 24.0 * day + t_n; }  ///< unwrapped time [h]
  whitebox::WeatherSample weather() const { return {T_amb, p_amb, rh}; }
  double total_power() const { return P_F1 + P_F2; }

  bool operator==(const SimRecord&) const = default;
};

struct SimulationOptions {
  double noise_sigma = 0.02;  ///< [K]
  std::uint64_t noise_seed = 0;
  double dt = 60.0;           ///< [s]
};

/// Integrates the white-box model with explicit Euler, one record per step,
/// starting from the midpoint of the operating limits. Record k holds the
/// state at the start of minute k and the inputs applied during it.
/// Throws ContractError when lengths differ, DivergenceError on blow-up.
std::vector<SimRecord> simulate_dataset(const whitebox::TowerParams& params,
                                        const std::vector<FanPowers>& schedule,
                                        const std::vector<whitebox::WeatherSample>& weather,
                                        const SimulationOptions& options = {});

/// Everything needed to regenerate a dataset.
struct DatasetConfig {
  std::uint64_t seed = 1;
  int n_days = 365;
  double noise_sigma = 0.02;
  int min_hold = 10;
  int max_hold = 120;

  void validate() const;
  /// Reads seed, n_days, noise_sigma, min_hold, max_hold when present.
  static DatasetConfig from_config(const KeyValueConfig& cfg, DatasetConfig base);
  static DatasetConfig from_config(const KeyValueConfig& cfg) { return from_config(cfg, DatasetConfig{}); }
  static const std::set<std::string>& keys();
};

/// Weather, schedule and noise all derive from cfg.seed.
std::vector<SimRecord> generate_dataset(const whitebox::TowerParams& params, const DatasetConfig& cfg);

/// Fraction-of-day representation of a decimal-hours timestamp.
inline double fraction_of_day(double t_n_hours) { return t_n_hours / 24.0; }

inline constexpr const char* kCsvHeader = "t_n,day,P_F1,P_F2,Q_p,T_b,T_b_noisy,T_amb,p_amb,rh";

/// Writes the header and one row per record. Numbers use the shortest
/// representation that round-trips exactly.
void write_csv(const std::vector<SimRecord>& records, std::ostream& out);
void write_csv(const std::vector<SimRecord>& records, const std::filesystem::path& path);

/// Throws ParseError naming the missing column or the malformed line.
std::vector<SimRecord> read_csv(std::istream& in);
std::vector<SimRecord> read_csv(const std::filesystem::path& path);

}  // namespace coolflex::datagen
