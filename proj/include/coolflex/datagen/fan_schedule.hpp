#pragma once

#include <cstdint>
#include <vector>

namespace coolflex::datagen {

struct ScheduleSpec {
  std::vector<double> power_levels{100.0, 150.0, 200.0, 250.0};  ///< [W]
  int min_hold = 10;   ///< [min]
  int max_hold = 120;  ///< [min]
  std::uint64_t seed = 0;

  /// Throws ConfigError on empty levels, min_hold < 1 or max_hold < min_hold.
  void validate() const;
};

struct FanPowers {
  double P_F1 = 0.0;
  double P_F2 = 0.0;
  double total() const { return P_F1 + P_F2; }
};

/// Per-minute powers of both fans. Each fan independently holds a uniformly
/// drawn level for a uniformly drawn number of minutes in
/// [min_hold, max_hold], then redraws.
std::vector<FanPowers> fan_schedule(const ScheduleSpec& spec, int n_minutes);

}  // namespace coolflex::datagen
