#include "coolflex/datagen/fan_schedule.hpp"

#include <algorithm>
#include <random>

#include "coolflex/errors.hpp"

namespace coolflex::datagen {

void ScheduleSpec::validate() const {
  if (power_levels.empty()) throw ConfigError("fan schedule: power_levels must not be empty");
  if (min_hold < 1) throw ConfigError("fan schedule: min_hold must be >= 1");
  if (max_hold < min_hold) throw ConfigError("fan schedule: max_hold must be >= min_hold");
}

std::vector<FanPowers> fan_schedule(const ScheduleSpec& spec, int n_minutes) {
  spec.validate();
  if (n_minutes < 0) throw ContractError("fan schedule: negative length");
  std::vector<FanPowers> out(static_cast<std::size_t>(n_minutes));

  for (int fan = 0; fan < 2; ++fan) {
    std::seed_seq seq{spec.seed, static_cast<std::uint64_t>(fan)};
    std::mt19937_64 rng(seq);
    std::uniform_int_distribution<std::size_t> pick(0, spec.power_levels.size() - 1);
    std::uniform_int_distribution<int> hold(spec.min_hold, spec.max_hold);

    int m = 0;
    while (m < n_minutes) {
      const double level = spec.power_levels[pick(rng)];
      const int end = std::min(n_minutes, m + hold(rng));
      for (; m < end; ++m) {
        (fan == 0 ? out[static_cast<std::size_t>(m)].P_F1 : out[static_cast<std::size_t>(m)].P_F2) = level;
      }
    }
  }
  return out;
}

}  // namespace coolflex::datagen
