#include "coolflex/datagen/weather.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "coolflex/errors.hpp"
#include "coolflex/whitebox/psychrometrics.hpp"

namespace coolflex::datagen {
namespace {

/// Gaussian anchor values every `spacing` minutes, joined by cosine
/// interpolation so the signal has no jumps between minutes.
class SmoothAnomaly {
 public:
  SmoothAnomaly(std::mt19937_64& rng, int n_minutes, int spacing, double sigma) : spacing_(spacing) {
    std::normal_distribution<double> normal(0.0, sigma);
    anchors_.resize(static_cast<std::size_t>(n_minutes / spacing + 2));
    for (double& a : anchors_) a = normal(rng);
  }

  double at(int minute) const {
    const int k = minute / spacing_;
    const double frac = static_cast<double>(minute % spacing_) / spacing_;
    const double w = 0.5 * (1.0 - std::cos(std::numbers::pi * frac));
    return (1.0 - w) * anchors_[static_cast<std::size_t>(k)] + w * anchors_[static_cast<std::size_t>(k + 1)];
  }

 private:
  int spacing_;
  std::vector<double> anchors_;
};

}  // namespace

std::vector<whitebox::WeatherSample> synth_weather(std::uint64_t seed, int n_days, const ClimateSpec& c) {
  if (n_days < 1) throw ContractError("synth_weather: n_days must be >= 1");
  const int n = n_days * kMinutesPerDay;

  std::mt19937_64 rng(seed);
  const SmoothAnomaly synoptic(rng, n, 360, c.synoptic_sigma);
  const SmoothAnomaly humidity(rng, n, 360, c.rh_sigma);
  const SmoothAnomaly pressure(rng, n, 720, c.pressure_sigma);
  std::normal_distribution<double> jitter(0.0, c.jitter_sigma);

  constexpr double two_pi = 2.0 * std::numbers::pi;
  std::vector<whitebox::WeatherSample> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int m = 0; m < n; ++m) {
    const double day = static_cast<double>(m) / kMinutesPerDay;
    const double hour = static_cast<double>(m % kMinutesPerDay) / 60.0;
    const double annual = -c.annual_amplitude * std::cos(two_pi * (day - 15.0) / 365.0);
    const double diurnal = c.diurnal_amplitude * std::sin(two_pi * (hour - 9.0) / 24.0);
    const double anomaly = synoptic.at(m);

    whitebox::WeatherSample w;
    w.T_amb = whitebox::kKelvinOffset + c.annual_mean_c + annual + diurnal + anomaly + jitter(rng);
    w.rh = std::clamp(c.rh_mean + c.rh_per_kelvin * (diurnal + anomaly) + humidity.at(m), 0.2, 1.0);
    w.p_amb = 101325.0 + pressure.at(m);
    out.push_back(w);
  }
  return out;
}

}  // namespace coolflex::datagen
