#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "coolflex/models/forward.hpp"

namespace coolflex::training {

inline constexpr std::size_t kDefaultHorizons[] = {60, 1440, 7200};

/// Error statistics over the first `horizon` steps of a test slice.
struct HorizonSummary {
  std::size_t horizon = 0;  ///< [min]
  double mean = 0.0;        ///< [K]
  double median = 0.0;
  double p25 = 0.0;
  double p75 = 0.0;
  double max = 0.0;
  double pct_of_range = 0.0;    ///< 100 * mean / (T_b_max - T_b_min)
  double pct_of_celsius = 0.0;  ///< 100 * mean(|e| / |T_b in degC|)
};

struct EvalReport {
  std::vector<double> abs_error;  ///< |T_b - estimate| per step [K]
  std::vector<double> estimate;   ///< [K]
  std::vector<double> truth;      ///< noiseless T_b [K]
  std::vector<HorizonSummary> buckets;

  /// step,T_b,estimate,abs_error
  void write_errors(const std::filesystem::path& path) const;
  /// horizon,mean,median,p25,p75,max,pct_of_range,pct_of_celsius
  void write_summary(const std::filesystem::path& path) const;
};

/// Linear-interpolated percentile of unsorted values, q in [0, 1].
double percentile(std::vector<double> values, double q);

/// Free-running prediction over the slice, compared against the noiseless
/// temperature stored in each sample's target. Only samples[0].previous is
/// used as a measurement. Throws ContractError when the slice is shorter
/// than the longest horizon.
EvalReport evaluate(const models::ModelWeights& w, std::span<const models::Sample> test,
                    std::span<const std::size_t> horizons = kDefaultHorizons);

}  // namespace coolflex::training
