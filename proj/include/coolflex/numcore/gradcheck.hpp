#pragma once

#include <functional>
#include <span>
#include <vector>

namespace coolflex::numcore {

/// Scalar function of a parameter vector that also fills its gradient.
using ValueAndGradient = std::function<double(std::span<const double> theta, std::vector<double>& grad)>;

struct GradCheckReport {
  double max_abs = 0.0;     ///< max_i |a_i - n_i|
  double max_scaled = 0.0;  ///< max_i |a_i - n_i| / max(1, |a_i|)
  /// max_i |a_i - n_i| / max(|a_i|, |n_i|, floor) with floor = 1e-3 * max_j |a_j|,
  /// so components far below the gradient's scale are judged against that scale.
  double max_rel = 0.0;
  double norm_rel = 0.0;  ///< ||a - n||_2 / ||a||_2
  std::size_t worst_index = 0;
};

/// Compares the analytic gradient of f at `point` against central
/// differences with step eps. Throws ContractError for eps <= 0 and
/// DivergenceError if f is non-finite.
GradCheckReport grad_check(const ValueAndGradient& f, std::span<const double> point, double eps = 1e-6);

}  // namespace coolflex::numcore
