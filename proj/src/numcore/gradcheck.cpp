#include "coolflex/numcore/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "coolflex/errors.hpp"

namespace coolflex::numcore {

GradCheckReport grad_check(const ValueAndGradient& f, std::span<const double> point, double eps) {
  if (!(eps > 0.0)) throw ContractError("grad_check: eps must be positive");

  std::vector<double> theta(point.begin(), point.end());
  std::vector<double> analytic;
  const double f0 = f(theta, analytic);
  if (!std::isfinite(f0)) throw DivergenceError("grad_check: function value is not finite");
  if (analytic.size() != theta.size()) throw ContractError("grad_check: gradient size mismatch");

  std::vector<double> numeric(theta.size());
  std::vector<double> scratch;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double saved = theta[i];
    theta[i] = saved + eps;
    const double up = f(theta, scratch);
    theta[i] = saved - eps;
    const double down = f(theta, scratch);
    theta[i] = saved;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw DivergenceError("grad_check: function value is not finite");
    }
    numeric[i] = (up - down) / (2.0 * eps);
  }

  double scale = 0.0;
  for (double a : analytic) scale = std::max(scale, std::abs(a));
  const double floor = std::max(1e-3 * scale, std::numeric_limits<double>::min());

  GradCheckReport r;
  double diff2 = 0.0;
  double norm2 = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double d = std::abs(analytic[i] - numeric[i]);
    const double rel = d / std::max({std::abs(analytic[i]), std::abs(numeric[i]), floor});
    r.max_abs = std::max(r.max_abs, d);
    r.max_scaled = std::max(r.max_scaled, d / std::max(1.0, std::abs(analytic[i])));
    if (rel > r.max_rel) {
      r.max_rel = rel;
      r.worst_index = i;
    }
    diff2 += d * d;
    norm2 += analytic[i] * analytic[i];
  }
  r.norm_rel = norm2 > 0.0 ? std::sqrt(diff2 / norm2) : std::sqrt(diff2);
  return r;
}

}  // namespace coolflex::numcore
