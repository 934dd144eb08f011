#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "coolflex/numcore/gradcheck.hpp"

namespace coolflex::training {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long step = 0;
};

/// One bias-corrected Adam update in place. Throws DivergenceError on a
/// non-finite gradient and ContractError on a shape mismatch.
void adam_step(std::vector<double>& theta, std::span<const double> grad, AdamState& state,
               const AdamOptions& options = {});

struct LbfgsOptions {
  std::size_t max_evals = 5000;
  std::size_t memory = 10;
  double grad_tol = 1e-8;   ///< stop when ||g||_2 falls below
  double rel_tol = 1e-12;   ///< stop when the relative loss change falls below
  double c1 = 1e-4;
  double c2 = 0.9;
  std::size_t max_line_evals = 25;
  std::size_t max_iterations = 0;  ///< 0 = no limit
};

struct LbfgsResult {
  std::vector<double> theta;  ///< best point seen
  double loss = 0.0;
  std::size_t evaluations = 0;
  std::size_t iterations = 0;
  bool line_search_failed = false;  ///< warning, not an error
  std::string stop_reason;
};

/// Two-loop L-BFGS with a strong-Wolfe line search. `on_eval` sees every
/// loss value in evaluation order. Throws DivergenceError if the loss at
/// the start point is not finite.
LbfgsResult lbfgs_minimize(const numcore::ValueAndGradient& f, std::vector<double> x0,
                           const LbfgsOptions& options = {},
                           const std::function<void(double)>& on_eval = {});

}  // namespace coolflex::training
