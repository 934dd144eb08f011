#pragma once

#include <cstdint>
#include <vector>

#include "coolflex/models/forward.hpp"
#include "coolflex/numcore/gradcheck.hpp"
#include "coolflex/whitebox/tower_params.hpp"

namespace coolflex::training {

/// Problem size for the gradient and derivative checks.
struct SuiteOptions {
  int batch = 32;
  int seq_len = 8;
  int hidden_layers = 2;
  int hidden_width = 16;
  double lambda = 1e-4;
  double eps = 1e-6;
};

/// `count` consecutive samples from a one-day simulation, starting at a
/// seed-dependent minute that keeps the slice inside the day.
std::vector<models::Sample> suite_samples(std::uint64_t seed, int count, const whitebox::TowerParams& params);

/// Glorot weights with small random biases, so every block has a gradient.
models::ModelWeights suite_weights(const models::ModelSpec& spec, const models::Normalizer& norm, std::uint64_t seed);

/// Loss gradient of one kind against central differences.
numcore::GradCheckReport check_loss_gradient(models::ModelKind kind, std::uint64_t seed,
                                             const whitebox::TowerParams& params, const SuiteOptions& opts = {});

struct DerivativeCheck {
  double max_abs = 0.0;  ///< [K/s]
  double max_rel = 0.0;  ///< relative to max(|forward|, |numeric|, 1e-3 * largest |forward|)
};

/// Forward-mode dT/dt of a physics-informed kind against central
/// differences in time. For the feedback kind both teacher-forced and
/// free-running passes are checked.
DerivativeCheck check_time_derivative(models::ModelKind kind, std::uint64_t seed, const whitebox::TowerParams& params,
                                      const SuiteOptions& opts = {});

}  // namespace coolflex::training
