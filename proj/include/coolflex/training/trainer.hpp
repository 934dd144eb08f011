#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "coolflex/kvconfig.hpp"
#include "coolflex/models/forward.hpp"
#include "coolflex/models/weights.hpp"
#include "coolflex/whitebox/tower_params.hpp"

namespace coolflex::training {

struct TrainConfig {
  int adam_iters = 1000;
  double adam_lr = 1e-3;
  int lbfgs_max_evals = 5000;
  int lbfgs_memory = 10;
  double lambda = 1e-4;
  int batch_size = 0;  ///< samples per loss evaluation from the start of the slice; 0 = all
  int seq_len = 60;    ///< K
  std::uint64_t seed = 1;
  int chunk_columns = 64;  ///< windows per tape for recurrent kinds

  void validate() const;
  static TrainConfig from_config(const KeyValueConfig& cfg, TrainConfig base);
  static TrainConfig from_config(const KeyValueConfig& cfg) { return from_config(cfg, TrainConfig{}); }
  static const std::set<std::string>& keys();
};

struct TrainReport {
  models::ModelKind kind = models::ModelKind::NN;
  std::vector<double> loss;     ///< Adam iterations, then every L-BFGS evaluation
  std::vector<double> wall_ms;  ///< cumulative wall time at each entry
  int adam_iterations = 0;
  int lbfgs_evaluations = 0;
  std::optional<std::size_t> iterations_to_90;  ///< first entry with loss <= 10% of the initial loss
  bool diverged = false;
  bool line_search_warning = false;
  std::string message;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  models::ModelWeights weights;

  /// Columns iteration, loss, wall_ms.
  void write_curve(const std::filesystem::path& path) const;
  /// key,value lines.
  void write_summary(const std::filesystem::path& path) const;
};

/// First index whose loss is at most 10% of loss[0].
std::optional<std::size_t> iterations_to_fraction(std::span<const double> loss, double fraction = 0.1);

/// Adam for cfg.adam_iters full-batch iterations, then L-BFGS from the Adam
/// end point. A non-finite loss stops training and returns the report so
/// far with diverged set.
TrainReport train(const models::ModelSpec& spec, const models::Normalizer& norm,
                  std::span<const models::Sample> samples, const whitebox::TowerParams& params,
                  const TrainConfig& cfg);

/// Same, starting from the given weights instead of a fresh initialization.
TrainReport train_from(models::ModelWeights start, std::span<const models::Sample> samples,
                       const whitebox::TowerParams& params, const TrainConfig& cfg);

}  // namespace coolflex::training
