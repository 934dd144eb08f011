#pragma once

#include <filesystem>
#include <set>
#include <string>

#include "coolflex/datagen/dataset.hpp"
#include "coolflex/flexibility/flexibility.hpp"
#include "coolflex/kvconfig.hpp"
#include "coolflex/models/model_spec.hpp"
#include "coolflex/training/trainer.hpp"
#include "coolflex/whitebox/tower_params.hpp"

namespace coolflex::cli {

/// Everything a command needs. Every key has a default.
struct RunConfig {
  whitebox::TowerParams tower;
  datagen::DatasetConfig dataset;
  training::TrainConfig train;
  models::ModelSpec model;

  int months = 1;         ///< walk-forward training length
  int fold = 0;
  bool all_folds = false;
  int train_days = 0;     ///< when > 0, train on days [0, train_days) instead of a walk-forward fold
  int test_days = 5;

  std::filesystem::path dataset_path;  ///< empty: <out>/dataset.csv
  std::filesystem::path weights_path;  ///< empty: <run dir>/weights.txt
  std::filesystem::path out_dir = "out";

  flexibility::RegionShape region = flexibility::RegionShape::ConvexHull;
  double roc_min = -10.0;
  double roc_max = 10.0;

  /// Applies a config file. Throws ConfigError on unknown keys or bad values.
  void apply(const KeyValueConfig& cfg);
  static const std::set<std::string>& keys();

  std::filesystem::path resolved_dataset() const;
};

}  // namespace coolflex::cli
