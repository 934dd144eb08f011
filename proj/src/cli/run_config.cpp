#include "coolflex/cli/run_config.hpp"

#include "coolflex/errors.hpp"

namespace coolflex::cli {

void RunConfig::apply(const KeyValueConfig& cfg) {
  cfg.require_known(keys());
  tower = whitebox::TowerParams::from_config(cfg, tower);
  dataset = datagen::DatasetConfig::from_config(cfg, dataset);
  train = training::TrainConfig::from_config(cfg, train);
  if (cfg.contains("model")) model.kind = models::parse_model_kind(cfg.get("model"));
  cfg.read("hidden_layers", model.hidden_layers);
  cfg.read("hidden_width", model.hidden_width);
  model.seq_len = train.seq_len;
  model.validate();
  cfg.read("months", months);
  cfg.read("fold", fold);
  cfg.read("train_days", train_days);
  cfg.read("test_days", test_days);
  if (cfg.contains("dataset")) dataset_path = cfg.get("dataset");
  if (cfg.contains("weights")) weights_path = cfg.get("weights");
  if (cfg.contains("out")) out_dir = cfg.get("out");
  if (cfg.contains("region")) region = flexibility::parse_region_shape(cfg.get("region"));
  cfg.read("roc_min", roc_min);
  cfg.read("roc_max", roc_max);
  if (train_days < 0) throw ConfigError("train_days must be >= 0");
  if (test_days < 1) throw ConfigError("test_days must be >= 1");
}

const std::set<std::string>& RunConfig::keys() {
  static const std::set<std::string> k = [] {
    std::set<std::string> all{"model",      "hidden_layers", "hidden_width", "months", "fold",    "train_days",
                              "test_days",  "dataset",       "weights",      "out",    "region",  "roc_min",
                              "roc_max"};
    for (const auto* part : {&whitebox::TowerParams::keys(), &datagen::DatasetConfig::keys(),
                             &training::TrainConfig::keys()}) {
      all.insert(part->begin(), part->end());
    }
    return all;
  }();
  return k;
}

std::filesystem::path RunConfig::resolved_dataset() const {
  return dataset_path.empty() ? out_dir / "dataset.csv" : dataset_path;
}

}  // namespace coolflex::cli
