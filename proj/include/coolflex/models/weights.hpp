#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "coolflex/models/model_spec.hpp"
#include "coolflex/numcore/dense.hpp"

namespace coolflex::models {

/// One weight matrix inside the flat parameter vector, stored column-major.
struct WeightBlock {
  std::string name;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  std::size_t offset = 0;

  std::size_t size() const { return static_cast<std::size_t>(rows * cols); }
};

/// Deterministic block order for a ModelSpec.
///
/// Dense: hidden_l.w, hidden_l.b for each layer, then head.w, head.b.
/// LSTM:  lstm_l.wx, [lstm_0.wfb], lstm_l.wh, lstm_l.b for each layer, then
///        head.w, head.b. Gate rows are ordered input, forget, cell, output.
class WeightLayout {
 public:
  static WeightLayout for_spec(const ModelSpec& spec);

  const std::vector<WeightBlock>& blocks() const { return blocks_; }
  std::size_t size() const { return size_; }

 private:
  void add(std::string name, Eigen::Index rows, Eigen::Index cols);

  std::vector<WeightBlock> blocks_;
  std::size_t size_ = 0;
};

/// Flat parameter vector plus everything needed to interpret it.
struct ModelWeights {
  ModelSpec spec;
  Normalizer norm;
  std::vector<double> theta;

  WeightLayout layout() const { return WeightLayout::for_spec(spec); }

  /// Glorot-uniform weights (fan_in = columns, fan_out = rows, per gate for
  /// LSTM blocks) and zero biases, deterministic per seed.
  static ModelWeights initialize(const ModelSpec& spec, const Normalizer& norm, std::uint64_t seed);

  /// Splits theta into one matrix per layout block.
  std::vector<numcore::Matrix> unpack() const;
  /// Inverse of unpack. Throws ContractError on shape mismatch.
  static std::vector<double> pack(const WeightLayout& layout, const std::vector<numcore::Matrix>& blocks);

  /// Text format: a versioned header then one value per line.
  void save(const std::filesystem::path& path) const;
  static ModelWeights load(const std::filesystem::path& path);
  /// Also throws ParseError when the header does not match `expected`.
  static ModelWeights load(const std::filesystem::path& path, const ModelSpec& expected);
};

}  // namespace coolflex::models
